#pragma once

#include "bumpkit/grid.hpp"

#include <optional>

namespace bumpkit {

// Discrete Hilbert kernel 1/(x - y) between cell centers, 0 on the diagonal.
struct KernelOp {
    Grid grid;

    double operator()(Index x, Index y) const {
        return x == y ? 0.0 : 1.0 / ((static_cast<double>(x) - static_cast<double>(y)) * grid.cell_width());
    }
};

StepFn cz_apply(const KernelOp& T, const StepFn& f);

// T_b^m f = b T_b^{m-1} f - T_b^{m-1}(b f); with verify, also evaluates the kernel form and
// throws std::logic_error if they disagree beyond 1e-10.
StepFn commutator_apply(const KernelOp& T, const StepFn& b, const StepFn& f, int m, bool verify = true);
StepFn commutator_kernel_form(const KernelOp& T, const StepFn& b, const StepFn& f, int m);
// max |recursion - kernel form| over the absolute kernel sum sup_x sum_y |b(x)-b(y)|^m |K(x,y)| |f(y)| h
double commutator_discrepancy(const KernelOp& T, const StepFn& b, const StepFn& f, int m);

struct BmoReport {
    double norm = 0.0;
    IntervalRef maximizer;
    ScanMode mode = ScanMode::all_aligned;
};

BmoReport bmo_norm(const StepFn& b, const StepFn* eta = nullptr, ScanMode mode = ScanMode::all_aligned,
                   const std::optional<IntervalRef>& window = std::nullopt);

struct JonesExtension {
    StepFn phi;
    double bmo_phi;
    double bmo_f; // over intervals inside R
    double ratio;
};

JonesExtension jones_extend(const StepFn& f, const IntervalRef& R, ScanMode mode = ScanMode::all_aligned);

struct NeccondTest {
    StepFn g;
    double g_Q;
};

// g = log+( M(sigma chi_Q) / sigma_Q ), sigma = v^{1-p'}
NeccondTest neccond_testfn(const StepFn& v, const IntervalRef& Q, double p);

struct Partner {
    IntervalRef interval;
    bool reflected = false;
    double kernel_at_centers; // K(x0, y0)
    double epsilon;           // max |K(x,y) - K(x0,y0)| * A |B|
};

Partner disjoint_partner(const Grid& g, const IntervalRef& B, double A);

} // namespace bumpkit
