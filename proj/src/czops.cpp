#include "bumpkit/czops.hpp"

#include "bumpkit/orlicz.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace bumpkit {

namespace {

// sum_{j != i} w_j / (i - j) for every i, scaled so that h cancels
Eigen::ArrayXd hilbert_sum(const Eigen::ArrayXd& w) {
    Index n = w.size();
    std::vector<double> inv(static_cast<std::size_t>(n), 0.0);
    for (Index d = 1; d < n; ++d) inv[d] = 1.0 / static_cast<double>(d);
    Eigen::ArrayXd out(n);
    for (Index i = 0; i < n; ++i) {
        double s = 0.0;
        for (Index j = 0; j < i; ++j) s += w[j] * inv[i - j];
        for (Index j = i + 1; j < n; ++j) s -= w[j] * inv[j - i];
        out[i] = s;
    }
    return out;
}

void check_same_grid(const KernelOp& T, const StepFn& f) {
    if (!(T.grid == f.grid())) throw std::invalid_argument("kernel and function live on different grids");
}

} // namespace

StepFn cz_apply(const KernelOp& T, const StepFn& f) {
    check_same_grid(T, f);
    return StepFn(T.grid, hilbert_sum(f.values()), true);
}

StepFn commutator_kernel_form(const KernelOp& T, const StepFn& b, const StepFn& f, int m) {
    check_same_grid(T, f);
    check_same_grid(T, b);
    if (m < 0) throw std::invalid_argument("commutator order must be >= 0");
    if (m == 0) return cz_apply(T, f);
    Index n = f.size();
    const auto& bv = b.values();
    const auto& fv = f.values();
    Eigen::ArrayXd out(n);
    for (Index i = 0; i < n; ++i) {
        double s = 0.0;
        for (Index j = 0; j < n; ++j) {
            if (j == i) continue;
            double d = bv[i] - bv[j], dm = d;
            for (int k = 1; k < m; ++k) dm *= d;
            s += dm * fv[j] / static_cast<double>(i - j);
        }
        out[i] = s;
    }
    return StepFn(T.grid, std::move(out), true);
}

namespace {

StepFn commutator_recursive(const KernelOp& T, const StepFn& b, const StepFn& f, int m) {
    if (m == 0) return cz_apply(T, f);
    StepFn bf(T.grid, b.values() * f.values(), true);
    StepFn left = commutator_recursive(T, b, f, m - 1);
    StepFn right = commutator_recursive(T, b, bf, m - 1);
    return StepFn(T.grid, b.values() * left.values() - right.values(), true);
}

double abs_kernel_scale(const StepFn& b, const StepFn& f, int m) {
    Index n = f.size();
    double worst = 0.0;
    for (Index i = 0; i < n; ++i) {
        double s = 0.0;
        for (Index j = 0; j < n; ++j) {
            if (j == i) continue;
            s += std::pow(std::abs(b[i] - b[j]), m) * std::abs(f[j]) / std::abs(static_cast<double>(i - j));
        }
        worst = std::max(worst, s);
    }
    return worst;
}

} // namespace

double commutator_discrepancy(const KernelOp& T, const StepFn& b, const StepFn& f, int m) {
    StepFn rec = commutator_recursive(T, b, f, m);
    StepFn ker = commutator_kernel_form(T, b, f, m);
    double diff = (rec.values() - ker.values()).abs().maxCoeff();
    if (diff == 0.0) return 0.0;
    double scale = abs_kernel_scale(b, f, m);
    // b constant: the kernel form vanishes and the recursion leaves rounding of b T f
    if (scale == 0.0)
        scale = std::pow(b.values().abs().maxCoeff(), m) * f.values().abs().sum() *
                (1.0 + std::log(static_cast<double>(f.size())));
    return scale > 0 ? diff / scale : std::numeric_limits<double>::infinity();
}

StepFn commutator_apply(const KernelOp& T, const StepFn& b, const StepFn& f, int m, bool verify) {
    check_same_grid(T, f);
    check_same_grid(T, b);
    if (m < 0) throw std::invalid_argument("commutator order must be >= 0");
    StepFn rec = commutator_recursive(T, b, f, m);
    if (verify && m > 0) {
        double err = commutator_discrepancy(T, b, f, m);
        if (err > 1e-10) throw std::logic_error("commutator recursion and kernel form disagree");
    }
    return rec;
}

BmoReport bmo_norm(const StepFn& b, const StepFn* eta, ScanMode mode, const std::optional<IntervalRef>& window) {
    const Grid& g = b.grid();
    IntervalRef W = window.value_or(IntervalRef{0, g.cells()});
    check_interval(g, W);
    if (eta) {
        if (!(eta->grid() == g)) throw std::invalid_argument("bmo_norm: eta on a different grid");
        if ((eta->values() <= 0.0).any()) throw std::invalid_argument("bmo_norm: eta must be positive");
    }
    PrefixSums pb(b);
    std::optional<PrefixSums> pe;
    if (eta) pe.emplace(*eta);
    BmoReport rep;
    rep.mode = mode;
    rep.maximizer = W;
    for (const auto& Q : enumerate_within(W, mode)) {
        if (Q.len == 1) continue;
        double mean = pb.average(Q);
        double osc = (b.values().segment(Q.start, Q.len) - mean).abs().sum() * g.cell_width();
        double v = osc / (pe ? pe->integral(Q) : Q.measure(g));
        if (v > rep.norm) {
            rep.norm = v;
            rep.maximizer = Q;
        }
    }
    return rep;
}

JonesExtension jones_extend(const StepFn& f, const IntervalRef& R, ScanMode mode) {
    const Grid& g = f.grid();
    check_interval(g, R);
    if (R.len < 2 || R.len % 2) throw std::invalid_argument("jones_extend: R needs an even number of cells");
    Index half = R.len / 2;
    if (R.start - half < 0 || R.end() + half > g.cells())
        throw std::invalid_argument("jones_extend: 2R leaves the domain");
    double scale = std::max(1.0, f.values().segment(R.start, R.len).abs().maxCoeff());
    if (std::abs(average(f, R)) > 1e-9 * scale) throw std::invalid_argument("jones_extend: f_R must vanish");

    PrefixSums pf(f);
    Eigen::ArrayXd phi = Eigen::ArrayXd::Zero(g.cells());
    phi.segment(R.start, R.len) = f.values().segment(R.start, R.len);
    // tiles [edge + floor(half/2^{k+1}), edge + floor(half/2^k)) on each side, mirrored into R
    for (Index k = 0;; ++k) {
        Index outer = half >> k, inner = half >> (k + 1);
        if (outer == 0) break;
        if (outer == inner) continue;
        IntervalRef right{R.end() + inner, outer - inner}, left{R.start - outer, outer - inner};
        IntervalRef mirror_r{R.end() - outer, outer - inner}, mirror_l{R.start + inner, outer - inner};
        phi.segment(right.start, right.len).setConstant(pf.average(mirror_r));
        phi.segment(left.start, left.len).setConstant(pf.average(mirror_l));
    }
    StepFn out(g, std::move(phi), true);
    double bf = bmo_norm(f, nullptr, mode, R).norm;
    double bp = bmo_norm(out, nullptr, mode).norm;
    return {std::move(out), bp, bf, bf > 0 ? bp / bf : (bp > 0 ? std::numeric_limits<double>::infinity() : 0.0)};
}

NeccondTest neccond_testfn(const StepFn& v, const IntervalRef& Q, double p) {
    if (!(p > 1.0)) throw std::invalid_argument("neccond_testfn: p must exceed 1");
    if ((v.values() <= 0.0).any()) throw std::invalid_argument("neccond_testfn: v must be positive");
    check_interval(v.grid(), Q);
    double pp = p / (p - 1.0);
    Eigen::ArrayXd sq = Eigen::ArrayXd::Zero(v.size());
    sq.segment(Q.start, Q.len) = v.values().segment(Q.start, Q.len).pow(1.0 - pp);
    StepFn sigmaQ(v.grid(), sq);
    double sQ = average(sigmaQ, Q);
    StepFn M = hardy_littlewood(sigmaQ, ScanMode::all_aligned);
    Eigen::ArrayXd gv = (M.values() / sQ).log().max(0.0);
    StepFn g(v.grid(), std::move(gv));
    double gQ = average(g, Q);
    return {std::move(g), gQ};
}

Partner disjoint_partner(const Grid& g, const IntervalRef& B, double A) {
    check_interval(g, B);
    if (!(A >= 3.0)) throw std::invalid_argument("disjoint_partner: A must be >= 3");
    Index gap = static_cast<Index>(std::llround(A * static_cast<double>(B.len)));
    Partner out;
    IntervalRef P{B.end() + gap, B.len};
    if (P.end() > g.cells()) {
        P = {B.start - gap - B.len, B.len};
        out.reflected = true;
    }
    if (P.start < 0) throw std::out_of_range("disjoint_partner: no placement at this distance fits the domain");
    out.interval = P;
    KernelOp K{g};
    double h = g.cell_width();
    double x0 = (static_cast<double>(P.start) + 0.5 * static_cast<double>(P.len)) * h;
    double y0 = (static_cast<double>(B.start) + 0.5 * static_cast<double>(B.len)) * h;
    out.kernel_at_centers = 1.0 / (x0 - y0);
    double worst = 0.0;
    for (Index x = P.start; x < P.end(); ++x)
        for (Index y = B.start; y < B.end(); ++y) worst = std::max(worst, std::abs(K(x, y) - out.kernel_at_centers));
    out.epsilon = worst * A * B.measure(g);
    return out;
}

} // namespace bumpkit
