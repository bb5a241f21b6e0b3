#pragma once

#include <Eigen/Core>

#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace bumpkit {

using Index = std::int64_t;

struct Grid {
    int levels = 1;
    int span = 0;

    Grid() = default;
    Grid(int levels_, int span_);

    int depth() const { return levels + span; }
    Index cells() const { return Index{1} << depth(); }
    double cell_width() const { return std::ldexp(1.0, -levels); }
    double length() const { return std::ldexp(1.0, span); }
    double center(Index cell) const { return (static_cast<double>(cell) + 0.5) * cell_width(); }

    bool operator==(const Grid&) const = default;
};

struct IntervalRef {
    Index start = 0;
    Index len = 1;

    Index end() const { return start + len; }
    bool contains(Index cell) const { return cell >= start && cell < end(); }
    bool contains(const IntervalRef& o) const { return o.start >= start && o.end() <= end(); }
    bool intersects(const IntervalRef& o) const { return start < o.end() && o.start < end(); }
    double measure(const Grid& g) const { return static_cast<double>(len) * g.cell_width(); }
    bool is_dyadic() const;

    bool operator==(const IntervalRef&) const = default;
    auto operator<=>(const IntervalRef&) const = default;
};

// Dyadic interval at the given depth (0 = whole domain) and offset.
IntervalRef dyadic_interval(const Grid& g, int depth, Index offset);
void check_interval(const Grid& g, const IntervalRef& I);

class StepFn {
public:
    StepFn() = default;
    StepFn(Grid g, Eigen::ArrayXd values, bool is_signed = false);

    static StepFn constant(const Grid& g, double c);
    static StepFn zeros(const Grid& g) { return constant(g, 0.0); }
    static StepFn indicator(const Grid& g, const IntervalRef& I, double height = 1.0);
    // f sampled at cell centers
    static StepFn sample(const Grid& g, const std::function<double(double)>& f, bool is_signed = false);

    const Grid& grid() const { return grid_; }
    const Eigen::ArrayXd& values() const { return values_; }
    bool is_signed() const { return signed_; }
    Index size() const { return values_.size(); }
    double operator[](Index i) const { return values_[i]; }

    StepFn abs() const { return StepFn(grid_, values_.abs()); }
    StepFn pow(double e) const;
    StepFn with_values(Eigen::ArrayXd v) const;
    StepFn as_signed() const { return StepFn(grid_, values_, true); }

private:
    Grid grid_;
    Eigen::ArrayXd values_;
    bool signed_ = false;
};

double integrate(const StepFn& f, const IntervalRef& I);
double average(const StepFn& f, const IntervalRef& I);
double integrate(const StepFn& f);

// sum over cells of f*g*h
double inner(const StepFn& f, const StepFn& g);
double lp_norm(const StepFn& f, double p, const StepFn* weight = nullptr);

enum class ScanMode { dyadic, all_aligned };
const char* to_string(ScanMode m);
ScanMode parse_scan_mode(const std::string& s);

std::vector<IntervalRef> enumerate_intervals(const Grid& g, ScanMode mode, std::size_t budget = SIZE_MAX);
// Intervals contained in R, same ordering rules.
std::vector<IntervalRef> enumerate_within(const IntervalRef& R, ScanMode mode);

// O(1) integrals after O(n) setup.
class PrefixSums {
public:
    explicit PrefixSums(const StepFn& f);
    double integral(const IntervalRef& I) const;
    double average(const IntervalRef& I) const { return integral(I) / I.measure(grid_); }

private:
    Grid grid_;
    std::vector<long double> acc_;
};

void write_stepfn_csv(const StepFn& f, const std::string& path);
StepFn read_stepfn_csv(const std::string& path);

} // namespace bumpkit
