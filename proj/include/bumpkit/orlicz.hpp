#pragma once

#include "bumpkit/grid.hpp"

#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace bumpkit {

// t^p log^alpha(e+t)
struct PowerLog {
    double p;
    double alpha;
};
// t^p / log^{1+mu}(e+t)
struct PowerOverLog {
    double p;
    double mu;
};
// t log^alpha(e+t)
struct LinLog {
    double alpha;
};
// monotone samples (t_i, y_i), t_i > 0, interpolated linearly in log-log coordinates
struct Tabulated {
    std::vector<double> t;
    std::vector<double> y;
};

// log(e + e^x) without overflow
inline double log_e_plus_exp(double x) {
    return x > 1.0 ? x + std::log1p(std::exp(1.0 - x)) : 1.0 + std::log1p(std::exp(x - 1.0));
}

class YoungFn {
public:
    using Kind = std::variant<PowerLog, PowerOverLog, LinLog, Tabulated>;

    YoungFn() : YoungFn(PowerLog{1.0, 0.0}) {}
    explicit YoungFn(Kind k);

    static YoungFn power(double p) { return YoungFn(PowerLog{p, 0.0}); }
    static YoungFn power_log(double p, double alpha) { return YoungFn(PowerLog{p, alpha}); }
    static YoungFn power_over_log(double p, double mu) { return YoungFn(PowerOverLog{p, mu}); }
    static YoungFn lin_log(double alpha) { return YoungFn(LinLog{alpha}); }
    // plog:p:alpha, poverlog:p:mu, linlog:alpha
    static YoungFn parse(const std::string& spec);

    double operator()(double t) const;
    // log Phi(e^x)
    double log_eval(double x) const;
    double inverse(double y) const;

    const Kind& kind() const { return kind_; }
    std::string name() const;
    // t^q exactly (PowerLog(q,0) or LinLog(0))
    bool is_power() const { return power_ > 0.0; }
    double power() const { return power_; }

private:
    Kind kind_;
    double power_ = 0.0;
    std::vector<double> log_t_, log_y_;
};

double young_eval(const YoungFn& phi, double t);
double young_inverse(const YoungFn& phi, double y);

struct Complementary {
    double value;
    double argmax; // maximizing s, i.e. the derivative of the complementary function
    bool saturated;
};

inline constexpr double kSaturation = 1e300;

// sup_{s>=0}(st - Phi(s)) on a log-spaced s grid, locally refined
Complementary complementary_eval(const YoungFn& phi, double t);

class ComplementaryFn {
public:
    explicit ComplementaryFn(YoungFn base);

    const YoungFn& base() const { return base_; }
    // table lookup; saturated values are +inf
    double operator()(double t) const;
    Complementary exact(double t) const { return complementary_eval(base_, t); }
    double inverse(double y) const;
    // Phi-bar vanishes on [0, zero_threshold]
    double zero_threshold() const { return zero_below_; }

private:
    YoungFn base_;
    double log_t0_ = 0.0, dlog_ = 0.0;
    std::vector<double> values_;
    double zero_below_ = 0.0;
};

// Solve for log(lambda) with G(s) = log avg Phi(f e^{-s}) = 0; G is nonincreasing.
template <class G>
double solve_log_gauge(G&& g, double s0) {
    double lo = s0, hi = s0;
    double glo = g(lo), ghi = glo;
    double step = 0.5;
    if (glo > 0) {
        while (ghi > 0) {
            lo = hi;
            glo = ghi;
            hi += step;
            step *= 2;
            ghi = g(hi);
        }
    } else {
        while (glo <= 0) {
            hi = lo;
            ghi = glo;
            lo -= step;
            step *= 2;
            glo = g(lo);
            if (step > 1e8) return lo;
        }
    }
    // Illinois false position, falling back to bisection on non-finite values
    int side = 0;
    for (int it = 0; it < 300 && hi - lo > 1e-12 * std::max(1.0, std::abs(lo)); ++it) {
        double s;
        if (std::isfinite(glo) && std::isfinite(ghi) && glo != ghi) {
            s = (lo * ghi - hi * glo) / (ghi - glo);
            if (!(s > lo && s < hi)) s = 0.5 * (lo + hi);
        } else {
            s = 0.5 * (lo + hi);
        }
        double gs = g(s);
        if (gs > 0) {
            lo = s;
            glo = gs;
            if (side == -1) ghi *= 0.5;
            side = -1;
        } else {
            hi = s;
            ghi = gs;
            if (side == 1) glo *= 0.5;
            side = 1;
        }
    }
    return 0.5 * (lo + hi);
}

// Normalized Luxemburg norm of values with the given measures under any increasing Phi.
template <class Phi>
double luxemburg_norm_with(std::span<const double> values, std::span<const double> measures, const Phi& phi) {
    double mx = 0.0, total = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        total += measures[i];
        if (measures[i] > 0) mx = std::max(mx, std::abs(values[i]));
    }
    if (mx == 0.0 || total <= 0.0) return 0.0;
    auto g = [&](double s) {
        double inv = std::exp(-s), acc = 0.0;
        for (std::size_t i = 0; i < values.size(); ++i)
            if (values[i] != 0.0) acc += measures[i] * phi(std::abs(values[i]) * inv);
        return std::log(acc / total);
    };
    return std::exp(solve_log_gauge(g, std::log(mx)));
}

template <class Phi>
double luxemburg_norm_with(std::span<const double> values, const Phi& phi) {
    double mx = 0.0;
    for (double v : values) mx = std::max(mx, std::abs(v));
    if (mx == 0.0 || values.empty()) return 0.0;
    double n = static_cast<double>(values.size());
    auto g = [&](double s) {
        double inv = std::exp(-s), acc = 0.0;
        for (double v : values)
            if (v != 0.0) acc += phi(std::abs(v) * inv);
        return std::log(acc / n);
    };
    return std::exp(solve_log_gauge(g, std::log(mx)));
}

double luxemburg_norm(std::span<const double> values, const YoungFn& phi);
double luxemburg_norm(std::span<const double> values, std::span<const double> measures, const YoungFn& phi);
double luxemburg_norm(const StepFn& f, const IntervalRef& I, const YoungFn& phi);
double luxemburg_norm(const StepFn& f, const IntervalRef& I, const ComplementaryFn& phi);

// log of the norm from log-values (-inf for zeros) and log-measures; survives e^{-10^4}-scale data
double log_luxemburg_norm(std::span<const double> log_values, std::span<const double> log_measures,
                          const YoungFn& phi);

// Sliding maximum over every window of each power-of-two length (or dyadic blocks) of a per-window value.
StepFn orlicz_maximal(const StepFn& f, const YoungFn& phi, ScanMode mode);
StepFn hardy_littlewood(const StepFn& f, ScanMode mode);
StepFn iterated_maximal(const StepFn& f, int k, ScanMode mode);

enum class BpVerdict { finite, divergent, borderline };
const char* to_string(BpVerdict v);

struct BpResult {
    double value;
    double tail;
    double decay_exponent; // integrand ~ (log t)^{-gamma} near the truncation
    BpVerdict verdict;
};

// int_1^T Phi(t)/t^p dt/t with T = e^{log_T}
BpResult bp_integral(const YoungFn& phi, double p, double log_T = 1e5);

} // namespace bumpkit
