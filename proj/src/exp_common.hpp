#pragma once

#include "bumpkit/experiments.hpp"
#include "bumpkit/random.hpp"

#include <chrono>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

namespace bumpkit::detail {

// Resolution-free random function: exp(sum_j a_j cos(2 pi k_j x / len + phi_j)) (|x - x0| + 1e-6)^gamma
struct Profile {
    std::vector<double> amp, phase;
    std::vector<int> freq;
    double length = 1.0, x0 = 0.5, gamma = 0.0;

    double operator()(double x) const {
        double s = 0.0;
        for (std::size_t j = 0; j < amp.size(); ++j)
            s += amp[j] * std::cos(2.0 * std::numbers::pi * freq[j] * x / length + phase[j]);
        return std::exp(s) * std::pow(std::abs(x - x0) + 1e-6, gamma);
    }
};

inline Profile random_profile(SplitMix64& rng, double length, double roughness, double gamma_lo, double gamma_hi,
                              int terms = 4) {
    Profile P;
    P.length = length;
    for (int j = 0; j < terms; ++j) {
        P.amp.push_back(rng.uniform(-roughness, roughness));
        P.freq.push_back(1 + static_cast<int>(rng.below(8)));
        P.phase.push_back(rng.uniform(0.0, 2.0 * std::numbers::pi));
    }
    P.x0 = rng.uniform(0.1, 0.9) * length;
    P.gamma = rng.uniform(gamma_lo, gamma_hi);
    return P;
}

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// every value within factor^{+-1} of the median
inline bool within_of_median(const std::vector<double>& v, double lo, double hi) {
    double m = median(v);
    for (double x : v)
        if (!(x >= lo * m && x <= hi * m)) return false;
    return true;
}

inline double spread(const std::vector<double>& v) {
    double lo = v.front(), hi = v.front();
    for (double x : v) {
        lo = std::min(lo, x);
        hi = std::max(hi, x);
    }
    return lo > 0 ? hi / lo : std::numeric_limits<double>::infinity();
}

inline Verdict pass_if(bool ok) { return ok ? Verdict::pass : Verdict::fail; }

inline std::string fmt(const char* f, double a) {
    char buf[160];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

inline std::string fmt(const char* f, double a, double b) {
    char buf[160];
    std::snprintf(buf, sizeof buf, f, a, b);
    return buf;
}

inline std::string fmt(const char* f, double a, double b, double c) {
    char buf[200];
    std::snprintf(buf, sizeof buf, f, a, b, c);
    return buf;
}

ExperimentReport run_orlicz(Params& P);
ExperimentReport run_eqlog(Params& P);
ExperimentReport run_dual2(Params& P);
ExperimentReport run_commutator(Params& P);
ExperimentReport run_calc(Params& P);
ExperimentReport run_example(Params& P);
ExperimentReport run_sufficiency(Params& P);
ExperimentReport run_lsu(Params& P);
ExperimentReport run_neccond(Params& P);

} // namespace bumpkit::detail
