#include "bumpkit/random.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

namespace bumpkit {

double SplitMix64::normal() {
    double u1 = uniform(), u2 = uniform();
    if (u1 < 1e-300) u1 = 1e-300;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

StepFn random_lognormal(const Grid& g, SplitMix64& rng, double sigma) {
    Index n = g.cells();
    Eigen::ArrayXd field = Eigen::ArrayXd::Zero(n);
    int depth = g.depth();
    double scale = sigma / std::sqrt(static_cast<double>(depth + 1));
    for (int d = 0; d <= depth; ++d) {
        Index len = n >> d;
        for (Index s = 0; s < n; s += len) field.segment(s, len) += scale * rng.normal();
    }
    return StepFn(g, field.exp());
}

StepFn random_piecewise_linear(const Grid& g, SplitMix64& rng, int knots, double lo, double hi) {
    std::vector<double> xs{0.0, g.length()}, ys;
    for (int k = 0; k < knots; ++k) xs.push_back(rng.uniform(0.0, g.length()));
    std::sort(xs.begin(), xs.end());
    for (std::size_t k = 0; k < xs.size(); ++k) ys.push_back(rng.uniform(lo, hi));
    return StepFn::sample(
        g,
        [&](double x) {
            auto it = std::upper_bound(xs.begin(), xs.end(), x);
            std::size_t j = std::clamp<std::size_t>(static_cast<std::size_t>(it - xs.begin()), 1, xs.size() - 1);
            double w = (x - xs[j - 1]) / std::max(xs[j] - xs[j - 1], 1e-300);
            return ys[j - 1] + w * (ys[j] - ys[j - 1]);
        },
        lo < 0);
}

StepFn random_uniform(const Grid& g, SplitMix64& rng, double lo, double hi) {
    Eigen::ArrayXd v(g.cells());
    for (Index i = 0; i < g.cells(); ++i) v[i] = rng.uniform(lo, hi);
    return StepFn(g, std::move(v), lo < 0);
}

} // namespace bumpkit
