#include <doctest.h>

#include "bumpkit/czops.hpp"
#include "bumpkit/random.hpp"

#include <cmath>

using namespace bumpkit;

TEST_CASE("discrete Hilbert kernel") {
    Grid g(6, 0);
    KernelOp K{g};
    SplitMix64 rng(3);
    for (int t = 0; t < 50; ++t) {
        Index x = static_cast<Index>(rng.below(64)), y = static_cast<Index>(rng.below(64));
        CHECK(K(x, y) == -K(y, x));
        if (x != y) CHECK(std::abs(K(x, y)) * std::abs(g.center(x) - g.center(y)) <= 1.0 + 1e-12);
    }
    CHECK(K(5, 5) == 0.0);
    CHECK(cz_apply(K, StepFn::zeros(g)).values().abs().maxCoeff() == 0.0);
}

TEST_CASE("cz_apply symmetry and continuum oracle") {
    Grid g(10, 0);
    KernelOp K{g};
    Index n = g.cells();
    auto even = StepFn::sample(g, [](double x) { return 1.0 + std::cos(6.0 * (x - 0.5)); });
    auto Te = cz_apply(K, even);
    for (Index i = 0; i < n; ++i) CHECK(Te[i] == doctest::Approx(-Te[n - 1 - i]).epsilon(1e-9));

    auto chi = StepFn::indicator(g, {0, n / 2});
    auto Tc = cz_apply(K, chi);
    double worst = 0.0;
    for (Index i = 0; i < n; ++i) {
        if (std::abs(i - n / 2) < 4 || i < 4) continue;
        double x = g.center(i);
        worst = std::max(worst, std::abs(Tc[i] - std::log(std::abs(x / (x - 0.5)))));
    }
    CHECK(worst < 4.0 * g.cell_width());
}

TEST_CASE("commutator examples") {
    Grid g(7, 0);
    KernelOp K{g};
    SplitMix64 rng(11);
    auto f = random_uniform(g, rng, -1.0, 1.0).as_signed();
    auto c = StepFn::constant(g, 2.5);
    for (int m = 1; m <= 3; ++m) CHECK(commutator_apply(K, c, f, m).values().abs().maxCoeff() < 1e-9);
    auto T0 = commutator_apply(K, c, f, 0);
    CHECK((T0.values() - cz_apply(K, f).values()).abs().maxCoeff() == 0.0);

    // b = x: (x - y) K(x, y) = 1 off the diagonal, so T_b^1 f(x) = int f - h f(x)
    auto bx = StepFn::sample(g, [](double x) { return x; });
    auto T1 = commutator_apply(K, bx, f, 1);
    double total = integrate(f);
    for (Index i = 0; i < g.cells(); ++i) CHECK(T1[i] == doctest::Approx(total - g.cell_width() * f[i]).epsilon(1e-9));
}

TEST_CASE("commutator recursion matches kernel form") {
    SplitMix64 rng(29);
    for (int t = 0; t < 12; ++t) {
        Grid g(5 + t % 4, 0);
        KernelOp K{g};
        auto b = random_piecewise_linear(g, rng, 6, -2.0, 2.0).as_signed();
        auto f = random_uniform(g, rng, -1.0, 1.0).as_signed();
        for (int m = 1; m <= 3; ++m) CHECK(commutator_discrepancy(K, b, f, m) < 1e-10);
    }
}

TEST_CASE("bmo_norm examples") {
    Grid g(6, 0);
    CHECK(bmo_norm(StepFn::constant(g, 3.0)).norm == 0.0);
    SplitMix64 rng(5);
    for (int t = 0; t < 20; ++t) {
        Index a = static_cast<Index>(rng.below(60)), len = 1 + static_cast<Index>(rng.below(64 - a));
        auto chi = StepFn::indicator(g, {a, len});
        for (auto mode : {ScanMode::dyadic, ScanMode::all_aligned}) {
            double best = 0.0;
            for (const auto& Q : enumerate_intervals(g, mode, 1 << 20)) {
                double r = average(chi, Q);
                best = std::max(best, 2.0 * r * (1.0 - r));
            }
            auto rep = bmo_norm(chi, nullptr, mode);
            CHECK(rep.norm == doctest::Approx(best).epsilon(1e-12));
            CHECK(rep.norm <= 0.5 + 1e-15);
        }
    }
    CHECK(bmo_norm(StepFn::indicator(g, {0, 32}), nullptr, ScanMode::dyadic).norm == doctest::Approx(0.5));

    for (int t = 0; t < 10; ++t) {
        auto eta = random_lognormal(g, rng, 1.0);
        Index a = static_cast<Index>(rng.below(48));
        auto chiB = StepFn::indicator(g, {a, 16});
        auto b = StepFn(g, eta.values() * chiB.values());
        CHECK(bmo_norm(b, &eta, ScanMode::all_aligned).norm <= 2.0);
    }
}

TEST_CASE("jones extension") {
    Grid g(8, 0);
    IntervalRef R{64, 128};
    auto zero = jones_extend(StepFn::zeros(g).as_signed(), R);
    CHECK(zero.phi.values().abs().maxCoeff() == 0.0);

    Eigen::ArrayXd v = Eigen::ArrayXd::Zero(g.cells());
    v.segment(64, 64).setConstant(1.0);
    v.segment(128, 64).setConstant(-1.0);
    auto halves = jones_extend(StepFn(g, v, true), R);
    for (Index i = 0; i < g.cells(); ++i) {
        if (R.contains(i)) CHECK(halves.phi[i] == v[i]);
        if (i < 0 || i >= 256) CHECK(halves.phi[i] == 0.0);
    }
    CHECK(std::isfinite(halves.ratio));
    CHECK(halves.ratio <= 3.0);

    Eigen::ArrayXd w = Eigen::ArrayXd::Ones(g.cells());
    CHECK_THROWS_AS(jones_extend(StepFn(g, w, true), R), std::invalid_argument);
    CHECK_THROWS_AS(jones_extend(StepFn(g, v, true), {0, 128}), std::invalid_argument);

    // capped log profile, mean subtracted
    Grid g2(10, 0);
    IntervalRef R2{384, 256};
    Eigen::ArrayXd lp = Eigen::ArrayXd::Zero(g2.cells());
    for (Index i = 0; i < R2.len; ++i) lp[R2.start + i] = std::min(8.0, std::log(256.0 / (i + 0.5)));
    lp.segment(R2.start, R2.len) -= lp.segment(R2.start, R2.len).mean();
    auto lg = jones_extend(StepFn(g2, lp, true), R2);
    CHECK(lg.ratio <= 3.0);
    CHECK(lg.phi.values().head(256).abs().maxCoeff() == 0.0);
    CHECK(lg.phi.values().tail(128).abs().maxCoeff() == 0.0);
}

TEST_CASE("neccond test function") {
    Grid g(7, 0);
    IntervalRef Q{32, 64};
    auto one = neccond_testfn(StepFn::constant(g, 1.0), Q, 2.0);
    CHECK(one.g.values().abs().maxCoeff() == 0.0);
    CHECK(one.g_Q == 0.0);

    // sigma = v^{-1} at p = 2: a spike of height H on one cell of Q
    Eigen::ArrayXd v = Eigen::ArrayXd::Ones(g.cells());
    double H = 1000.0;
    v[60] = 1.0 / H;
    auto sp = neccond_testfn(StepFn(g, v), Q, 2.0);
    double sQ = (63.0 + H) / 64.0;
    CHECK(sp.g[60] == doctest::Approx(std::log(H / sQ)).epsilon(1e-12));
    CHECK(sp.g[61] == doctest::Approx(std::log((H + 1.0) / 2.0 / sQ)).epsilon(1e-12));

    SplitMix64 rng(41);
    double worst = 0.0;
    for (int t = 0; t < 10; ++t) {
        auto r = neccond_testfn(random_lognormal(g, rng, 1.5), Q, 1.5);
        worst = std::max(worst, bmo_norm(r.g).norm);
        CHECK(r.g_Q < 3.0);
    }
    CHECK(worst < 4.0);
}

TEST_CASE("disjoint partner") {
    Grid g(8, 0);
    IntervalRef B{16, 16};
    auto p8 = disjoint_partner(g, B, 8.0);
    CHECK(p8.interval.start == B.end() + 128);
    CHECK_FALSE(p8.interval.intersects(B));
    double AB = 8.0 * B.measure(g);
    CHECK(std::abs(p8.kernel_at_centers) >= 1.0 / (2.0 * AB));
    CHECK(std::abs(p8.kernel_at_centers) <= 2.0 / AB);

    IntervalRef B2{200, 8};
    auto r = disjoint_partner(g, B2, 8.0);
    CHECK(r.reflected);
    CHECK(r.interval.end() == B2.start - 64);
    CHECK_FALSE(r.interval.intersects(B2));

    Grid g2(12, 0);
    IntervalRef B3{0, 16};
    CHECK(disjoint_partner(g2, B3, 32.0).epsilon < disjoint_partner(g2, B3, 8.0).epsilon);
    CHECK_THROWS_AS(disjoint_partner(g, {100, 64}, 8.0), std::out_of_range);
    CHECK_THROWS_AS(disjoint_partner(g, B, 2.0), std::invalid_argument);
}
