#include <doctest.h>

#include "bumpkit/orlicz.hpp"
#include "bumpkit/sparse.hpp"

#include <set>

using namespace bumpkit;

namespace {

double rel(double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300}); }

// independent set-based containment count for A_S
StepFn naive_AS(const SparseFamily& S, const StepFn& f) {
    Eigen::ArrayXd v = Eigen::ArrayXd::Zero(S.grid.cells());
    for (auto& Q : S.cubes) v.segment(Q.start, Q.len) += f.values().segment(Q.start, Q.len).mean();
    return StepFn(S.grid, v);
}

// literal nested sums, feasible for small families
double naive_Tm_coef(const SparseFamily& S, const StepFn& f, int k, int m) {
    if (m == 0) return integrate(f, S.cubes[k]);
    double s = 0;
    for (std::size_t j = 0; j < S.size(); ++j)
        if (S.cubes[k].contains(S.cubes[j])) s += naive_Tm_coef(S, f, static_cast<int>(j), m - 1);
    return s;
}

} // namespace

TEST_CASE("verify_sparsity examples") {
    Grid g(4, 0);
    IntervalRef Q{0, 16};
    auto single = make_family(g, {Q}, {{Q}}, 1.0);
    CHECK(verify_sparsity(single));
    auto dup = make_family(g, {Q, Q}, {{Q}, {Q}}, 0.5);
    CHECK_FALSE(verify_sparsity(dup));
    auto outside = make_family(g, {{0, 8}}, {{{8, 4}}}, 0.25);
    CHECK_FALSE(verify_sparsity(outside));
    CHECK_THROWS_AS(make_family(g, {{1, 2}}), std::invalid_argument);
}

TEST_CASE("full tree with left-half witnesses") {
    Grid g(5, 0);
    for (int d = 1; d <= 4; ++d) {
        std::vector<IntervalRef> cubes;
        for (int k = 0; k <= d; ++k)
            for (Index o = 0; o < (Index{1} << k); ++o) cubes.push_back(dyadic_interval(g, k, o));
        // E_Q = left half of Q minus the witnesses of cubes strictly inside Q
        std::vector<std::set<Index>> sets(cubes.size());
        std::vector<std::vector<IntervalRef>> wit(cubes.size());
        double worst = 1.0;
        for (std::size_t i = cubes.size(); i-- > 0;) {
            const auto& Q = cubes[i];
            std::set<Index> E;
            for (Index c = Q.start; c < Q.start + std::max<Index>(1, Q.len / 2); ++c) E.insert(c);
            for (std::size_t j = i + 1; j < cubes.size(); ++j)
                if (Q.contains(cubes[j]) && !(cubes[j] == Q))
                    for (Index c : sets[j]) E.erase(c);
            sets[i] = E;
            for (Index c : E) wit[i].push_back({c, 1});
            worst = std::min(worst, static_cast<double>(E.size()) / Q.len);
        }
        if (worst > 0) {
            CHECK(verify_sparsity(make_family(g, cubes, wit, worst)));
        }
        CHECK_FALSE(verify_sparsity(make_family(g, cubes, wit, worst + 1e-9)));
    }
}

TEST_CASE("forest structure") {
    Grid g(4, 0);
    auto S = make_family(g, {{0, 4}, {0, 16}, {0, 1}, {8, 8}, {12, 2}});
    REQUIRE(S.cubes[0] == IntervalRef{0, 16});
    CHECK(S.parent[S.index_of({0, 4})] == S.index_of({0, 16}));
    CHECK(S.parent[S.index_of({0, 1})] == S.index_of({0, 4}));
    CHECK(S.parent[S.index_of({12, 2})] == S.index_of({8, 8}));
    CHECK(S.index_of({4, 4}) == -1);
    CHECK(assign_witnesses(S, 0.5));
    CHECK(verify_sparsity(S));
    CHECK(max_feasible_alpha(S) >= 0.5);
}

TEST_CASE("build_sparse_cz examples") {
    Grid g(6, 0);
    IntervalRef root{0, g.cells()};
    auto S1 = build_sparse_cz(StepFn::constant(g, 1.0), root);
    REQUIRE(S1.size() == 1);
    CHECK(S1.witness[0] == std::vector<IntervalRef>{root});
    auto S0 = build_sparse_cz(StepFn::zeros(g), root);
    CHECK(S0.size() == 1);

    // spike of height 2^L on one cell: averages quadruple every two levels, so the
    // stopping cubes form a chain through every other level down to the cell
    Index spike = 37;
    auto S = build_sparse_cz(StepFn::indicator(g, {spike, 1}, 64.0), root);
    CHECK(S.size() == 4);
    for (std::size_t k = 0; k < S.size(); ++k) {
        CHECK(S.cubes[k].contains(spike));
        CHECK(S.cubes[k].len == (g.cells() >> (2 * k)));
    }
    CHECK(S.cubes.back().len == 1);
    CHECK(verify_sparsity(S));

    SplitMix64 rng(3);
    for (int t = 0; t < 20; ++t) {
        StepFn f = random_lognormal(g, rng, 2.5);
        for (double factor : {2.0, 4.0}) {
            auto F = build_sparse_cz(f, root, factor);
            CHECK(F.alpha == doctest::Approx(1 - 1 / factor));
            CHECK(verify_sparsity(F));
        }
    }
}

TEST_CASE("augment_family") {
    Grid g(6, 0);
    IntervalRef Q{0, g.cells()};
    auto S = make_family(g, {Q}, {{Q}}, 1.0);
    auto same = augment_family(S, StepFn::constant(g, 3.0));
    CHECK(same.added == 0);
    CHECK(oscillation_constant(same.family, StepFn::constant(g, 3.0)) == 0.0);

    StepFn half = StepFn::indicator(g, {0, 32});
    auto A = augment_family(S, half);
    double c = oscillation_constant(A.family, half);
    CHECK(c <= 8.0);
    CHECK(c == doctest::Approx(1.0));

    SplitMix64 rng(17);
    for (int t = 0; t < 30; ++t) {
        SparseFamily base = random_family(g, 4, 0.5, rng);
        StepFn b = random_uniform(g, rng, -1.0, 1.0);
        auto aug = augment_family(base, b);
        CHECK(verify_sparsity(aug.family));
        CHECK(aug.family.alpha >= base.alpha / 2);
        for (auto& P : base.cubes) CHECK(aug.family.index_of(P) >= 0);
        CHECK(oscillation_constant(aug.family, b) <= 8.0 + 1e-9);
    }
}

TEST_CASE("random families are sparse") {
    SplitMix64 rng(1);
    for (int t = 0; t < 50; ++t) {
        auto S = random_family(Grid(7, 0), 1 + static_cast<int>(rng.below(7)), rng.uniform(0.2, 1.0), rng);
        CHECK(verify_sparsity(S));
        CHECK(S.alpha == 0.5);
    }
}

TEST_CASE("sparse operator examples") {
    Grid g(5, 0);
    IntervalRef Q{8, 8};
    auto S = make_family(g, {Q}, {{Q}}, 1.0);
    StepFn one = StepFn::constant(g, 1.0);
    CHECK((apply_AS(S, one).values() == StepFn::indicator(g, Q).values()).all());

    auto chain = make_family(g, {{0, 32}, {0, 16}, {0, 8}, {0, 4}});
    StepFn cnt = apply_AS(chain, one);
    CHECK(cnt[0] == 4.0);
    CHECK(cnt[5] == 3.0);
    CHECK(cnt[12] == 2.0);
    CHECK(cnt[20] == 1.0);

    CHECK((apply_AS_eta_iter(S, one, one, 1).values() == apply_AS(S, one).values()).all());
    CHECK((apply_AS_eta_iter(S, one, cnt, 0).values() == cnt.values()).all());
    StepFn two = StepFn::constant(g, 2.0);
    StepFn four = apply_AS_eta_iter(S, two, one, 2);
    CHECK(four[Q.start] == doctest::Approx(4.0));
    CHECK(four[0] == 0.0);

    SplitMix64 rng(2);
    StepFn f = random_lognormal(g, rng);
    CHECK((apply_ALlogLm(chain, f, 0).values() == apply_AS(chain, f).values()).all());
    StepFn c = StepFn::constant(g, 2.5);
    CHECK((apply_ALlogLm(chain, c, 2).values() - 2.5 * cnt.values() / YoungFn::lin_log(2).inverse(1.0))
              .abs()
              .maxCoeff() < 1e-9);
    // f = chi_half on a single cube, m = 1: 1 / Phi^{-1}(2)
    auto whole = make_family(g, {{0, 32}});
    double expect = 1.0 / YoungFn::lin_log(1).inverse(2.0);
    CHECK(apply_ALlogLm(whole, StepFn::indicator(g, {0, 16}), 1)[3] == doctest::Approx(expect).epsilon(1e-9));
}

TEST_CASE("T_m by hand and against literal nested sums") {
    Grid g(4, 0);
    IntervalRef Q{0, 16};
    StepFn one = StepFn::constant(g, 1.0);
    auto S1 = make_family(g, {Q});
    CHECK((apply_Tm(S1, one, 1).values() - apply_AS(S1, one).values()).abs().maxCoeff() < 1e-15);

    auto S3 = make_family(g, {Q, {0, 8}, {8, 8}});
    StepFn T = apply_Tm(S3, one, 1);
    // (|Q| + |Q|/2 + |Q|/2)/|Q| on Q plus 1 on each child
    for (Index i = 0; i < 16; ++i) CHECK(T[i] == doctest::Approx(3.0));

    SplitMix64 rng(12);
    for (int t = 0; t < 10; ++t) {
        auto S = random_family(Grid(5, 0), 4, 0.6, rng);
        StepFn f = random_lognormal(S.grid, rng);
        for (int m = 1; m <= 3; ++m) {
            StepFn Tm = apply_Tm(S, f, m);
            CoefSeq a(S.size());
            for (std::size_t k = 0; k < S.size(); ++k)
                a[k] = naive_Tm_coef(S, f, static_cast<int>(k), m) / S.cubes[k].measure(S.grid);
            CHECK((Tm.values() - sum_indicators(S, a).values()).abs().maxCoeff() <= 1e-12 * Tm.values().maxCoeff());
        }
    }
}

TEST_CASE("adjointness") {
    SplitMix64 rng(99);
    for (int t = 0; t < 30; ++t) {
        auto S = random_family(Grid(8, 0), 8, 0.5, rng);
        StepFn f = random_lognormal(S.grid, rng, 1.5), h = random_lognormal(S.grid, rng, 1.5);
        CHECK(rel(inner(apply_AS(S, f), h), inner(f, apply_AS(S, h))) < 1e-12);
        CHECK((apply_AS(S, f).values() - naive_AS(S, f).values()).abs().maxCoeff() < 1e-12 * f.values().maxCoeff() * 10);
        for (int m = 1; m <= 3; ++m)
            CHECK(rel(inner(apply_Tm(S, f, m), h), inner(f, apply_Tm(S, h, m, true))) < 1e-10);
    }
}

TEST_CASE("T_{S,tau} and localization") {
    SplitMix64 rng(5);
    auto S = random_family(Grid(6, 0), 5, 0.6, rng);
    StepFn f = random_lognormal(S.grid, rng);
    CoefSeq ones(S.size(), 1.0);
    CHECK((apply_TStau(S, ones, f).values() - apply_AS(S, f).values()).abs().maxCoeff() < 1e-12);
    int leaf = -1;
    for (std::size_t k = 0; k < S.size(); ++k)
        if (S.children[k].empty()) leaf = static_cast<int>(k);
    REQUIRE(leaf >= 0);
    IntervalRef R = S.cubes[leaf];
    StepFn loc = apply_TStau(S, ones, f, R);
    StepFn expect = StepFn::indicator(S.grid, R, average(f, R));
    CHECK((loc.values() - expect.values()).abs().maxCoeff() < 1e-12);
    CHECK_THROWS_AS(apply_TStau(S, ones, f, IntervalRef{1, 1}), std::invalid_argument);

    CoefSeq tau(S.size());
    for (auto& x : tau) x = rng.uniform(0, 3);
    for (std::size_t r = 0; r < S.size(); ++r) {
        IntervalRef Rr = S.cubes[r];
        CoefSeq outside = tau;
        for (std::size_t k = 0; k < S.size(); ++k)
            if (Rr.contains(S.cubes[k])) outside[k] = 0;
        StepFn diff = apply_TStau(S, tau, f).with_values(apply_TStau(S, tau, f).values() -
                                                         apply_TStau(S, outside, f).values());
        CHECK((diff.values() - apply_TStau(S, tau, f, Rr).values()).abs().maxCoeff() < 1e-11);
    }
}

TEST_CASE("positivity and monotonicity of A_S") {
    SplitMix64 rng(6);
    for (int t = 0; t < 20; ++t) {
        auto S = random_family(Grid(7, 0), 6, 0.5, rng);
        StepFn f = random_lognormal(S.grid, rng);
        StepFn h = f.with_values(f.values() + random_lognormal(S.grid, rng).values());
        CHECK((apply_AS(S, f).values() <= apply_AS(S, h).values() + 1e-12).all());
        CHECK((apply_AS(S, f).values() >= 0).all());
    }
}

TEST_CASE("T_m is dominated by the L(log L)^m sparse operator") {
    SplitMix64 rng(8);
    double worst = 0;
    for (int t = 0; t < 20; ++t) {
        auto S = random_family(Grid(7, 0), 7, 0.5, rng);
        StepFn f = random_lognormal(S.grid, rng, 2.0);
        for (int m = 1; m <= 2; ++m) {
            StepFn a = apply_Tm(S, f, m), b = apply_ALlogLm(S, f, m);
            for (Index i = 0; i < a.size(); ++i)
                if (b[i] > 0) worst = std::max(worst, a[i] / b[i]);
        }
    }
    CHECK(std::isfinite(worst));
    CHECK(worst < 50.0);
}

TEST_CASE("sparse sums of powers of averages") {
    SplitMix64 rng(10);
    for (double s : {0.25, 0.5, 0.75}) {
        double worst = 0;
        for (int t = 0; t < 20; ++t) {
            auto S = random_family(Grid(8, 0), 8, 0.5, rng);
            StepFn w = random_lognormal(S.grid, rng, 2.0);
            PrefixSums pw(w);
            for (std::size_t r = 0; r < S.size(); ++r) {
                const auto& R = S.cubes[r];
                double lhs = 0;
                for (auto& Q : S.cubes)
                    if (R.contains(Q)) lhs += std::pow(pw.average(Q), s) * Q.measure(S.grid);
                worst = std::max(worst, lhs / (std::pow(pw.average(R), s) * R.measure(S.grid)));
            }
        }
        CHECK(worst < 20.0);
    }
}

TEST_CASE("norm of sparse sums against the nested expression") {
    SplitMix64 rng(14);
    for (double p : {1.5, 2.0, 3.0}) {
        double lo = 1e300, hi = 0;
        for (int t = 0; t < 20; ++t) {
            auto S = random_family(Grid(7, 0), 7, 0.6, rng);
            StepFn w = random_lognormal(S.grid, rng, 1.5);
            PrefixSums pw(w);
            CoefSeq a(S.size());
            for (auto& x : a) x = std::exp(rng.uniform(-2, 2));
            double lhs = lp_norm(sum_indicators(S, a), p, &w);
            // inner sums over Q' in Q via subtree accumulation
            std::vector<double> inner_sum(S.size());
            for (std::size_t k = S.size(); k-- > 0;) {
                inner_sum[k] = a[k] * pw.integral(S.cubes[k]);
                for (int c : S.children[k]) inner_sum[k] += inner_sum[c];
            }
            double rhs = 0;
            for (std::size_t k = 0; k < S.size(); ++k) {
                double wQ = pw.integral(S.cubes[k]);
                rhs += a[k] * std::pow(inner_sum[k] / wQ, p - 1) * wQ;
            }
            rhs = std::pow(rhs, 1 / p);
            lo = std::min(lo, lhs / rhs);
            hi = std::max(hi, lhs / rhs);
        }
        CHECK(lo > 0.1);
        CHECK(hi < 10.0);
    }
}

TEST_CASE("family json round trip") {
    SplitMix64 rng(4);
    auto S = random_family(Grid(6, 0), 5, 0.5, rng);
    auto back = family_from_json(S.grid, nlohmann::json::parse(to_json(S).dump()));
    CHECK(back.cubes == S.cubes);
    CHECK(back.witness == S.witness);
    CHECK(verify_sparsity(back));
    CHECK(back.alpha >= 0.5);
}
