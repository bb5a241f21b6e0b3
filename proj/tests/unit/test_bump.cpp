#include <doctest.h>

#include "bumpkit/bump.hpp"
#include "bumpkit/random.hpp"

#include <cmath>

using namespace bumpkit;

namespace {

double corpc_delta(double p, int m, double eps) {
    double a = m * p / (m * p + p - 1.0);
    return std::min(eps * a / m, eps * (1.0 - a));
}

} // namespace

TEST_CASE("named bumps") {
    auto a = alpha_bump(2.0);
    CHECK(a(3.0) == doctest::Approx(9.0 * std::pow(std::log(M_E + 3.0), 1.5)));
    // p = 3, p' = 3/2, m = 2: beta exponent 3(3/2) - 1 + 1/2 = 4, gamma 2(2) = 4, psi max(3.5, 4) + 1/2
    double L = std::log(M_E + 2.0), t = std::pow(2.0, 1.5);
    CHECK(beta_bump(3.0, 2)(2.0) == doctest::Approx(t * std::pow(L, 4.0)));
    CHECK(gamma_bump(3.0, 2)(2.0) == doctest::Approx(t * std::pow(L, 4.0)));
    CHECK(psi_bump(3.0, 2)(2.0) == doctest::Approx(t * std::pow(L, 4.5)));
    // m = 0: beta_{p,0} = alpha_{p'}
    CHECK(beta_bump(1.5, 0)(7.0) == doctest::Approx(alpha_bump(3.0)(7.0)));
    CHECK_THROWS_AS(bump_preset("nope", 2.0, 1), std::invalid_argument);
    CHECK_THROWS_AS(theorem_terms("corpc", 2.0, 0), std::invalid_argument);
    CHECK(theorem_terms("sepbumex", 2.0, 1).size() == 4);
}

TEST_CASE("bump_constant examples") {
    Grid g(6, 0);
    auto one = StepFn::constant(g, 1.0);
    for (auto mode : {ScanMode::dyadic, ScanMode::all_aligned}) {
        auto r = bump_for_weights(one, one, bump_preset("ap", 2.0, 0), mode);
        CHECK(r.value == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(r.profile.size() == 7);
        CHECK(r.profile.front().len == 64);
    }
    SplitMix64 rng(8);
    for (int t = 0; t < 10; ++t) {
        auto w = random_lognormal(g, rng, 1.0);
        for (double p : {1.5, 2.0, 3.0})
            CHECK(bump_for_weights(w, w, bump_preset("ap", p, 0), ScanMode::dyadic).value >= 1.0 - 1e-12);
    }
    // ap with p = 2: u_Q (v^{-1})_Q computed directly
    auto u = random_lognormal(g, rng, 1.0), v = random_lognormal(g, rng, 1.0);
    double best = 0.0;
    auto vi = v.pow(-1.0);
    for (const auto& Q : enumerate_intervals(g, ScanMode::all_aligned, 1 << 20))
        best = std::max(best, std::sqrt(average(u, Q) * average(vi, Q)));
    CHECK(bump_for_weights(u, v, bump_preset("ap", 2.0, 0), ScanMode::all_aligned).value ==
          doctest::Approx(best).epsilon(1e-10));
    auto rep = bump_for_weights(u, v, bump_preset("ap", 2.0, 0), ScanMode::all_aligned);
    CHECK(std::sqrt(average(u, rep.argmax) * average(vi, rep.argmax)) == doctest::Approx(rep.value).epsilon(1e-10));
    auto j = to_json(rep);
    CHECK(j["argmax"]["len"].get<Index>() == rep.argmax.len);
}

TEST_CASE("bump monotonicity, chain and restriction") {
    Grid g(6, 0);
    SplitMix64 rng(19);
    for (int t = 0; t < 6; ++t) {
        auto u = random_lognormal(g, rng, 1.2), v = random_lognormal(g, rng, 1.2);
        double p = t % 2 ? 1.5 : 3.0;
        int m = 1 + t % 2;
        BumpSpec lo = bump_preset("stco_pair", p, m, 0.25), hi = bump_preset("stco_pair", p, m, 1.0);
        CHECK(bump_for_weights(u, v, lo, ScanMode::dyadic).value <=
              bump_for_weights(u, v, hi, ScanMode::dyadic).value * (1 + 1e-10));
        double ap = bump_for_weights(u, v, bump_preset("ap", p, m), ScanMode::dyadic).value;
        double bc = bump_for_weights(u, v, bump_preset("bump_conjecture", p, m), ScanMode::dyadic).value;
        double ps = bump_for_weights(u, v, bump_preset("corpc", p, m), ScanMode::dyadic).value;
        CHECK(ap <= bc * (1 + 1e-10));
        CHECK(bc <= ps * (1 + 1e-10));
        for (const char* name : {"ap", "stco_pair", "recond", "k2"}) {
            auto s = bump_preset(name, p, m);
            CHECK(bump_for_weights(u, v, s, ScanMode::dyadic).value <=
                  bump_for_weights(u, v, s, ScanMode::all_aligned).value * (1 + 1e-10));
        }
    }
}

TEST_CASE("extbctbm terms coincide at m = 0") {
    Grid g(5, 0);
    SplitMix64 rng(4);
    auto u = random_lognormal(g, rng, 1.0), v = random_lognormal(g, rng, 1.0);
    for (double p : {1.5, 2.0, 3.0}) {
        auto terms = theorem_terms("extbctbm", p, 0);
        double a = bump_for_weights(u, v, terms[0], ScanMode::dyadic).value;
        double b = bump_for_weights(u, v, terms[1], ScanMode::dyadic).value;
        CHECK(std::abs(a - b) <= 1e-9 * a);
    }
}

TEST_CASE("corollary reduction of the gamma term") {
    Grid g(6, 0);
    SplitMix64 rng(77);
    double worst = 0.0;
    for (int t = 0; t < 12; ++t) {
        double p = std::array{1.5, 2.0, 3.0}[t % 3];
        int m = 1 + t % 2;
        double eps = 0.5, d = corpc_delta(p, m, eps);
        auto u = random_lognormal(g, rng, 1.5), v = random_lognormal(g, rng, 1.5);
        BumpSpec lhs;
        lhs.A = alpha_bump(p, d);
        lhs.B = gamma_bump(p, m, d);
        lhs.p = p;
        double l = bump_for_weights(u, v, lhs, ScanMode::dyadic).value;
        double r = 0.0;
        for (const auto& s : theorem_terms("corpc", p, m, d, eps)) r += bump_for_weights(u, v, s, ScanMode::dyadic).value;
        worst = std::max(worst, l / r);
    }
    MESSAGE("gamma-term reduction constant " << worst);
    CHECK(worst < 4.0);
}

TEST_CASE("necessary constant") {
    Grid g(6, 0);
    auto one = StepFn::constant(g, 1.0);
    for (double p : {1.5, 2.0, 3.0}) {
        auto r0 = necessary_constant(one, one, p, 0, ScanMode::dyadic);
        CHECK(r0.pair.value == doctest::Approx(1.0).epsilon(1e-12));
        double q = p / (p - 1);
        for (int m = 1; m <= 3; ++m) {
            auto r = necessary_constant(one, one, p, m, ScanMode::dyadic);
            CHECK(r.pair.value == doctest::Approx(1.0 / young_inverse(YoungFn::power_log(q, m * q), 1.0)).epsilon(1e-9));
            CHECK(r.in_band);
        }
    }
    SplitMix64 rng(12);
    for (int t = 0; t < 5; ++t) {
        auto u = random_lognormal(g, rng, 1.0), v = random_lognormal(g, rng, 1.0);
        auto r = necessary_constant(u, v, 2.0, 0, ScanMode::dyadic);
        CHECK(r.pair.value ==
              doctest::Approx(bump_for_weights(u, v, bump_preset("ap", 2.0, 0), ScanMode::dyadic).value).epsilon(1e-12));
        for (int m = 1; m <= 2; ++m) CHECK(necessary_constant(u, v, 2.0, m, ScanMode::dyadic).in_band);
    }
}

TEST_CASE("testing functionals") {
    Grid g(7, 0);
    SplitMix64 rng(23);
    auto S = random_family(g, 5, 0.6, rng);
    auto one = StepFn::constant(g, 1.0);
    for (double p : {1.5, 2.0, 3.0}) {
        auto A = YoungFn::power_over_log(p, p < 2 ? 0.25 : 0.5);
        double la = testing_functional(S, one, one, p, A, TestingVariant::lacey);
        double li = testing_functional(S, one, one, p, A, TestingVariant::li);
        std::vector<double> lam(S.size(), 1.0);
        double es = testing_functional(S, one, one, p, A, TestingVariant::estli, lam);
        CHECK(std::isfinite(la));
        CHECK(std::isfinite(li));
        CHECK(es == doctest::Approx(li * std::log(M_E + 1.0)));
        CHECK(li <= 4.0 * la);
        lam[0] = 0.5;
        CHECK_THROWS_AS(testing_functional(S, one, one, p, A, TestingVariant::estli, lam), std::invalid_argument);
    }
    for (int t = 0; t < 8; ++t) {
        auto u = random_lognormal(g, rng, 1.5), sigma = random_lognormal(g, rng, 1.5);
        double p = t % 2 ? 2.0 : 3.0;
        auto A = YoungFn::power_over_log(p, 0.5);
        double la = testing_functional(S, u, sigma, p, A, TestingVariant::lacey);
        double li = testing_functional(S, u, sigma, p, A, TestingVariant::li);
        CHECK(li <= 4.0 * la * (1 + 1e-9));
        auto lam = estli_lambdas(S, sigma, 1, 1.5);
        for (double l : lam) CHECK(l >= 1.0);
        CHECK(testing_functional(S, u, sigma, p, A, TestingVariant::estli, lam) >= li);
    }
}
