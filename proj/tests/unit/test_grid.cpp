#include <doctest.h>

#include "bumpkit/grid.hpp"

#include <cstdio>
#include <filesystem>
#include <random>

using namespace bumpkit;

TEST_CASE("integrate and average by hand") {
    Grid unit(4, 0);
    CHECK(integrate(StepFn::constant(unit, 1.0), {0, unit.cells()}) == doctest::Approx(1.0));
    CHECK(integrate(StepFn::indicator(unit, {0, 8}), {0, 16}) == doctest::Approx(0.5));

    Grid g(2, 0);
    Eigen::ArrayXd v(4);
    v << 1, 2, 3, 4;
    StepFn f(g, v);
    CHECK(integrate(f, {1, 2}) == doctest::Approx(1.25));
    CHECK(average(f, {0, 4}) == doctest::Approx(2.5));
    CHECK(average(StepFn::constant(g, 7.0), {1, 3}) == doctest::Approx(7.0));
    CHECK_THROWS_AS(integrate(f, {3, 2}), std::out_of_range);
    CHECK_THROWS_AS(StepFn(g, -v), std::invalid_argument);
}

TEST_CASE("enumeration counts") {
    CHECK(enumerate_intervals(Grid(2, 0), ScanMode::dyadic).size() == 7);
    CHECK(enumerate_intervals(Grid(3, 0), ScanMode::dyadic).size() == 15);
    auto all = enumerate_intervals(Grid(1, 0), ScanMode::all_aligned);
    REQUIRE(all.size() == 3);
    CHECK(all[0] == IntervalRef{0, 2});
    CHECK(all[1] == IntervalRef{0, 1});
    CHECK(all[2] == IntervalRef{1, 1});
    // 4 cells: lengths 4,2,1 at every offset
    CHECK(enumerate_intervals(Grid(2, 0), ScanMode::all_aligned).size() == 1 + 3 + 4);
    CHECK(enumerate_intervals(Grid(2, 0), ScanMode::all_aligned, 2).size() == 2);
    CHECK_THROWS(enumerate_intervals(Grid(2, 0), ScanMode::dyadic, 3));
    for (auto& I : enumerate_intervals(Grid(5, 1), ScanMode::dyadic)) CHECK(I.is_dyadic());
}

TEST_CASE("additivity, linearity, dyadic children") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> U(0, 5);
    Grid g(8, 1);
    Eigen::ArrayXd a(g.cells()), b(g.cells());
    for (Index i = 0; i < g.cells(); ++i) {
        a[i] = U(rng);
        b[i] = U(rng);
    }
    StepFn f(g, a), h(g, b);
    for (int trial = 0; trial < 50; ++trial) {
        Index s = static_cast<Index>(U(rng) * 60), l1 = 1 + static_cast<Index>(U(rng) * 20),
              l2 = 1 + static_cast<Index>(U(rng) * 20);
        double lhs = integrate(f, {s, l1 + l2});
        double rhs = integrate(f, {s, l1}) + integrate(f, {s + l1, l2});
        CHECK(std::abs(lhs - rhs) <= 1e-12 * std::abs(lhs));
        StepFn comb(g, 2.0 * a + 3.0 * b);
        CHECK(integrate(comb, {s, l1}) == doctest::Approx(2 * integrate(f, {s, l1}) + 3 * integrate(h, {s, l1})).epsilon(1e-12));
    }
    for (auto& Q : enumerate_intervals(g, ScanMode::dyadic)) {
        if (Q.len == 1) continue;
        IntervalRef L{Q.start, Q.len / 2}, R{Q.start + Q.len / 2, Q.len / 2};
        CHECK(average(f, Q) == doctest::Approx((average(f, L) + average(f, R)) / 2).epsilon(1e-12));
    }
    PrefixSums ps(f);
    CHECK(ps.integral({5, 77}) == doctest::Approx(integrate(f, {5, 77})).epsilon(1e-13));
}

TEST_CASE("csv round trip") {
    Grid g(3, 1);
    StepFn f = StepFn::sample(g, [](double x) { return std::sin(x) - 0.2; }, true);
    auto path = (std::filesystem::temp_directory_path() / "bumpkit_grid_rt.csv").string();
    write_stepfn_csv(f, path);
    StepFn back = read_stepfn_csv(path);
    CHECK(back.grid() == g);
    CHECK((back.values() == f.values()).all());
    CHECK(back.is_signed());
    std::remove(path.c_str());
    std::remove((path + ".json").c_str());
}
