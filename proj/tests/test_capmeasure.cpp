#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "pshape/capmeasure.hpp"

using namespace pshape;

TEST(InfinityOn, EmptySetIsZeroMeasure) {
    const Grid g = build_grid_2d({0, 1}, {0, 1}, 9, 9);
    const auto mu = infinity_on(empty_mask(g));
    for (double b : mu.beta) EXPECT_EQ(b, 0.0);
}

TEST(InfinityOn, WholeClosureKillsTheState) {
    const Grid g = build_grid_2d({0, 1}, {0, 1}, 17, 17);
    const auto sol = solve_for_measure(infinity_on(full_mask(g)), GridFunction(g, 1.0), 2.0, full_mask(g));
    EXPECT_EQ(sol.u.sup_norm(), 0.0);
}

TEST(GammaDistance, ZeroOnDiagonal) {
    const Grid g = build_grid_2d({0, 1}, {0, 1}, 17, 17);
    MeasureField mu(g, 3.0);
    mu.beta[100] = kInf;
    EXPECT_LE(gamma_distance(mu, mu, 2.0), 1e-8);
}

TEST(GammaDistance, OneDimensionalTorsion) {
    const Grid g = build_grid_1d(0.0, 1.0, 257);
    const double d = gamma_distance(infinity_on(full_mask(g)), MeasureField(g, 0.0), 2.0);
    EXPECT_NEAR(d, 1.0 / std::sqrt(120.0), 1e-3);
}

TEST(GammaDistance, ShrinkingSetsApproachInfinity) {
    const Grid g = build_grid_2d({0, 1}, {0, 1}, 33, 33);
    const auto all = infinity_on(full_mask(g));
    double prev = std::numeric_limits<double>::infinity();
    for (double r : {0.45, 0.35, 0.25, 0.15, 0.05}) {
        const auto omega = disc_mask(g, {0.5, 0.5}, r);
        const double d = gamma_distance(infinity_on(complement(omega)), all, 2.0);
        EXPECT_LE(d, prev + 1e-12);
        prev = d;
    }
    EXPECT_LT(prev, 1e-3);
}

TEST(GammaDistance, SymmetricAndTriangle) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 50.0);
    const Grid g = build_grid_2d({0, 1}, {0, 1}, 17, 17);
    auto random_mu = [&] {
        MeasureField mu(g, 0.0);
        for (auto& b : mu.beta) b = u(rng);
        return mu;
    };
    for (int i = 0; i < 5; ++i) {
        const auto a = random_mu(), b = random_mu(), c = random_mu();
        const double p = 1.5 + 0.5 * i;
        EXPECT_EQ(gamma_distance(a, b, p), gamma_distance(b, a, p));
        EXPECT_LE(gamma_distance(a, c, p), gamma_distance(a, b, p) + gamma_distance(b, c, p) + 1e-8);
    }
}

TEST(GammaDistance, OptionalLoad) {
    const Grid g = build_grid_1d(0.0, 1.0, 129);
    const auto D = full_mask(g);
    const double d1 = gamma_distance(infinity_on(D), MeasureField(g, 0.0), 2.0, D, {}, GridFunction(g, 1.0));
    const double d2 = gamma_distance(infinity_on(D), MeasureField(g, 0.0), 2.0, D, {}, GridFunction(g, 2.0));
    EXPECT_NEAR(d2, 2.0 * d1, 1e-9);
}

TEST(Monotonicity, LargerDensitySmallerState) {
    const Grid g = build_grid_2d({0, 1}, {0, 1}, 33, 33);
    const auto r = check_monotonicity(MeasureField(g, 1.0), MeasureField(g, 0.0), GridFunction(g, 1.0), 2.0,
                                      full_mask(g));
    EXPECT_LE(r.max_violation, 1e-6);
}

TEST(Monotonicity, EqualMeasuresNoViolation) {
    const Grid g = build_grid_2d({0, 1}, {0, 1}, 17, 17);
    const MeasureField mu(g, 2.0);
    EXPECT_EQ(check_monotonicity(mu, mu, GridFunction(g, 1.0), 3.0, full_mask(g)).max_violation, 0.0);
}

TEST(Monotonicity, ZeroLoadBelowUnitLoad) {
    const Grid g = build_grid_2d({0, 1}, {0, 1}, 17, 17);
    const auto r = check_monotonicity(MeasureField(g, 0.0), GridFunction(g, 0.0), GridFunction(g, 1.0), 1.5,
                                      full_mask(g));
    EXPECT_EQ(r.u1.sup_norm(), 0.0);
    EXPECT_EQ(r.max_violation, 0.0);
}

TEST(Monotonicity, PreconditionsChecked) {
    const Grid g = build_grid_2d({0, 1}, {0, 1}, 9, 9);
    const auto D = full_mask(g);
    EXPECT_THROW(check_monotonicity(MeasureField(g, 0.0), MeasureField(g, 1.0), GridFunction(g, 1.0), 2.0, D),
                 std::invalid_argument);
    EXPECT_THROW(check_monotonicity(MeasureField(g, 1.0), MeasureField(g, 0.0), GridFunction(g, -1.0), 2.0, D),
                 std::invalid_argument);
    EXPECT_THROW(check_monotonicity(MeasureField(g, 0.0), GridFunction(g, 2.0), GridFunction(g, 1.0), 2.0, D),
                 std::invalid_argument);
}

TEST(MeasureFieldTest, NegativeDensityRejected) {
    const Grid g = build_grid_1d(0.0, 1.0, 5);
    EXPECT_THROW(MeasureField(g, -1.0), std::invalid_argument);
    EXPECT_THROW(MeasureField(g, std::vector<double>{0, 1, -kInf, 0, 0}), std::invalid_argument);
}

TEST(FiniteRegion, Examples) {
    const Grid g = build_grid_2d({0, 1}, {0, 1}, 65, 65);
    EXPECT_NEAR(finite_region(MeasureField(g, 0.0)).measure, 1.0, 1e-12);
    EXPECT_EQ(finite_region(infinity_on(full_mask(g))).measure, 0.0);
    const auto left = mask_from(g, [](const Point& x) { return x[0] < 0.5; });
    EXPECT_NEAR(finite_region(infinity_on(left)).measure, 0.5, 2 * g.spacing());
}

TEST(FiniteRegion, SemicontinuityOnNestedFamilies) {
    // K_n grows to K: |{mu_n = inf}| non-decreasing, |{mu_n < inf}| >= |{mu < inf}|.
    const Grid g = build_grid_2d({0, 1}, {0, 1}, 65, 65);
    const auto limit = finite_region(infinity_on(disc_mask(g, {0.5, 0.5}, 0.4)));
    double prev_inf = -1.0;
    for (double r : {0.1, 0.2, 0.3, 0.35, 0.4}) {
        const auto mu = infinity_on(disc_mask(g, {0.5, 0.5}, r));
        const double inf_measure = measure(mu.inf_set());
        EXPECT_GE(inf_measure, prev_inf);
        prev_inf = inf_measure;
        EXPECT_GE(finite_region(mu).measure, limit.measure - 1e-12);
    }
}
