#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "pshape/optimizer.hpp"

using namespace pshape;

namespace {
constexpr double kInfinity = std::numeric_limits<double>::infinity();
}

TEST(FreeBoundary, OneDimensionalEmptyAboveThreshold) {
    const Grid g = build_grid_1d(0.0, 1.0, 257);
    const auto r = free_boundary_minimize(GridFunction(g, 1.0), 2.0, 0.05, full_mask(g));
    EXPECT_TRUE(r.omega.is_empty());
    EXPECT_EQ(r.objective, 0.0);
    EXPECT_TRUE(r.report.converged);
}

TEST(FreeBoundary, OneDimensionalFullBelowThreshold) {
    const Grid g = build_grid_1d(0.0, 1.0, 257);
    const auto r = free_boundary_minimize(GridFunction(g, 1.0), 2.0, 0.02, full_mask(g));
    for (std::size_t k = 0; k < g.size(); ++k) EXPECT_EQ(r.omega[k] != 0, !g.on_boundary(k));
    EXPECT_NEAR(r.objective, 0.02 - 1.0 / 24.0, 1e-3);
}

TEST(FreeBoundary, NoPenaltyGivesTorsion) {
    const Grid g = build_grid_2d({0, 1}, {0, 1}, 33, 33);
    const GridFunction f(g, 1.0);
    const auto r = free_boundary_minimize(f, 2.0, 0.0, full_mask(g));
    const auto torsion = solve_on_set(full_mask(g), f, 2.0).u;
    for (std::size_t k = 0; k < g.size(); ++k) EXPECT_NEAR(r.u[k], torsion[k], 1e-10);
}

TEST(FreeBoundary, ObjectiveNeverIncreasesAndStaysNonPositive) {
    const Grid g = build_grid_2d({-1, 1}, {-1, 1}, 65, 65);
    const auto f = sample(g, [](const Point& x) { return x[0] > 0 ? 2.0 : 0.5; });
    for (double p : {1.5, 2.0, 3.0}) {
        const auto r = free_boundary_minimize(f, p, 0.02, full_mask(g));
        const auto& h = r.objective_history;
        for (std::size_t i = 1; i < h.size(); ++i) EXPECT_LE(h[i], h[i - 1]);
        EXPECT_LE(r.objective, 0.0);
        EXPECT_GE(r.u.min(), 0.0);
    }
}

TEST(FreeBoundary, RejectsNegativeData) {
    const Grid g = build_grid_1d(0.0, 1.0, 9);
    EXPECT_THROW(free_boundary_minimize(GridFunction(g, -1.0), 2.0, 0.1, full_mask(g)), std::invalid_argument);
    EXPECT_THROW(free_boundary_minimize(GridFunction(g, 1.0), 2.0, -0.1, full_mask(g)), std::invalid_argument);
}

TEST(FreeBoundary, TruncationSchedule) {
    const auto s = truncation_schedule(2.0, 12);
    ASSERT_EQ(s.size(), 16u);
    EXPECT_EQ(s[0], 2.0);
    EXPECT_DOUBLE_EQ(s[4], 0.2);
    EXPECT_DOUBLE_EQ(s.back(), 0.2 * std::ldexp(1.0, -11));
}

TEST(Control, ZeroWeightWithPenaltyGivesEmptySet) {
    const Grid g = build_grid_2d({0, 1}, {0, 1}, 33, 33);
    const auto D = full_mask(g);
    const auto r = control_optimize(GridFunction(g, 1.0), CostSpec{GridFunction(g, 0.0), 0.5, 2.0, kInfinity,
                                                                    kInfinity, nodal_measure(D)},
                                    D);
    EXPECT_TRUE(r.omega.is_empty());
    EXPECT_EQ(r.objective, 0.0);
}

TEST(Control, SaturatesTheBudget) {
    const Grid g = build_grid_2d({0, 1}, {0, 1}, 65, 65);
    const auto D = full_mask(g);
    const GridFunction one(g, 1.0);
    const auto gw = sample(g, [](const Point& x) { return 1.0 + 2.0 * x[0]; });
    for (double frac : {0.2, 0.5}) {
        const double m = frac * measure(D);
        const auto r = control_optimize(one, CostSpec{gw, 0.0, 2.0, kInfinity, kInfinity, m}, D);
        EXPECT_EQ(r.status, "ok");
        EXPECT_NEAR(measure(r.omega), m, mask_perimeter(r.omega) * 2 * g.spacing());
        EXPECT_LE(nodal_measure(r.omega), m * (1 + 1e-12));
        EXPECT_EQ(connected_components(complement(r.omega), full_mask(g)) >= 1, true);
    }
}

TEST(Control, BetaMarksCappedNodes) {
    const Grid g = build_grid_2d({0, 1}, {0, 1}, 33, 33);
    const auto D = full_mask(g);
    const GridFunction one(g, 1.0);
    ControlOptions opts;
    opts.b_cap = 1e5;
    const auto r = control_optimize(one, CostSpec{one, 0.0, 2.0, kInfinity, kInfinity, 0.3}, D, opts);
    for (std::size_t k = 0; k < g.size(); ++k) {
        if (g.on_boundary(k)) continue;
        EXPECT_TRUE(r.beta.beta[k] == 0.0 || r.beta.beta[k] == 1e5);
        if (r.omega[k]) EXPECT_EQ(r.beta.beta[k], 0.0);
    }
}

TEST(Control, InfeasibleBudgetRejected) {
    const Grid g = build_grid_2d({0, 1}, {0, 1}, 17, 17);
    const auto D = full_mask(g);
    const GridFunction one(g, 1.0);
    EXPECT_THROW(control_optimize(one, CostSpec{one, 0.0, 2.0, kInfinity, kInfinity, 0.0}, D), std::invalid_argument);
    EXPECT_THROW(control_optimize(one, CostSpec{one, 0.0, 2.0, kInfinity, kInfinity, 2.0}, D), std::invalid_argument);
}

TEST(Control, SensitivityMatchesFiniteDifferences) {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> ub(1e3, 1e4);
    const Grid g = build_grid_2d({0, 1}, {0, 1}, 17, 17);
    const auto D = full_mask(g);
    SolveOptions opts;
    opts.tolerance = 1e-13;
    opts.eps_reg = 1e-6;
    for (double p : {1.5, 2.0, 3.0}) {
        MeasureField beta(g, 0.0);
        for (auto& b : beta.beta) b = ub(rng);
        const GridFunction f(g, 1.0);
        const auto gg = sample(g, [](const Point& x) { return 1.0 + x[0]; });
        const auto s = control_sensitivity(f, gg, beta, p, D, opts);
        for (int i : {3, 7}) {
            const std::size_t k = g.index(i, i + 2);
            auto plus = beta, minus = beta;
            plus.beta[k] += 100.0;
            minus.beta[k] -= 100.0;
            const double fd = (control_sensitivity(f, gg, plus, p, D, opts).objective -
                               control_sensitivity(f, gg, minus, p, D, opts).objective) /
                              200.0;
            EXPECT_NEAR(s.dj_dbeta[k] / fd, 1.0, 1e-3) << "p=" << p;
        }
    }
}

TEST(Control, LargerSetsNeverCostMore) {
    // Nested pairs, f, g >= 0, lambda = 0: J(omega') <= J(omega).
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> c(0.3, 0.7), r(0.05, 0.25);
    const Grid g = build_grid_2d({0, 1}, {0, 1}, 33, 33);
    const auto f = sample(g, [](const Point& x) { return 1.0 + x[1]; });
    const auto gw = sample(g, [](const Point& x) { return x[0] * x[0]; });
    for (int i = 0; i < 10; ++i) {
        const auto small = disc_mask(g, {c(rng), c(rng)}, r(rng));
        const auto big = unite(small, disc_mask(g, {c(rng), c(rng)}, r(rng)));
        const double p = 1.5 + 0.25 * i;
        const double js = detail::model_cost(solve_on_set(small, f, p).u, gw, 0.0, small);
        const double jb = detail::model_cost(solve_on_set(big, f, p).u, gw, 0.0, big);
        EXPECT_LE(jb, js + 1e-12);
    }
}

TEST(Hypotheses, PGreaterThanDimension) {
    const Grid g = build_grid_2d({0, 1}, {0, 1}, 9, 9);
    const auto gw = sample(g, [](const Point& x) { return x[0] - 0.5; });
    const auto r = check_hypotheses(GridFunction(g, 1.0), CostSpec{gw, 0.0, 3.0, kInfinity, kInfinity, 0.5}, 2);
    EXPECT_TRUE(r.existence_open_p_gt_d);
    EXPECT_FALSE(r.existence_quasiopen);
    EXPECT_EQ(r.reasons.size(), 4u);
}

TEST(Hypotheses, QuasiOpenForNonNegativeWeight) {
    const Grid g = build_grid_2d({0, 1}, {0, 1}, 9, 9);
    const auto r = check_hypotheses(GridFunction(g, 1.0), CostSpec{GridFunction(g, 0.5), 0.0, 2.0, kInfinity, 2.0, 0.5}, 2);
    EXPECT_TRUE(r.existence_quasiopen);
    EXPECT_FALSE(r.existence_open_p_gt_d);
    EXPECT_NE(r.reasons[1].find("r = ell/(ell-1) = 2"), std::string::npos);
}

TEST(Hypotheses, OpennessNeedsFiniteConstant) {
    const Grid g = build_grid_2d({0, 1}, {0, 1}, 9, 9);
    const auto gw = sample(g, [](const Point& x) { return x[0] < 0.3 ? 0.0 : 1.0; });
    const auto f = sample(g, [&](const Point& x) { return 2.0 * (x[0] < 0.3 ? 1.0 : 1.0); });
    const auto r = check_hypotheses(f, CostSpec{gw, 0.1, 2.0, 4.0, kInfinity, 0.5}, 2);
    EXPECT_FALSE(r.openness);
    EXPECT_NE(r.reasons[2].find("no finite c with f <= Cg"), std::string::npos);

    const auto ok = check_hypotheses(GridFunction(g, 1.0), CostSpec{GridFunction(g, 0.25), 0.1, 2.0, 4.0, kInfinity, 0.5}, 2);
    EXPECT_TRUE(ok.openness);
    EXPECT_DOUBLE_EQ(ok.c_best, 0.25);
    const auto low_q = check_hypotheses(GridFunction(g, 1.0), CostSpec{GridFunction(g, 0.25), 0.1, 2.0, 1.0, kInfinity, 0.5}, 2);
    EXPECT_FALSE(low_q.openness);
}

TEST(Hypotheses, FinitePerimeterNeedsPenalty) {
    const Grid g = build_grid_2d({0, 1}, {0, 1}, 9, 9);
    const GridFunction one(g, 1.0);
    EXPECT_TRUE(check_hypotheses(one, CostSpec{one, 0.1, 2.0, kInfinity, kInfinity, 0.5}, 2).finite_perimeter);
    EXPECT_FALSE(check_hypotheses(one, CostSpec{one, 0.0, 2.0, kInfinity, kInfinity, 0.5}, 2).finite_perimeter);
}
