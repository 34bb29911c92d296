#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "pshape/infcase.hpp"

using namespace pshape;

namespace {
Grid square(int n) { return build_grid_2d({-1, 1}, {-1, 1}, n, n); }
DomainMask closed_unit_disc(const Grid& g) {
    return mask_from(g, [](const Point& x) { return x[0] * x[0] + x[1] * x[1] <= 1.0 + 1e-12; });
}
}  // namespace

TEST(Distance, DiscCentre) {
    const Grid g = square(129);
    const auto omega = disc_mask(g, {0.2, -0.1}, 0.4);
    const auto u = distance_function(omega, full_mask(g));
    EXPECT_NEAR(u[g.index(76, 58)], 0.4, g.spacing());
    EXPECT_NEAR(-sup_cost(u, omega), 0.4, g.spacing());
}

TEST(Distance, LeftHalfOfBox) {
    const Grid g = build_grid_2d({0, 1}, {0, 1}, 65, 65);
    const auto left = mask_from(g, [](const Point& x) { return x[0] < 0.5; });
    const auto u = distance_function(left, full_mask(g));
    for (int j = 0; j < 65; ++j) EXPECT_NEAR(u[g.index(16, j)], 0.25, g.spacing());
}

TEST(Distance, WholeDomainHasNoState) {
    const Grid g = square(17);
    try {
        distance_function(full_mask(g), full_mask(g));
        FAIL() << "expected an exception";
    } catch (const std::invalid_argument& e) {
        EXPECT_NE(std::string(e.what()).find("u_D may not be well-defined"), std::string::npos);
    }
}

TEST(Distance, FullModeIncludesBoundary) {
    const Grid g = build_grid_2d({0, 1}, {0, 1}, 65, 65);
    const auto u = distance_function(full_mask(g), full_mask(g), DistanceMode::full);
    EXPECT_NEAR(u.max(), 0.5, 1e-12);
}

TEST(Distance, OneLipschitzOnNeighbours) {
    const Grid g = square(65);
    const auto omega = unite(disc_mask(g, {-0.3, 0.2}, 0.5), disc_mask(g, {0.4, -0.3}, 0.35));
    const auto u = distance_function(omega, closed_unit_disc(g));
    const double h = g.spacing();
    for (int j = 0; j < 65; ++j)
        for (int i = 0; i + 1 < 65; ++i) {
            EXPECT_LE(std::abs(u[g.index(i + 1, j)] - u[g.index(i, j)]), h + 2 * h);
            EXPECT_LE(std::abs(u[g.index(j, i + 1)] - u[g.index(j, i)]), h + 2 * h);
        }
}

TEST(Distance, ExactAgainstBruteForceWithoutPrefilter) {
    const Grid g = square(33);
    const auto omega = difference(disc_mask(g, {0.0, 0.0}, 0.8), disc_mask(g, {0.3, 0.1}, 0.2));
    const auto D = full_mask(g);
    const auto u = distance_function(omega, D);
    for (std::size_t k = 0; k < g.size(); ++k) {
        if (!omega[k]) {
            EXPECT_EQ(u[k], 0.0);
            continue;
        }
        double best = 1e300;
        for (std::size_t q = 0; q < g.size(); ++q)
            if (!omega[q]) best = std::min(best, std::hypot(g.coord(k)[0] - g.coord(q)[0], g.coord(k)[1] - g.coord(q)[1]));
        EXPECT_DOUBLE_EQ(u[k], best);
    }
}

TEST(Lens, AreaExamples) {
    EXPECT_DOUBLE_EQ(lens_area(2.0), std::numbers::pi);
    EXPECT_DOUBLE_EQ(lens_area(3.5), std::numbers::pi);
    EXPECT_NEAR(lens_area(0.1), std::numbers::pi * 0.01 / 2, 0.03 * std::numbers::pi * 0.01 / 2);
    EXPECT_THROW(lens_area(0.0), std::invalid_argument);
    EXPECT_THROW(lens_area(-1.0), std::invalid_argument);
}

TEST(Lens, AreaIsStrictlyIncreasingBelowTwo) {
    double prev = 0.0;
    for (int i = 1; i < 200; ++i) {
        const double a = lens_area(i / 100.0);
        EXPECT_GT(a, prev);
        prev = a;
    }
}

TEST(Lens, RadiusExamples) {
    EXPECT_NEAR(optimal_lens_radius(2.0), 1.351, 1e-3);
    EXPECT_NEAR(optimal_lens_radius(std::numbers::pi), 2.0, 1e-9);
    EXPECT_NEAR(optimal_lens_radius(0.01), std::sqrt(2 * 0.01 / std::numbers::pi), 0.02 * 0.0798);
    EXPECT_THROW(optimal_lens_radius(0.0), std::invalid_argument);
    EXPECT_THROW(optimal_lens_radius(4.0), std::invalid_argument);
}

TEST(Lens, RadiusInvertsArea) {
    for (int i = 1; i < 40; ++i) {
        const double r = i / 20.0;
        EXPECT_NEAR(optimal_lens_radius(lens_area(r)), r, 1e-8);
    }
}

TEST(Lens, CircleIntersectionCrossCheck) {
    // Polar quadrature around (1,0).
    for (double r : {0.3, 1.0, 1.351, 1.8}) {
        const int n = 200000;
        double area = 0.0;
        for (int i = 0; i < n; ++i) {
            const double t = std::numbers::pi * (i + 0.5) / n;
            // (1,0) + s(cos tp, sin tp) stays in the unit disc while s <= -2 cos tp.
            const double tp = std::numbers::pi / 2 + t;
            const double s_max = std::min(r, std::max(0.0, -2.0 * std::cos(tp)));
            area += 0.5 * s_max * s_max * (std::numbers::pi / n);
        }
        EXPECT_NEAR(lens_area(r), area, 1e-6);
    }
}

TEST(SupCost, Examples) {
    const Grid g = square(65);
    EXPECT_EQ(sup_cost(GridFunction(g, 0.0), full_mask(g)), 0.0);
    EXPECT_THROW(sup_cost(GridFunction(g, 0.0), empty_mask(g)), std::invalid_argument);
}

TEST(SupCost, LensValueIsItsRadius) {
    const Grid g = square(257);
    const auto D = closed_unit_disc(g);
    const double r = 1.351;
    const auto lens = intersect(D, mask_from(g, [&](const Point& x) { return std::hypot(x[0] - 1, x[1]) < r; }));
    EXPECT_NEAR(sup_cost(distance_function(lens, D), lens), -r, 2 * g.spacing());
}

TEST(LensOptimality, AreaTwo) {
    const auto rep = verify_lens_optimality(2.0, 129);
    EXPECT_EQ(rep.winner, "lens");
    EXPECT_NEAR(-rep.lens_value, rep.r_m, 2 * rep.h);
    EXPECT_NEAR(rep.candidates[1].value, -std::sqrt(2 / std::numbers::pi), 2 * rep.h);
    for (const auto& [name, margin] : rep.margins) EXPECT_GE(margin, 0.0) << name;
}

TEST(LensOptimality, AreaHalf) {
    const auto rep = verify_lens_optimality(0.5, 129);
    EXPECT_EQ(rep.winner, "lens");
    EXPECT_GT(rep.margins.front().second, 0.0);
}

TEST(LensOptimality, CentredDiscMarginMatchesClosedForm) {
    for (double m : {0.3, 1.5, 3.0}) {
        const auto rep = verify_lens_optimality(m, 129);
        EXPECT_EQ(rep.margins.front().first, "centered_disc");
        EXPECT_NEAR(rep.margins.front().second, rep.r_m - std::sqrt(m / std::numbers::pi), 3 * rep.h) << m;
    }
}

TEST(LensOptimality, RejectsOutOfRange) {
    EXPECT_THROW(verify_lens_optimality(0.0, 33), std::invalid_argument);
    EXPECT_THROW(verify_lens_optimality(std::numbers::pi, 33), std::invalid_argument);
}
