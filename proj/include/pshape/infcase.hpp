#pragma once

// The p = infinity model: states are distance functions, the cost is
// -sup u, and on the unit disc the best set of area m is the lens
// B(0,1) ∩ B((1,0), r_m).

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "geometry.hpp"
#include "grid.hpp"
#include "parallel.hpp"

namespace pshape {

enum class DistanceMode {
    mixed,  ///< distance to D \ Omega
    full,   ///< distance to (D \ Omega) together with the boundary of D
};

/// Exact Euclidean distance from each node of Omega to the nearest
/// complement node; zero off Omega.
inline GridFunction distance_function(const DomainMask& omega, const DomainMask& d_mask,
                                      DistanceMode mode = DistanceMode::mixed) {
    require_same_grid(omega.grid, d_mask.grid, "distance_function");
    const DomainMask inside = intersect(omega, d_mask);
    DomainMask target = difference(d_mask, inside);
    if (mode == DistanceMode::full) target = unite(target, boundary_nodes(d_mask));
    if (target.is_empty())
        throw std::invalid_argument("u_D may not be well-defined: the complement D \\ Omega is empty");
    const auto dist = detail::distance_to_nodes(target);
    GridFunction u(omega.grid, 0.0);
    for (std::size_t k = 0; k < u.size(); ++k)
        if (inside[k] && !target[k]) u[k] = dist[k];
    return u;
}

/// Area of B(0, R) ∩ B(c, r) with |c| = d.
inline double circle_intersection_area(double R, double r, double d) {
    if (d >= R + r) return 0.0;
    if (d <= std::abs(R - r)) {
        const double s = std::min(R, r);
        return std::numbers::pi * s * s;
    }
    const double a = std::clamp((d * d + r * r - R * R) / (2.0 * d * r), -1.0, 1.0);
    const double b = std::clamp((d * d + R * R - r * r) / (2.0 * d * R), -1.0, 1.0);
    const double k = (-d + r + R) * (d + r - R) * (d - r + R) * (d + r + R);
    return r * r * std::acos(a) + R * R * std::acos(b) - 0.5 * std::sqrt(std::max(k, 0.0));
}

/// |B(0,1) ∩ B((1,0), r)|.
inline double lens_area(double r) {
    if (!(r > 0.0)) throw std::invalid_argument("lens_area: r must be > 0");
    if (r >= 2.0) return std::numbers::pi;
    return circle_intersection_area(1.0, r, 1.0);
}

namespace detail {
/// Smallest r in (0, hi] with area(r) >= m, for increasing area.
template <class Area>
double bisect_radius(Area&& area, double m, double hi) {
    double lo = 0.0;
    while (hi - lo > 1e-13) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        (area(mid) < m ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}
}  // namespace detail

/// The r with lens_area(r) = m.
inline double optimal_lens_radius(double m) {
    if (!(m > 0.0) || m > std::numbers::pi)
        throw std::invalid_argument("optimal_lens_radius: m must lie in (0, pi]");
    return detail::bisect_radius([](double r) { return lens_area(r); }, m, 2.0);
}

/// -max of u over the mask.
inline double sup_cost(const GridFunction& u, const DomainMask& mask) {
    require_same_grid(u.grid, mask.grid, "sup_cost");
    double top = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < u.size(); ++k)
        if (mask[k]) top = std::max(top, u[k]);
    if (mask.is_empty()) throw std::invalid_argument("sup_cost: empty mask");
    return -top;
}

struct LensCandidate {
    std::string name;
    double offset = 0.0;  ///< centre (offset, 0) of the cutting disc
    double radius = 0.0;
    double value = 0.0;   ///< sup_cost of the distance state on the grid
    double grid_area = 0.0;
    DomainMask mask;
};

struct LensReport {
    double m = 0.0;
    double r_m = 0.0;
    double h = 0.0;
    std::vector<LensCandidate> candidates;  ///< candidates[0] is the lens
    std::string winner;
    double lens_value = 0.0;
    /// value(candidate) - value(lens) for every other candidate.
    std::vector<std::pair<std::string, double>> margins;
};

/// Sup cost of the lens against discs B((t,0), rho(t)) ∩ B(0,1) of the same
/// area, t = 0 (the centred disc) and t = k/8, k = 1..7, on an n x n grid of
/// [-1,1]^2.
inline LensReport verify_lens_optimality(double m, int n) {
    if (!(m > 0.0) || !(m < std::numbers::pi))
        throw std::invalid_argument("verify_lens_optimality: m must lie in (0, pi)");
    const Grid grid = build_grid_2d({-1.0, 1.0}, {-1.0, 1.0}, n, n);
    const DomainMask disc = mask_from(grid, [](const Point& x) { return x[0] * x[0] + x[1] * x[1] <= 1.0 + 1e-12; });

    LensReport rep;
    rep.m = m;
    rep.r_m = optimal_lens_radius(m);
    rep.h = grid.spacing();
    rep.candidates.push_back({"lens", 1.0, rep.r_m, 0.0, 0.0, DomainMask(grid, false)});
    rep.candidates.push_back({"centered_disc", 0.0, std::sqrt(m / std::numbers::pi), 0.0, 0.0, DomainMask(grid, false)});
    for (int k = 1; k < 8; ++k) {
        const double t = k / 8.0;
        const double rho = detail::bisect_radius([&](double r) { return circle_intersection_area(1.0, r, t); }, m, 1.0 + t);
        rep.candidates.push_back({"offset_disc_" + std::to_string(k) + "_8", t, rho, 0.0, 0.0, DomainMask(grid, false)});
    }
    parallel_for(rep.candidates.size(), [&](std::size_t i) {
        auto& c = rep.candidates[i];
        const double t = c.offset, r = c.radius;
        c.mask = intersect(disc, mask_from(grid, [&](const Point& x) {
                               const double dx = x[0] - t;
                               return dx * dx + x[1] * x[1] < r * r;
                           }));
        c.grid_area = measure(c.mask);
        c.value = sup_cost(distance_function(c.mask, disc), c.mask);
    });
    std::size_t best = 0;
    for (std::size_t i = 1; i < rep.candidates.size(); ++i)
        if (rep.candidates[i].value < rep.candidates[best].value) best = i;
    rep.winner = rep.candidates[best].name;
    rep.lens_value = rep.candidates[0].value;
    for (std::size_t i = 1; i < rep.candidates.size(); ++i)
        rep.margins.emplace_back(rep.candidates[i].name, rep.candidates[i].value - rep.lens_value);
    return rep;
}

}  // namespace pshape
