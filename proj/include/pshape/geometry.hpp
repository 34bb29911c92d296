#pragma once

// Set measure, level-set perimeter (marching squares), thin-band statistics
// of {0 < u < eps}, and component counting of D-bar minus Omega.

#include <algorithm>
#include <array>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "grid.hpp"

namespace pshape {

/// Included-cell count times cell volume.
inline double measure(const DomainMask& mask) {
    return static_cast<double>(mask.cell_count()) * mask.grid.cell_volume();
}

namespace detail {

inline double lerp_root(double a, double b, double level) {
    const double t = (level - a) / (b - a);
    return std::clamp(t, 0.0, 1.0);
}

/// Length of the marching-squares contour {u = level} in one cell.
/// Corners counter-clockwise: v[0]=(0,0), v[1]=(1,0), v[2]=(1,1), v[3]=(0,1).
inline double cell_contour_length(const std::array<double, 4>& v, double level, double hx, double hy) {
    std::array<bool, 4> in{};
    int count = 0;
    for (int i = 0; i < 4; ++i) {
        in[i] = v[i] > level;
        count += in[i] ? 1 : 0;
    }
    if (count == 0 || count == 4) return 0.0;
    const Point corner[4] = {{0.0, 0.0}, {hx, 0.0}, {hx, hy}, {0.0, hy}};
    // Crossing point on edge e (between corners e and e+1).
    auto cross = [&](int e) {
        const int a = e, b = (e + 1) % 4;
        const double t = lerp_root(v[a], v[b], level);
        return Point{corner[a][0] + t * (corner[b][0] - corner[a][0]), corner[a][1] + t * (corner[b][1] - corner[a][1])};
    };
    auto seg = [&](int e1, int e2) {
        const Point p = cross(e1), q = cross(e2);
        return std::hypot(p[0] - q[0], p[1] - q[1]);
    };
    std::vector<int> edges;
    for (int e = 0; e < 4; ++e)
        if (in[e] != in[(e + 1) % 4]) edges.push_back(e);
    if (edges.size() == 2) return seg(edges[0], edges[1]);
    // Saddle: the cell average decides which diagonal pair is connected.
    const bool centre_in = 0.25 * (v[0] + v[1] + v[2] + v[3]) > level;
    if (centre_in == in[0]) return seg(0, 1) + seg(2, 3);  // corners 1 and 3 cut off
    return seg(3, 0) + seg(1, 2);                           // corners 0 and 2 cut off
}

/// Area of {x in T : l(x) < level} for the linear interpolant of vertex values.
inline double area_below(std::array<double, 3> v, double level, double area) {
    std::sort(v.begin(), v.end());
    if (level <= v[0]) return 0.0;
    if (level > v[2]) return area;
    // Here v0 < level <= v2, so every denominator below is positive.
    if (level <= v[1]) return area * (level - v[0]) * (level - v[0]) / ((v[1] - v[0]) * (v[2] - v[0]));
    return area * (1.0 - (v[2] - level) * (v[2] - level) / ((v[2] - v[0]) * (v[2] - v[1])));
}

struct BandStats {
    double measure = 0.0;        // |{0 < u < eps}|
    double grad_p_integral = 0.0;  // int over the band of |grad u|^p
    double grad_integral = 0.0;    // int over the band of |grad u|
};

/// Band statistics of the piecewise-linear interpolant, averaged over the two
/// diagonal triangulations of each cell (the same quadrature as the energy).
inline BandStats band_stats(const GridFunction& u, double eps, double p) {
    const Grid& g = u.grid;
    BandStats s;
    auto accumulate_piece = [&](double band, double gnorm) {
        s.measure += band;
        s.grad_p_integral += band * std::pow(gnorm, p);
        s.grad_integral += band * gnorm;
    };
    if (g.dim() == 1) {
        const double h = g.h(0);
        for (std::size_t c = 0; c < g.cell_count(); ++c) {
            const double a = u[c], b = u[c + 1];
            double band = 0.0;
            if (a == b) {
                band = (a > 0.0 && a < eps) ? h : 0.0;
            } else {
                const double lo = std::min(a, b), hi = std::max(a, b);
                const double from = std::max(lo, 0.0), to = std::min(hi, eps);
                band = to > from ? h * (to - from) / (hi - lo) : 0.0;
            }
            accumulate_piece(band, std::abs(b - a) / h);
        }
        return s;
    }
    const double hx = g.h(0), hy = g.h(1);
    const double tri = 0.5 * hx * hy;
    for (std::size_t c = 0; c < g.cell_count(); ++c) {
        const auto k = g.cell_nodes(c);
        const double u00 = u[k[0]], u10 = u[k[1]], u01 = u[k[2]], u11 = u[k[3]];
        // Corner triangles: each is the P1 triangle at one corner; the four
        // of them cover the cell twice.
        const std::array<std::array<double, 3>, 4> tris{{{u00, u10, u01}, {u10, u00, u11}, {u01, u11, u00}, {u11, u01, u10}}};
        const std::array<Point, 4> grads{{{(u10 - u00) / hx, (u01 - u00) / hy},
                                          {(u10 - u00) / hx, (u11 - u10) / hy},
                                          {(u11 - u01) / hx, (u01 - u00) / hy},
                                          {(u11 - u01) / hx, (u11 - u10) / hy}}};
        for (int t = 0; t < 4; ++t) {
            const auto& v = tris[t];
            double band = area_below(v, eps, tri) - area_below(v, std::nextafter(0.0, 1.0), tri);
            band = std::max(band, 0.0) * 0.5;
            accumulate_piece(band, std::hypot(grads[t][0], grads[t][1]));
        }
    }
    return s;
}

}  // namespace detail

/// Length of the level line {u = delta} (2D), or the number of crossings (1D).
inline double perimeter_estimate(const GridFunction& u, double delta) {
    if (!(delta > 0.0)) throw std::invalid_argument("perimeter_estimate: delta must be positive");
    const Grid& g = u.grid;
    if (g.dim() == 1) {
        double crossings = 0.0;
        for (std::size_t i = 0; i + 1 < u.size(); ++i)
            if ((u[i] > delta) != (u[i + 1] > delta)) crossings += 1.0;
        return crossings;
    }
    double length = 0.0;
    for (std::size_t c = 0; c < g.cell_count(); ++c) {
        const auto k = g.cell_nodes(c);
        length += detail::cell_contour_length({u[k[0]], u[k[1]], u[k[3]], u[k[2]]}, delta, g.h(0), g.h(1));
    }
    return length;
}

namespace detail {

/// Exact Euclidean distance from every node to the nearest node of `target`.
/// Only target nodes with a 4-neighbour outside the target can be nearest.
inline std::vector<double> distance_to_nodes(const DomainMask& target) {
    const Grid& g = target.grid;
    std::vector<Point> candidates;
    const long nx = g.nx(), ny = g.dim() == 2 ? g.ny() : 1;
    for (std::size_t k = 0; k < g.size(); ++k) {
        if (!target[k]) continue;
        const long i = g.ix(k), j = g.iy(k);
        bool exposed = false;
        auto probe = [&](long a, long b) {
            if (a < 0 || b < 0 || a >= nx || b >= ny) return;
            if (!target[g.index(static_cast<int>(a), static_cast<int>(b))]) exposed = true;
        };
        probe(i - 1, j);
        probe(i + 1, j);
        if (g.dim() == 2) {
            probe(i, j - 1);
            probe(i, j + 1);
        }
        if (exposed) candidates.push_back(g.coord(k));
    }
    std::vector<double> dist(g.size(), std::numeric_limits<double>::infinity());
    for (std::size_t k = 0; k < g.size(); ++k) {
        if (target[k]) {
            dist[k] = 0.0;
            continue;
        }
        const Point x = g.coord(k);
        double best = std::numeric_limits<double>::infinity();
        for (const auto& y : candidates) {
            const double dx = x[0] - y[0], dy = x[1] - y[1];
            best = std::min(best, dx * dx + dy * dy);
        }
        dist[k] = std::sqrt(best);
    }
    return dist;
}

}  // namespace detail

/// Signed node distance (positive inside): a smooth stand-in for an indicator
/// whose zero level line traces the mask boundary.
inline GridFunction signed_distance(const DomainMask& mask) {
    const auto to_outside = detail::distance_to_nodes(complement(mask));
    const auto to_inside = detail::distance_to_nodes(mask);
    GridFunction s(mask.grid);
    for (std::size_t k = 0; k < s.size(); ++k) {
        const double a = std::isfinite(to_outside[k]) ? to_outside[k] : 0.0;
        const double b = std::isfinite(to_inside[k]) ? to_inside[k] : 0.0;
        s[k] = mask[k] ? a : -b;
    }
    return s;
}

/// Perimeter of a node set via the zero line of its signed distance field.
inline double mask_perimeter(const DomainMask& mask) {
    if (mask.is_empty()) return 0.0;
    // Inside nodes sit at >= h, outside at <= -h: the line lies midway.
    return perimeter_estimate(signed_distance(mask), 1e-12 * mask.grid.spacing());
}

struct DiagnosticRow {
    double epsilon = 0.0;
    double measure_omega_eps = 0.0;
    double grad_p_integral = 0.0;
    double perimeter = 0.0;
};

struct DiagnosticTable {
    std::vector<DiagnosticRow> rows;
    double slope_measure = 0.0;      ///< log-log slope of |Omega_eps| against eps
    double slope_grad_p = 0.0;       ///< log-log slope of int |grad u|^p against eps
    double perimeter_ratio = 0.0;    ///< max/min perimeter over the 4 smallest eps
    bool finite_perimeter = false;   ///< perimeter_ratio <= 4
};

namespace detail {
inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < x.size(); ++i)
        if (x[i] > 0.0 && y[i] > 0.0) {
            lx.push_back(std::log(x[i]));
            ly.push_back(std::log(y[i]));
        }
    if (lx.size() < 2) return 0.0;
    const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / lx.size();
    const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / ly.size();
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        sxy += (lx[i] - mx) * (ly[i] - my);
        sxx += (lx[i] - mx) * (lx[i] - mx);
    }
    return sxx > 0.0 ? sxy / sxx : 0.0;
}
}  // namespace detail

/// Table of (eps, |{0<u<eps}|, int_{0<u<eps} |grad u|^p, Per{u > eps}).
inline DiagnosticTable finite_perimeter_diagnostic(const GridFunction& u, double p, std::vector<double> epsilons) {
    if (epsilons.empty()) throw std::invalid_argument("finite_perimeter_diagnostic: no epsilons");
    for (double e : epsilons)
        if (!(e > 0.0)) throw std::invalid_argument("finite_perimeter_diagnostic: epsilons must be positive");
    std::sort(epsilons.begin(), epsilons.end(), std::greater<>());
    DiagnosticTable t;
    std::vector<double> eps, meas, grad;
    for (double e : epsilons) {
        const auto band = detail::band_stats(u, e, p);
        t.rows.push_back({e, band.measure, band.grad_p_integral, perimeter_estimate(u, e)});
        eps.push_back(e);
        meas.push_back(band.measure);
        grad.push_back(band.grad_p_integral);
    }
    t.slope_measure = detail::loglog_slope(eps, meas);
    t.slope_grad_p = detail::loglog_slope(eps, grad);
    const std::size_t tail = std::min<std::size_t>(4, t.rows.size());
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (std::size_t i = t.rows.size() - tail; i < t.rows.size(); ++i) {
        lo = std::min(lo, t.rows[i].perimeter);
        hi = std::max(hi, t.rows[i].perimeter);
    }
    if (hi == 0.0) {
        t.perimeter_ratio = 1.0;
    } else {
        t.perimeter_ratio = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
    }
    t.finite_perimeter = t.perimeter_ratio <= 4.0;
    return t;
}

/// 4-connected components of (D-bar \ Omega), where D-bar adds the boundary
/// nodes of D.
inline int connected_components(const DomainMask& omega, const DomainMask& domain) {
    require_same_grid(omega.grid, domain.grid, "connected_components");
    const Grid& g = omega.grid;
    const DomainMask rim = boundary_nodes(domain);
    std::vector<std::uint8_t> in_k(g.size(), 0);
    for (std::size_t k = 0; k < g.size(); ++k) in_k[k] = ((domain[k] && !omega[k]) || rim[k]) ? 1 : 0;
    std::vector<std::uint8_t> seen(g.size(), 0);
    const long nx = g.nx(), ny = g.dim() == 2 ? g.ny() : 1;
    int components = 0;
    std::deque<std::size_t> queue;
    for (std::size_t s = 0; s < g.size(); ++s) {
        if (!in_k[s] || seen[s]) continue;
        ++components;
        seen[s] = 1;
        queue.push_back(s);
        while (!queue.empty()) {
            const std::size_t k = queue.front();
            queue.pop_front();
            const long i = g.ix(k), j = g.iy(k);
            const long nb[4][2] = {{i - 1, j}, {i + 1, j}, {i, j - 1}, {i, j + 1}};
            for (const auto& q : nb) {
                if (q[0] < 0 || q[1] < 0 || q[0] >= nx || q[1] >= ny) continue;
                const auto m = g.index(static_cast<int>(q[0]), static_cast<int>(q[1]));
                if (in_k[m] && !seen[m]) {
                    seen[m] = 1;
                    queue.push_back(m);
                }
            }
        }
    }
    return components;
}

inline int connected_components(const DomainMask& omega) { return connected_components(omega, full_mask(omega.grid)); }

}  // namespace pshape
