#pragma once

// Uniform Cartesian grids in one or two dimensions, node masks, node and
// cell fields, and the discrete calculus shared by every other module.
//
// Node ordering is row-major: index = i + nx * j, x varies fastest.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace pshape {

struct Interval {
    double lo = 0.0;
    double hi = 1.0;
};

using Point = std::array<double, 2>;

/// Immutable uniform lattice over a box. Nodes sit at lo + i*h, i = 0..n-1.
class Grid {
public:
    Grid() = default;

    Grid(std::span<const Interval> extent, std::span<const int> nodes) {
        if (extent.empty() || extent.size() > 2 || extent.size() != nodes.size())
            throw std::invalid_argument("grid: dimension must be 1 or 2 with one node count per axis");
        dim_ = static_cast<int>(extent.size());
        for (int a = 0; a < dim_; ++a) {
            const auto& iv = extent[a];
            if (!std::isfinite(iv.lo) || !std::isfinite(iv.hi) || !(iv.hi > iv.lo))
                throw std::invalid_argument("grid: degenerate extent on axis " + std::to_string(a));
            if (nodes[a] < 3)
                throw std::invalid_argument("grid: need at least 3 nodes per axis");
            lo_[a] = iv.lo;
            hi_[a] = iv.hi;
            n_[a] = nodes[a];
            h_[a] = (iv.hi - iv.lo) / (nodes[a] - 1);
        }
    }

    int dim() const { return dim_; }
    int n(int axis) const { return n_[axis]; }
    double h(int axis) const { return h_[axis]; }
    double lo(int axis) const { return lo_[axis]; }
    double hi(int axis) const { return hi_[axis]; }
    int nx() const { return n_[0]; }
    int ny() const { return n_[1]; }

    std::size_t size() const { return static_cast<std::size_t>(n_[0]) * n_[1]; }
    std::size_t cell_count() const {
        return dim_ == 1 ? static_cast<std::size_t>(n_[0] - 1)
                         : static_cast<std::size_t>(n_[0] - 1) * (n_[1] - 1);
    }
    double cell_volume() const { return dim_ == 1 ? h_[0] : h_[0] * h_[1]; }
    /// Largest spacing; the "h" used in tolerances.
    double spacing() const { return dim_ == 1 ? h_[0] : std::max(h_[0], h_[1]); }

    std::size_t index(int i, int j = 0) const {
        return static_cast<std::size_t>(i) + static_cast<std::size_t>(n_[0]) * j;
    }
    int ix(std::size_t k) const { return static_cast<int>(k % n_[0]); }
    int iy(std::size_t k) const { return static_cast<int>(k / n_[0]); }

    double x(int i) const { return i == n_[0] - 1 ? hi_[0] : lo_[0] + i * h_[0]; }
    double y(int j) const { return dim_ == 1 ? 0.0 : (j == n_[1] - 1 ? hi_[1] : lo_[1] + j * h_[1]); }
    Point coord(std::size_t k) const { return {x(ix(k)), y(iy(k))}; }

    bool on_boundary(std::size_t k) const {
        const int i = ix(k);
        if (i == 0 || i == n_[0] - 1) return true;
        if (dim_ == 1) return false;
        const int j = iy(k);
        return j == 0 || j == n_[1] - 1;
    }

    /// Node indices of cell c: 2 corners in 1D, 4 in 2D ordered (00, 10, 01, 11).
    std::array<std::size_t, 4> cell_nodes(std::size_t c) const {
        if (dim_ == 1) return {c, c + 1, c, c + 1};
        const auto cx = static_cast<int>(c % (n_[0] - 1));
        const auto cy = static_cast<int>(c / (n_[0] - 1));
        const auto k00 = index(cx, cy);
        return {k00, k00 + 1, k00 + n_[0], k00 + n_[0] + 1};
    }
    int corners_per_cell() const { return dim_ == 1 ? 2 : 4; }

    friend bool operator==(const Grid& a, const Grid& b) {
        if (a.dim_ != b.dim_) return false;
        for (int d = 0; d < a.dim_; ++d)
            if (a.n_[d] != b.n_[d] || a.lo_[d] != b.lo_[d] || a.hi_[d] != b.hi_[d]) return false;
        return true;
    }

private:
    int dim_ = 1;
    std::array<double, 2> lo_{0.0, 0.0};
    std::array<double, 2> hi_{1.0, 0.0};
    std::array<int, 2> n_{3, 1};
    std::array<double, 2> h_{0.5, 1.0};
};

inline Grid build_grid(std::span<const Interval> extent, std::span<const int> nodes) {
    return Grid(extent, nodes);
}
inline Grid build_grid_1d(double a, double b, int n) {
    const Interval e[] = {{a, b}};
    const int nn[] = {n};
    return Grid(e, nn);
}
inline Grid build_grid_2d(Interval ex, Interval ey, int nx, int ny) {
    const Interval e[] = {ex, ey};
    const int nn[] = {nx, ny};
    return Grid(e, nn);
}

inline void require_same_grid(const Grid& a, const Grid& b, const char* what) {
    if (!(a == b)) throw std::invalid_argument(std::string(what) + ": grids differ");
}

/// Boolean per node. true = node belongs to the set (D, Omega, K, ...).
struct DomainMask {
    Grid grid;
    std::vector<std::uint8_t> inside;

    DomainMask() = default;
    DomainMask(const Grid& g, bool value) : grid(g), inside(g.size(), value ? 1 : 0) {}

    bool operator[](std::size_t k) const { return inside[k] != 0; }
    std::size_t size() const { return inside.size(); }
    std::size_t count() const {
        return static_cast<std::size_t>(std::count(inside.begin(), inside.end(), std::uint8_t{1}));
    }
    bool is_empty() const { return count() == 0; }

    /// A cell belongs to the set iff all its corner nodes do.
    bool cell_included(std::size_t c) const {
        const auto nodes = grid.cell_nodes(c);
        for (int q = 0; q < grid.corners_per_cell(); ++q)
            if (!inside[nodes[q]]) return false;
        return true;
    }
    std::size_t cell_count() const {
        std::size_t total = 0;
        for (std::size_t c = 0; c < grid.cell_count(); ++c) total += cell_included(c) ? 1 : 0;
        return total;
    }

    friend bool operator==(const DomainMask&, const DomainMask&) = default;
};

inline DomainMask full_mask(const Grid& g) { return DomainMask(g, true); }
inline DomainMask empty_mask(const Grid& g) { return DomainMask(g, false); }

template <class Pred>
DomainMask mask_from(const Grid& g, Pred&& pred) {
    DomainMask m(g, false);
    for (std::size_t k = 0; k < g.size(); ++k) m.inside[k] = pred(g.coord(k)) ? 1 : 0;
    return m;
}

/// Nodes strictly inside the disc |x - center| < radius.
inline DomainMask disc_mask(const Grid& g, Point center, double radius) {
    if (!(radius > 0.0)) throw std::invalid_argument("disc_mask: radius must be positive");
    return mask_from(g, [&](const Point& x) {
        const double dx = x[0] - center[0], dy = x[1] - center[1];
        return dx * dx + dy * dy < radius * radius;
    });
}

inline DomainMask complement(const DomainMask& a) {
    DomainMask r = a;
    for (auto& v : r.inside) v = v ? 0 : 1;
    return r;
}
inline DomainMask intersect(const DomainMask& a, const DomainMask& b) {
    require_same_grid(a.grid, b.grid, "intersect");
    DomainMask r = a;
    for (std::size_t k = 0; k < r.size(); ++k) r.inside[k] = (a.inside[k] && b.inside[k]) ? 1 : 0;
    return r;
}
inline DomainMask unite(const DomainMask& a, const DomainMask& b) {
    require_same_grid(a.grid, b.grid, "unite");
    DomainMask r = a;
    for (std::size_t k = 0; k < r.size(); ++k) r.inside[k] = (a.inside[k] || b.inside[k]) ? 1 : 0;
    return r;
}
inline DomainMask difference(const DomainMask& a, const DomainMask& b) { return intersect(a, complement(b)); }
inline bool is_subset(const DomainMask& a, const DomainMask& b) {
    require_same_grid(a.grid, b.grid, "is_subset");
    for (std::size_t k = 0; k < a.size(); ++k)
        if (a.inside[k] && !b.inside[k]) return false;
    return true;
}
inline DomainMask grid_boundary_mask(const Grid& g) {
    DomainMask m(g, false);
    for (std::size_t k = 0; k < g.size(); ++k) m.inside[k] = g.on_boundary(k) ? 1 : 0;
    return m;
}
/// Nodes of D that touch the outside of D (4-neighbourhood) or the grid edge.
inline DomainMask boundary_nodes(const DomainMask& d) {
    const Grid& g = d.grid;
    DomainMask r(g, false);
    for (std::size_t k = 0; k < g.size(); ++k) {
        if (!d.inside[k]) continue;
        if (g.on_boundary(k)) { r.inside[k] = 1; continue; }
        const std::size_t nx = static_cast<std::size_t>(g.nx());
        bool edge = !d.inside[k - 1] || !d.inside[k + 1];
        if (g.dim() == 2) edge = edge || !d.inside[k - nx] || !d.inside[k + nx];
        r.inside[k] = edge ? 1 : 0;
    }
    return r;
}

/// Real values at grid nodes.
struct GridFunction {
    Grid grid;
    std::vector<double> values;

    GridFunction() = default;
    explicit GridFunction(const Grid& g, double value = 0.0) : grid(g), values(g.size(), value) {}
    GridFunction(const Grid& g, std::vector<double> v) : grid(g), values(std::move(v)) {
        if (values.size() != g.size()) throw std::invalid_argument("GridFunction: size mismatch");
    }

    double& operator[](std::size_t k) { return values[k]; }
    double operator[](std::size_t k) const { return values[k]; }
    std::size_t size() const { return values.size(); }

    double max() const { return *std::max_element(values.begin(), values.end()); }
    double min() const { return *std::min_element(values.begin(), values.end()); }
    double sup_norm() const {
        double m = 0.0;
        for (double v : values) m = std::max(m, std::abs(v));
        return m;
    }
    bool all_finite() const {
        return std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); });
    }
};

template <class Fn>
GridFunction sample(const Grid& g, Fn&& fn) {
    GridFunction u(g);
    for (std::size_t k = 0; k < g.size(); ++k) u[k] = fn(g.coord(k));
    return u;
}

inline GridFunction operator-(const GridFunction& a, const GridFunction& b) {
    require_same_grid(a.grid, b.grid, "difference");
    GridFunction r = a;
    for (std::size_t k = 0; k < r.size(); ++k) r[k] -= b[k];
    return r;
}
inline GridFunction operator*(double c, const GridFunction& a) {
    GridFunction r = a;
    for (double& v : r.values) v *= c;
    return r;
}

/// Piecewise-constant values per cell.
struct CellFunction {
    Grid grid;
    std::vector<double> values;
};

/// Per-cell gradient (d-linear element gradient at the cell centre).
struct CellVectorField {
    Grid grid;
    std::vector<Point> values;
    std::vector<double> magnitude;
};

inline CellVectorField gradient(const GridFunction& u) {
    const Grid& g = u.grid;
    CellVectorField out{g, std::vector<Point>(g.cell_count()), std::vector<double>(g.cell_count())};
    for (std::size_t c = 0; c < g.cell_count(); ++c) {
        const auto k = g.cell_nodes(c);
        Point grad{0.0, 0.0};
        if (g.dim() == 1) {
            grad[0] = (u[k[1]] - u[k[0]]) / g.h(0);
        } else {
            grad[0] = ((u[k[1]] - u[k[0]]) + (u[k[3]] - u[k[2]])) / (2.0 * g.h(0));
            grad[1] = ((u[k[2]] - u[k[0]]) + (u[k[3]] - u[k[1]])) / (2.0 * g.h(1));
        }
        out.values[c] = grad;
        out.magnitude[c] = std::hypot(grad[0], grad[1]);
    }
    return out;
}

/// Sum over included cells of the corner average, times the cell volume.
inline double integrate(const GridFunction& field, const DomainMask& mask) {
    require_same_grid(field.grid, mask.grid, "integrate");
    const Grid& g = field.grid;
    const int q = g.corners_per_cell();
    double sum = 0.0;
    for (std::size_t c = 0; c < g.cell_count(); ++c) {
        if (!mask.cell_included(c)) continue;
        const auto k = g.cell_nodes(c);
        double s = 0.0;
        for (int i = 0; i < q; ++i) s += field[k[i]];
        sum += s / q;
    }
    return sum * g.cell_volume();
}

inline double integrate(const CellFunction& field, const DomainMask& mask) {
    require_same_grid(field.grid, mask.grid, "integrate");
    double sum = 0.0;
    for (std::size_t c = 0; c < field.grid.cell_count(); ++c)
        if (mask.cell_included(c)) sum += field.values[c];
    return sum * field.grid.cell_volume();
}

inline double lp_norm(const GridFunction& u, double p, const DomainMask& mask) {
    if (!(p >= 1.0)) throw std::invalid_argument("lp_norm: p must be >= 1");
    GridFunction powered = u;
    for (double& v : powered.values) v = std::pow(std::abs(v), p);
    return std::pow(integrate(powered, mask), 1.0 / p);
}

/// Trapezoid weights of the full grid: sum_k w_k v_k integrates node data
/// over the whole box. Fields vanishing outside D integrate over D.
inline std::vector<double> node_weights(const Grid& g) {
    std::vector<double> w(g.size(), 0.0);
    const int q = g.corners_per_cell();
    const double share = g.cell_volume() / q;
    for (std::size_t c = 0; c < g.cell_count(); ++c) {
        const auto k = g.cell_nodes(c);
        for (int i = 0; i < q; ++i) w[k[i]] += share;
    }
    return w;
}

inline double weighted_sum(std::span<const double> w, std::span<const double> v) {
    double s = 0.0;
    for (std::size_t k = 0; k < w.size(); ++k) s += w[k] * v[k];
    return s;
}

}  // namespace pshape
