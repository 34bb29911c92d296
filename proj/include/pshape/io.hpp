#pragma once

// Plain-text field files.
//
// CSV: one node per line, header `x,value` (1D) or `x,y,value` (2D), x
// fastest. Values are printed with 9 significant digits; `inf` is allowed.
// The grid is recovered from the coordinate columns on read.
//
// PGM: binary 8-bit greyscale, top row = largest y, linear map min..max.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "grid.hpp"

namespace pshape::io {

/// %.9g, with `inf`, `-inf` and `nan` spelled out.
inline std::string format_real(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

/// v rounded to 9 significant digits.
inline double round9(double v) {
    if (!std::isfinite(v)) return v;
    return std::stod(format_real(v));
}

inline std::string to_csv(const Grid& g, const std::vector<double>& values) {
    if (values.size() != g.size()) throw std::invalid_argument("csv: value count does not match grid");
    std::string out = g.dim() == 1 ? "x,value\n" : "x,y,value\n";
    for (std::size_t k = 0; k < g.size(); ++k) {
        const Point x = g.coord(k);
        out += format_real(x[0]);
        if (g.dim() == 2) out += "," + format_real(x[1]);
        out += "," + format_real(values[k]) + "\n";
    }
    return out;
}

inline void write_file(const std::string& path, const std::string& text) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + path);
    os << text;
    if (!os) throw std::runtime_error("write failed: " + path);
}

inline std::string read_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot read " + path);
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

inline void write_csv(const std::string& path, const GridFunction& u) { write_file(path, to_csv(u.grid, u.values)); }

inline void write_csv(const std::string& path, const DomainMask& m) {
    std::vector<double> v(m.size());
    for (std::size_t k = 0; k < v.size(); ++k) v[k] = m[k] ? 1.0 : 0.0;
    write_file(path, to_csv(m.grid, v));
}

namespace detail {

inline double parse_real(const std::string& s) {
    std::string t = s;
    t.erase(0, t.find_first_not_of(" \t\r"));
    t.erase(t.find_last_not_of(" \t\r") + 1);
    std::string low = t;
    std::transform(low.begin(), low.end(), low.begin(), [](unsigned char c) { return std::tolower(c); });
    if (low == "inf" || low == "+inf" || low == "infinity") return std::numeric_limits<double>::infinity();
    if (low == "-inf") return -std::numeric_limits<double>::infinity();
    std::size_t used = 0;
    const double v = std::stod(t, &used);
    if (used != t.size()) throw std::invalid_argument("not a number: '" + s + "'");
    return v;
}

/// Sorted distinct coordinates, merging values closer than 1e-9 of the span.
inline std::vector<double> axis_values(std::vector<double> c) {
    std::sort(c.begin(), c.end());
    const double tol = 1e-9 * std::max(1.0, c.back() - c.front());
    std::vector<double> out;
    for (double v : c)
        if (out.empty() || v - out.back() > tol) out.push_back(v);
    return out;
}

inline int axis_slot(const std::vector<double>& axis, double v) {
    const double h = (axis.back() - axis.front()) / (axis.size() - 1);
    const long i = std::lround((v - axis.front()) / h);
    if (i < 0 || i >= static_cast<long>(axis.size()) || std::abs(axis.front() + i * h - v) > 1e-6 * h)
        throw std::invalid_argument("csv: coordinates are not on a uniform grid");
    return static_cast<int>(i);
}

}  // namespace detail

/// Reads a CSV written by write_csv (any row order).
inline GridFunction read_csv(const std::string& path) {
    std::istringstream is(read_file(path));
    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t width = 0;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        std::vector<std::string> cells;
        std::stringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        if (rows.empty() && width == 0) {
            // Header line if the first cell is not numeric.
            try {
                detail::parse_real(cells.front());
            } catch (const std::exception&) {
                width = cells.size();
                continue;
            }
        }
        if (width == 0) width = cells.size();
        if (cells.size() != width || (width != 2 && width != 3))
            throw std::invalid_argument(path + ":" + std::to_string(lineno) + ": expected 2 or 3 columns");
        std::vector<double> r;
        for (const auto& c : cells) r.push_back(detail::parse_real(c));
        rows.push_back(std::move(r));
    }
    if (rows.empty()) throw std::invalid_argument(path + ": no data rows");
    const bool two_d = width == 3;
    std::vector<double> xs, ys;
    for (const auto& r : rows) {
        xs.push_back(r[0]);
        if (two_d) ys.push_back(r[1]);
    }
    const auto ax = detail::axis_values(xs);
    const auto ay = two_d ? detail::axis_values(ys) : std::vector<double>{};
    if (ax.size() < 3 || (two_d && ay.size() < 3)) throw std::invalid_argument(path + ": need at least 3 nodes per axis");
    const Grid g = two_d ? build_grid_2d({ax.front(), ax.back()}, {ay.front(), ay.back()}, static_cast<int>(ax.size()),
                                         static_cast<int>(ay.size()))
                         : build_grid_1d(ax.front(), ax.back(), static_cast<int>(ax.size()));
    if (rows.size() != g.size()) throw std::invalid_argument(path + ": row count does not fill the grid");
    GridFunction u(g, 0.0);
    std::vector<std::uint8_t> seen(g.size(), 0);
    for (const auto& r : rows) {
        const int i = detail::axis_slot(ax, r[0]);
        const int j = two_d ? detail::axis_slot(ay, r[1]) : 0;
        const auto k = g.index(i, j);
        if (seen[k]) throw std::invalid_argument(path + ": duplicate node");
        seen[k] = 1;
        u[k] = r[two_d ? 2 : 1];
    }
    return u;
}

inline void write_pgm(const std::string& path, const GridFunction& u) {
    const Grid& g = u.grid;
    const int w = g.nx(), h = g.dim() == 2 ? g.ny() : 1;
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (double v : u.values)
        if (std::isfinite(v)) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    std::string out = "P5\n" + std::to_string(w) + " " + std::to_string(h) + "\n255\n";
    for (int j = h - 1; j >= 0; --j)
        for (int i = 0; i < w; ++i) {
            const double v = u[g.index(i, j)];
            double t = hi > lo ? (v - lo) / (hi - lo) : 0.0;
            if (!std::isfinite(v)) t = v > 0 ? 1.0 : 0.0;
            out.push_back(static_cast<char>(static_cast<unsigned char>(std::lround(255.0 * std::clamp(t, 0.0, 1.0)))));
        }
    write_file(path, out);
}

}  // namespace pshape::io
