#pragma once

// Discretised capacitary measures: a nodal density beta >= 0 where the value
// +infinity marks nodes on which the state is forced to vanish.

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "grid.hpp"

namespace pshape {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct MeasureField {
    Grid grid;
    std::vector<double> beta;

    MeasureField() = default;
    explicit MeasureField(const Grid& g, double value = 0.0) : grid(g), beta(g.size(), value) {
        validate();
    }
    MeasureField(const Grid& g, std::vector<double> values) : grid(g), beta(std::move(values)) {
        if (beta.size() != g.size()) throw std::invalid_argument("MeasureField: size mismatch");
        validate();
    }

    bool is_inf(std::size_t k) const { return std::isinf(beta[k]); }

    DomainMask inf_set() const {
        DomainMask m(grid, false);
        for (std::size_t k = 0; k < beta.size(); ++k) m.inside[k] = is_inf(k) ? 1 : 0;
        return m;
    }

    void validate() const {
        for (double b : beta)
            if (std::isnan(b) || b < 0.0 || (std::isinf(b) && b < 0.0))
                throw std::invalid_argument("MeasureField: densities must be >= 0 (or +inf)");
    }

    /// Nodewise mu >= nu, where +inf dominates every finite value.
    bool dominates(const MeasureField& other) const {
        require_same_grid(grid, other.grid, "dominates");
        for (std::size_t k = 0; k < beta.size(); ++k)
            if (!(beta[k] >= other.beta[k])) return false;
        return true;
    }
};

}  // namespace pshape
