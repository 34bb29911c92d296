#pragma once

// Capacitary measures on the grid: the infinity_K construction, the gamma_p
// distance between measures, comparison-principle harnesses and the finite
// region {beta < inf}.

#include <algorithm>
#include <array>
#include <stdexcept>
#include <utility>

#include "geometry.hpp"
#include "grid.hpp"
#include "measure_field.hpp"
#include "parallel.hpp"
#include "state.hpp"

namespace pshape {

/// beta = +inf on k, 0 elsewhere.
inline MeasureField infinity_on(const DomainMask& k) {
    MeasureField mu(k.grid, 0.0);
    for (std::size_t i = 0; i < k.size(); ++i)
        if (k[i]) mu.beta[i] = kInf;
    return mu;
}

/// State u_{mu,f} on D (Dirichlet off D, beta = mu).
inline StateSolution solve_for_measure(const MeasureField& mu, const GridFunction& f, double p,
                                       const DomainMask& domain, const SolveOptions& opts = {}) {
    require_same_grid(mu.grid, domain.grid, "solve_for_measure");
    return solve_state(StateProblem::on_domain(domain, f, p, mu), opts);
}

/// || u_{mu,f} - u_{nu,f} ||_{L^p(D)}, f = 1 unless given.
inline double gamma_distance(const MeasureField& mu, const MeasureField& nu, double p, const DomainMask& domain,
                             const SolveOptions& opts = {}, std::optional<GridFunction> f = std::nullopt) {
    require_same_grid(mu.grid, nu.grid, "gamma_distance");
    const GridFunction rhs = f ? std::move(*f) : GridFunction(mu.grid, 1.0);
    const std::array<const MeasureField*, 2> measures{&mu, &nu};
    std::array<GridFunction, 2> states;
    parallel_for(2, [&](std::size_t i) { states[i] = solve_for_measure(*measures[i], rhs, p, domain, opts).u; });
    return lp_norm(states[0] - states[1], p, domain);
}

inline double gamma_distance(const MeasureField& mu, const MeasureField& nu, double p) {
    return gamma_distance(mu, nu, p, full_mask(mu.grid));
}

struct MonotonicityReport {
    double max_violation = 0.0;  ///< max over nodes of (u1 - u2)^+
    GridFunction u1;
    GridFunction u2;
    SolveReport report1;
    SolveReport report2;
};

namespace detail {
inline MonotonicityReport compare_states(const MeasureField& mu1, const GridFunction& f1, const MeasureField& mu2,
                                         const GridFunction& f2, double p, const DomainMask& domain,
                                         const SolveOptions& opts) {
    const std::array<std::pair<const MeasureField*, const GridFunction*>, 2> cases{
        std::pair{&mu1, &f1}, std::pair{&mu2, &f2}};
    std::array<StateSolution, 2> sol;
    parallel_for(2, [&](std::size_t i) { sol[i] = solve_for_measure(*cases[i].first, *cases[i].second, p, domain, opts); });
    MonotonicityReport r;
    for (std::size_t k = 0; k < sol[0].u.size(); ++k)
        r.max_violation = std::max(r.max_violation, sol[0].u[k] - sol[1].u[k]);
    r.u1 = std::move(sol[0].u);
    r.u2 = std::move(sol[1].u);
    r.report1 = std::move(sol[0].report);
    r.report2 = std::move(sol[1].report);
    return r;
}
}  // namespace detail

/// mu1 >= mu2 and f >= 0 should give u1 <= u2.
inline MonotonicityReport check_monotonicity(const MeasureField& mu1, const MeasureField& mu2, const GridFunction& f,
                                             double p, const DomainMask& domain, const SolveOptions& opts = {}) {
    if (!mu1.dominates(mu2)) throw std::invalid_argument("check_monotonicity: need mu1 >= mu2 nodewise");
    if (f.min() < 0.0) throw std::invalid_argument("check_monotonicity: need f >= 0");
    return detail::compare_states(mu1, f, mu2, f, p, domain, opts);
}

/// f1 <= f2 should give u_{mu,f1} <= u_{mu,f2}.
inline MonotonicityReport check_monotonicity(const MeasureField& mu, const GridFunction& f1, const GridFunction& f2,
                                             double p, const DomainMask& domain, const SolveOptions& opts = {}) {
    require_same_grid(f1.grid, f2.grid, "check_monotonicity");
    for (std::size_t k = 0; k < f1.size(); ++k)
        if (!(f1[k] <= f2[k])) throw std::invalid_argument("check_monotonicity: need f1 <= f2 nodewise");
    return detail::compare_states(mu, f1, mu, f2, p, domain, opts);
}

struct FiniteRegion {
    DomainMask mask;
    double measure = 0.0;
};

/// {beta < inf} and its Lebesgue measure.
inline FiniteRegion finite_region(const MeasureField& mu) {
    FiniteRegion r{complement(mu.inf_set()), 0.0};
    r.measure = measure(r.mask);
    return r;
}

}  // namespace pshape
