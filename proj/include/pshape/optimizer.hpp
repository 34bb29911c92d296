#pragma once

// Shape optimisation for the model cost  J(Omega) = -int g u_Omega + lambda |Omega|.
//
//  * free_boundary_minimize: the f = g case, written as the free boundary
//    energy  (1/p) int |grad u|^p - int f u + Lambda |{u > 0}|  and minimised
//    by alternating state solves with truncation competitors (u - eps)^+.
//  * control_optimize: general f, g over nodal densities beta in {0, B_cap}
//    (B_cap standing in for +inf): adjoint sensitivities dJ/dbeta rank the
//    nodes, the best-ranked ones within the volume budget stay free.
//  * check_hypotheses: which existence/regularity statements apply to the data.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "geometry.hpp"
#include "grid.hpp"
#include "measure_field.hpp"
#include "state.hpp"

namespace pshape {

struct CostSpec {
    GridFunction g;
    double lambda = 0.0;
    double p = 2.0;
    double q = std::numeric_limits<double>::infinity();    ///< claimed integrability of f
    double ell = std::numeric_limits<double>::infinity();  ///< claimed integrability of g
    double m = 0.0;                                         ///< volume budget, 0 < m <= |D|
};

/// Relative support threshold: {u > 1e-8 max u}.
inline DomainMask positive_set(const GridFunction& u, double relative = 1e-8) {
    const double top = u.max();
    DomainMask m(u.grid, false);
    if (!(top > 0.0)) return m;
    const double thr = relative * top;
    for (std::size_t k = 0; k < u.size(); ++k) m.inside[k] = u[k] > thr ? 1 : 0;
    return m;
}

/// Lumped measure sum_k w_k over nodes of the mask.
inline double nodal_measure(const DomainMask& mask) {
    const auto w = node_weights(mask.grid);
    double s = 0.0;
    for (std::size_t k = 0; k < w.size(); ++k)
        if (mask[k]) s += w[k];
    return s;
}

// ---------------------------------------------------------------------------
// Free boundary path
// ---------------------------------------------------------------------------

struct FreeBoundaryOptions {
    SolveOptions solve;
    int max_rounds = 1000;
    int octaves = 12;
};

struct FreeBoundaryResult {
    GridFunction u;
    DomainMask omega;
    SolveReport report;
    double objective = 0.0;
    std::vector<double> objective_history;
};

/// (1/p) int |grad u|^p - int f u + Lambda |{u > 0}| for u vanishing off D.
inline double free_boundary_objective(const GridFunction& u, const GridFunction& f, double p, double Lambda,
                                      const DomainMask& domain) {
    return energy(u, StateProblem::on_domain(domain, f, p)) + Lambda * measure(positive_set(u));
}

/// Truncation levels tried each round: coarse fractions of max u down to the
/// full truncation (u = 0), then eps0 = 0.1 max u and `octaves` halvings.
inline std::vector<double> truncation_schedule(double umax, int octaves) {
    std::vector<double> eps{umax, 0.75 * umax, 0.5 * umax, 0.25 * umax};
    double e = 0.1 * umax;
    for (int i = 0; i < octaves; ++i, e *= 0.5) eps.push_back(e);
    return eps;
}

inline FreeBoundaryResult free_boundary_minimize(const GridFunction& f, double p, double Lambda,
                                                 const DomainMask& domain, const FreeBoundaryOptions& opts = {}) {
    require_same_grid(f.grid, domain.grid, "free_boundary_minimize");
    if (f.min() < 0.0) throw std::invalid_argument("free_boundary_minimize: f must be >= 0");
    if (!(Lambda >= 0.0)) throw std::invalid_argument("free_boundary_minimize: Lambda must be >= 0");

    FreeBoundaryResult res;
    auto state = solve_on_set(domain, f, p, opts.solve);
    res.u = std::move(state.u);
    res.report = state.report;
    bool all_converged = state.report.converged;
    res.objective = free_boundary_objective(res.u, f, p, Lambda, domain);
    res.objective_history.push_back(res.objective);

    int rounds = 0;
    bool stalled = false;
    for (; rounds < opts.max_rounds; ++rounds) {
        const double umax = res.u.max();
        if (!(umax > 0.0)) {
            stalled = true;
            break;
        }
        const double slack = 1e-12 * (1.0 + std::abs(res.objective));
        double best = res.objective - slack;
        std::optional<GridFunction> best_v;
        for (double eps : truncation_schedule(umax, opts.octaves)) {
            GridFunction v = res.u;
            for (double& x : v.values) x = std::max(x - eps, 0.0);
            const double ev = free_boundary_objective(v, f, p, Lambda, domain);
            if (ev < best) {
                best = ev;
                best_v = std::move(v);
            }
        }
        if (!best_v) {
            stalled = true;
            break;
        }
        // Re-solve on the truncated support: the state there has lower energy
        // than the competitor and a support no larger.
        const DomainMask support = positive_set(*best_v, 0.0);
        GridFunction next;
        SolveReport next_rep;
        if (support.is_empty()) {
            next = GridFunction(f.grid, 0.0);
        } else {
            auto s = solve_on_set(intersect(support, domain), f, p, opts.solve);
            next = std::move(s.u);
            next_rep = s.report;
            all_converged = all_converged && s.report.converged;
        }
        double e_next = free_boundary_objective(next, f, p, Lambda, domain);
        if (e_next > best) {
            // Solver slack: keep the competitor itself.
            next = std::move(*best_v);
            e_next = best;
        }
        res.u = std::move(next);
        res.report = next_rep;
        res.objective = e_next;
        res.objective_history.push_back(e_next);
    }
    res.omega = positive_set(res.u);
    res.report.iterations = rounds;
    res.report.final_energy = res.objective;
    res.report.converged = stalled && all_converged;
    return res;
}

// ---------------------------------------------------------------------------
// Relaxed control path
// ---------------------------------------------------------------------------

struct ControlOptions {
    SolveOptions solve;
    int max_iterations = 200;
    double b_cap = 0.0;           ///< <= 0 selects 1e6 * max(1, |f|_inf)
    double filter_radius = 1.5;   ///< sensitivity filter radius, in grid spacings
    int stable_iterations = 3;    ///< unchanged free set this many times: done
    int patience = 15;            ///< iterations without a better set: done
    int scan_levels = 8;          ///< volume levels scanned when lambda > 0
    int scan_refinements = 4;
};

struct Sensitivity {
    GridFunction u;
    std::vector<double> dj_dbeta;  ///< dJ/dbeta_k for J = -sum_k w_k g_k u_k
    double objective = 0.0;
    SolveReport state_report;
};

namespace detail {
/// Nodal sensitivity density dJ/dbeta / w at the current state:
/// z (u^2 + eps^2)^{(p-2)/2} u, with H z = w g.
inline std::vector<double> sensitivity_density(const StateProblem& prob, const GridFunction& u, const GridFunction& g,
                                               double eps) {
    const auto w = node_weights(u.grid);
    std::vector<double> rhs(w.size());
    for (std::size_t k = 0; k < w.size(); ++k) rhs[k] = w[k] * g[k];
    const auto z = solve_linearized(prob, u, rhs, eps);
    std::vector<double> a(w.size(), 0.0);
    for (std::size_t k = 0; k < w.size(); ++k)
        if (z[k] != 0.0) a[k] = z[k] * std::pow(u[k] * u[k] + eps * eps, 0.5 * prob.p - 1.0) * u[k];
    return a;
}

}  // namespace detail

/// Adjoint gradient of J(beta) = -int g u_beta with respect to nodal densities:
/// dJ/dbeta_k = w_k z_k (u_k^2 + eps^2)^{(p-2)/2} u_k, where H z = w g and H
/// is the Hessian of the regularised energy at u.
inline Sensitivity control_sensitivity(const GridFunction& f, const GridFunction& g, const MeasureField& beta,
                                       double p, const DomainMask& domain, const SolveOptions& opts = {}) {
    const auto prob = StateProblem::on_domain(domain, f, p, beta);
    auto state = solve_state(prob, opts);
    const auto w = node_weights(f.grid);
    Sensitivity s;
    s.dj_dbeta = detail::sensitivity_density(prob, state.u, g, state.report.eps_reg);
    for (std::size_t k = 0; k < w.size(); ++k) {
        s.dj_dbeta[k] *= w[k];
        s.objective -= w[k] * g[k] * state.u[k];
    }
    s.u = std::move(state.u);
    s.state_report = std::move(state.report);
    return s;
}

struct ControlResult {
    MeasureField beta;
    DomainMask omega;
    GridFunction u;
    SolveReport report;
    double objective = 0.0;       ///< J on the hard-constrained omega
    double volume_budget = 0.0;   ///< the m actually used (scanned when lambda > 0)
    std::vector<double> objective_history;
    std::string status = "ok";
};

namespace detail {

inline double model_cost(const GridFunction& u, const GridFunction& g, double lambda, const DomainMask& omega) {
    const auto w = node_weights(u.grid);
    double j = 0.0;
    for (std::size_t k = 0; k < w.size(); ++k) j -= w[k] * g[k] * u[k];
    return j + lambda * measure(omega);
}

/// Cone filter of radius r (in grid spacings) over all grid nodes.
inline std::vector<double> filter_nodes(const Grid& g, const std::vector<double>& a, double r) {
    struct Tap {
        int di, dj;
        double w;
    };
    std::vector<Tap> taps;
    const int reach = static_cast<int>(std::floor(r));
    const int jr = g.dim() == 2 ? reach : 0;
    for (int dj = -jr; dj <= jr; ++dj)
        for (int di = -reach; di <= reach; ++di) {
            const double d = std::hypot(di, dj);
            if (d < r) taps.push_back({di, dj, r - d});
        }
    const int ny = g.dim() == 2 ? g.ny() : 1;
    std::vector<double> out(a.size(), 0.0);
    for (std::size_t k = 0; k < a.size(); ++k) {
        const int i = g.ix(k), j = g.iy(k);
        double s = 0.0, ws = 0.0;
        for (const auto& t : taps) {
            const int ii = i + t.di, jj = j + t.dj;
            if (ii < 0 || jj < 0 || ii >= g.nx() || jj >= ny) continue;
            s += t.w * a[g.index(ii, jj)];
            ws += t.w;
        }
        out[k] = s / ws;
    }
    return out;
}

/// Design nodes with the largest merit (ties by index) whose lumped measure
/// fits in m.
inline DomainMask top_by_merit(const Grid& g, const std::vector<std::size_t>& design, const std::vector<double>& merit,
                               const std::vector<double>& w, double m) {
    std::vector<std::size_t> order = design;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (merit[a] != merit[b]) return merit[a] > merit[b];
        return a < b;
    });
    DomainMask free(g, false);
    double used = 0.0;
    for (auto k : order) {
        if (used + w[k] > m * (1.0 + 1e-12)) break;
        used += w[k];
        free.inside[k] = 1;
    }
    return free;
}

struct VolumeRun {
    ControlResult result;
    int iterations = 0;
};

/// Best set of lumped measure <= m by sensitivity ranking: free nodes
/// (beta = 0) are the design nodes with the largest filtered sensitivity
/// density, capped nodes (beta = B_cap) are Dirichlet in the state solve.
inline VolumeRun optimize_volume(const GridFunction& f, const CostSpec& cost, const DomainMask& domain, double m,
                                 double b_cap, const ControlOptions& opts) {
    const Grid& grid = f.grid;
    const auto w = node_weights(grid);
    std::vector<std::size_t> design;
    double design_measure = 0.0;
    for (std::size_t k = 0; k < grid.size(); ++k)
        if (domain[k] && !grid.on_boundary(k)) {
            design.push_back(k);
            design_measure += w[k];
        }

    VolumeRun run;
    ControlResult& res = run.result;
    res.volume_budget = m;

    auto evaluate = [&](const DomainMask& free, StateSolution& state) {
        SolveOptions so = opts.solve;
        if (!state.u.values.empty()) so.initial_guess = state.u.values;
        state = solve_on_set(free, f, cost.p, so);
        return model_cost(state.u, cost.g, cost.lambda, positive_set(state.u));
    };

    DomainMask best(grid, false);
    StateSolution best_state;
    bool converged = true;
    if (m >= design_measure * (1.0 - 1e-12)) {
        for (auto k : design) best.inside[k] = 1;
    } else if (m > 0.0) {
        // Start from the superlevel sets of the sensitivity on all of D.
        const auto whole = StateProblem::on_domain(domain, f, cost.p);
        const auto s0 = solve_state(whole, opts.solve);
        std::vector<double> merit =
            filter_nodes(grid, sensitivity_density(whole, s0.u, cost.g, s0.report.eps_reg), opts.filter_radius);
        DomainMask free = top_by_merit(grid, design, merit, w, m);
        StateSolution state;
        double best_j = std::numeric_limits<double>::infinity();
        int stable = 0, since_best = 0;
        converged = false;
        for (int it = 0; it < opts.max_iterations; ++it) {
            ++run.iterations;
            const double j = evaluate(free, state);
            res.objective_history.push_back(j);
            if (j < best_j) {
                best_j = j;
                best = free;
                best_state = state;
                since_best = 0;
            } else {
                ++since_best;
            }
            const auto prob = StateProblem::on_domain(free, f, cost.p);
            const auto a = filter_nodes(grid, sensitivity_density(prob, state.u, cost.g, state.report.eps_reg),
                                        opts.filter_radius);
            for (std::size_t k = 0; k < merit.size(); ++k) merit[k] = 0.5 * (merit[k] + a[k]);
            DomainMask next = top_by_merit(grid, design, merit, w, m);
            stable = next.inside == free.inside ? stable + 1 : 0;
            free = std::move(next);
            if (stable >= opts.stable_iterations || since_best >= opts.patience) {
                converged = true;
                break;
            }
        }
        if (!converged) res.status = "iteration limit";
    }

    // Hard-constrained result on the chosen free set.
    res.omega = best;
    if (!best.is_empty()) {
        if (best_state.u.values.empty()) best_state = solve_on_set(best, f, cost.p, opts.solve);
        res.omega = intersect(best, positive_set(best_state.u));
        res.u = std::move(best_state.u);
        res.report = best_state.report;
    } else {
        res.u = GridFunction(grid, 0.0);
        res.report.converged = true;
    }
    res.report.converged = res.report.converged && converged;
    res.objective = model_cost(res.u, cost.g, cost.lambda, res.omega);
    res.report.final_energy = res.objective;
    res.report.iterations = run.iterations;
    res.beta = MeasureField(grid, 0.0);
    for (auto k : design)
        if (!best[k]) res.beta.beta[k] = b_cap;
    return run;
}

}  // namespace detail

inline ControlResult control_optimize(const GridFunction& f, const CostSpec& cost, const DomainMask& domain,
                                      const ControlOptions& opts = {}) {
    require_same_grid(f.grid, domain.grid, "control_optimize");
    require_same_grid(cost.g.grid, domain.grid, "control_optimize");
    if (f.min() < 0.0) throw std::invalid_argument("control_optimize: f must be >= 0");
    if (!(cost.lambda >= 0.0)) throw std::invalid_argument("control_optimize: lambda must be >= 0");
    if (!(cost.p > 1.0)) throw std::invalid_argument("control_optimize: p must be > 1");
    const double domain_measure = nodal_measure(domain);
    if (!(cost.m > 0.0) || cost.m > domain_measure * (1.0 + 1e-9) + 1e-12)
        throw std::invalid_argument("control_optimize: volume budget m must lie in (0, |D|]");
    const double b_cap = opts.b_cap > 0.0 ? opts.b_cap : 1e6 * detail::data_scale(f);

    if (cost.lambda == 0.0) return detail::optimize_volume(f, cost, domain, cost.m, b_cap, opts).result;

    // lambda acts as the multiplier of the volume constraint: scan budgets in
    // [0, m] and refine around the best one.
    auto run_at = [&](double budget) { return detail::optimize_volume(f, cost, domain, budget, b_cap, opts).result; };
    std::vector<double> levels;
    for (int i = 0; i <= opts.scan_levels; ++i) levels.push_back(cost.m * i / opts.scan_levels);
    std::vector<ControlResult> runs;
    for (double b : levels) runs.push_back(run_at(b));
    std::size_t best = 0;
    for (std::size_t i = 1; i < runs.size(); ++i)
        if (runs[i].objective < runs[best].objective) best = i;
    ControlResult winner = runs[best];
    double lo = levels[best > 0 ? best - 1 : best];
    double hi = levels[best + 1 < levels.size() ? best + 1 : best];
    double centre = levels[best];
    std::vector<double> history;
    for (const auto& r : runs) history.push_back(r.objective);
    for (int r = 0; r < opts.scan_refinements && hi - lo > 0.0; ++r) {
        for (double b : {0.5 * (lo + centre), 0.5 * (centre + hi)}) {
            if (b == centre) continue;
            auto cand = run_at(b);
            history.push_back(cand.objective);
            if (cand.objective < winner.objective) {
                winner = std::move(cand);
                centre = b;
            }
        }
        lo = 0.5 * (lo + centre);
        hi = 0.5 * (centre + hi);
    }
    winner.objective_history = std::move(history);
    return winner;
}

// ---------------------------------------------------------------------------
// Hypothesis checker
// ---------------------------------------------------------------------------

struct HypothesisReport {
    bool existence_open_p_gt_d = false;
    bool existence_quasiopen = false;
    bool openness = false;
    bool finite_perimeter = false;
    double c_best = 0.0;  ///< min over {f > 0} of g / f (inf if f vanishes)
    std::vector<std::string> reasons;
};

namespace detail {
inline std::string fmt_num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}
}  // namespace detail

inline HypothesisReport check_hypotheses(const GridFunction& f, const CostSpec& cost, int d) {
    using detail::fmt_num;
    HypothesisReport r;
    const double p = cost.p;
    const double gmin = cost.g.size() ? cost.g.min() : 0.0;
    const double fmin = f.size() ? f.min() : 0.0;
    const bool g_finite = cost.g.all_finite();
    const bool f_nonneg = fmin >= 0.0;

    // Open optimal sets for p > d: integrand bounded below by M|g| + |lambda|.
    r.existence_open_p_gt_d = p > static_cast<double>(d) && g_finite;
    r.reasons.push_back(std::string(r.existence_open_p_gt_d ? "[open, p>d] holds: " : "[open, p>d] fails: ") +
                        "p - d = " + fmt_num(p - d) + (g_finite ? ", g in L^1" : ", g not integrable"));

    // Quasi-open existence: g >= 0 makes j_0 non-increasing; ell > 1 gives the growth bound.
    r.existence_quasiopen = gmin >= 0.0 && cost.ell > 1.0 && cost.lambda >= 0.0 && f_nonneg;
    r.reasons.push_back(std::string(r.existence_quasiopen ? "[quasi-open] holds: " : "[quasi-open] fails: ") +
                        "min g = " + fmt_num(gmin) + ", ell - 1 = " + fmt_num(cost.ell - 1.0) +
                        ", lambda = " + fmt_num(cost.lambda) + ", min f = " + fmt_num(fmin) +
                        (cost.ell > 1.0 ? ", growth exponent r = ell/(ell-1) = " +
                                              fmt_num(std::isinf(cost.ell) ? 1.0 : cost.ell / (cost.ell - 1.0))
                                        : std::string()));

    // Openness: lambda > 0, q > d/p, q >= 1 and g >= c f with c > 0.
    double c = std::numeric_limits<double>::infinity();
    bool unbounded_ratio = false;
    for (std::size_t k = 0; k < f.size(); ++k) {
        if (!(f[k] > 0.0)) continue;
        if (!(cost.g[k] > 0.0)) {
            unbounded_ratio = true;
            c = 0.0;
            break;
        }
        c = std::min(c, cost.g[k] / f[k]);
    }
    r.c_best = c;
    const double q_margin = cost.q - static_cast<double>(d) / p;
    const bool ratio_ok = !unbounded_ratio && c > 0.0;
    r.openness = cost.lambda > 0.0 && q_margin > 0.0 && cost.q >= 1.0 && ratio_ok && f_nonneg;
    std::string why = std::string(r.openness ? "[openness] holds: " : "[openness] fails: ") + "lambda = " +
                      fmt_num(cost.lambda) + ", q - d/p = " + fmt_num(q_margin);
    why += unbounded_ratio ? ", no finite c with f <= Cg (f > 0 where g = 0)" : ", g >= c f with c = " + fmt_num(c);
    r.reasons.push_back(why);

    // Finite perimeter: j_0(x, s) = -g s has difference quotients bounded by |g| in L^1.
    r.finite_perimeter = g_finite && cost.lambda > 0.0 && f_nonneg;
    r.reasons.push_back(std::string(r.finite_perimeter ? "[finite perimeter] holds: " : "[finite perimeter] fails: ") +
                        "a = |g| " + (g_finite ? "in L^1" : "not integrable") + ", lambda = " + fmt_num(cost.lambda) +
                        ", min f = " + fmt_num(fmin));
    return r;
}

}  // namespace pshape
