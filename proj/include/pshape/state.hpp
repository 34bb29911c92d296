#pragma once

// Relaxed p-Laplace state equation  -Delta_p u + beta |u|^{p-2} u = f  on D,
// u = 0 on Dirichlet nodes, solved as the minimiser of the discrete energy
//
//   E(u) = sum_cells sum_corners w_c/p |grad_c u|^p
//        + sum_nodes w_k/p beta_k |u_k|^p - sum_nodes w_k f_k u_k.
//
// grad_c is the one-sided gradient at a cell corner (x and y forward/backward
// differences along the two cell edges meeting there), w_c = |cell|/corners.
// This is the mean of the P1 energies of the two diagonal triangulations of
// each cell: strictly convex in the nodal values, exact on affine functions,
// and equal to the 5-point Laplacian for p = 2. Node terms use trapezoid
// (lumped) weights.

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "grid.hpp"
#include "measure_field.hpp"

namespace pshape {

struct SolveOptions {
    /// Sup-norm bound on the strong-form residual; <= 0 selects 1e-8 * max(1, |f|_inf).
    double tolerance = 0.0;
    int max_iterations = 50000;
    /// Gradient regularisation; <= 0 selects 1e-6 * max(1, |f|_inf).
    double eps_reg = 0.0;
    /// Starting point (zero on constrained nodes is enforced). Default: u = 0.
    std::optional<std::vector<double>> initial_guess;
};

struct SolveReport {
    int iterations = 0;
    double final_energy = 0.0;           ///< unregularised energy of the returned u
    double residual = 0.0;               ///< sup-norm strong residual of the minimised energy
    double unregularized_residual = 0.0; ///< same with eps_reg = 0
    double tolerance = 0.0;
    double eps_reg = 0.0;
    bool converged = false;
    std::vector<double> energy_history;  ///< minimised energy at each accepted iterate
};

struct StateProblem {
    double p = 2.0;
    GridFunction f;
    MeasureField beta;
    DomainMask dirichlet;

    /// Dirichlet set = complement of D; beta = 0 unless given.
    static StateProblem on_domain(const DomainMask& domain, GridFunction f, double p,
                                  std::optional<MeasureField> beta = std::nullopt) {
        StateProblem prob;
        prob.p = p;
        prob.beta = beta ? std::move(*beta) : MeasureField(domain.grid, 0.0);
        prob.f = std::move(f);
        prob.dirichlet = complement(domain);
        return prob;
    }

    void validate() const {
        if (!(p > 1.0) || !std::isfinite(p)) throw std::invalid_argument("state: p must be > 1");
        require_same_grid(f.grid, beta.grid, "state problem (f, beta)");
        require_same_grid(f.grid, dirichlet.grid, "state problem (f, dirichlet)");
        if (!f.all_finite()) throw std::invalid_argument("state: right-hand side contains NaN/inf");
        beta.validate();
    }
};

struct StateSolution {
    GridFunction u;
    SolveReport report;
};

namespace detail {

using SparseMatrix = Eigen::SparseMatrix<double>;
inline constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

/// Nodes where the state is forced to zero: Dirichlet set, infinite beta, grid edge.
inline std::vector<std::uint8_t> constrained_nodes(const StateProblem& prob) {
    const Grid& g = prob.f.grid;
    std::vector<std::uint8_t> fixed(g.size(), 0);
    for (std::size_t k = 0; k < g.size(); ++k)
        fixed[k] = (prob.dirichlet[k] || prob.beta.is_inf(k) || g.on_boundary(k)) ? 1 : 0;
    return fixed;
}

inline double data_scale(const GridFunction& f) { return std::max(1.0, f.sup_norm()); }

/// Discrete p-energy with optional gradient regularisation and its derivatives.
class PEnergy {
public:
    struct Corner {
        std::size_t x0, x1, y0, y1;  // y0 == y1 == kNone in 1D
    };

    PEnergy(const StateProblem& prob, double eps)
        : grid_(prob.f.grid), p_(prob.p), eps_(eps), weights_(node_weights(grid_)),
          fixed_(constrained_nodes(prob)), f_(prob.f.values), beta_(grid_.size(), 0.0) {
        for (std::size_t k = 0; k < grid_.size(); ++k)
            beta_[k] = prob.beta.is_inf(k) ? 0.0 : prob.beta.beta[k];
        hx_ = grid_.h(0);
        hy_ = grid_.dim() == 2 ? grid_.h(1) : 1.0;
        corner_weight_ = grid_.cell_volume() / (grid_.dim() == 1 ? 1.0 : 4.0);
        build_corners();
        column_.assign(grid_.size(), kNone);
        for (std::size_t k = 0; k < grid_.size(); ++k)
            if (!fixed_[k]) {
                column_[k] = free_.size();
                free_.push_back(k);
            }
    }

    const Grid& grid() const { return grid_; }
    double p() const { return p_; }
    double eps() const { return eps_; }
    const std::vector<double>& weights() const { return weights_; }
    const std::vector<std::size_t>& free_nodes() const { return free_; }
    const std::vector<std::size_t>& column() const { return column_; }
    bool fixed(std::size_t k) const { return fixed_[k] != 0; }
    const std::vector<Corner>& corners() const { return corners_; }
    double corner_weight() const { return corner_weight_; }

    Point corner_gradient(const Corner& c, std::span<const double> u) const {
        Point g{(u[c.x1] - u[c.x0]) / hx_, 0.0};
        if (c.y0 != kNone) g[1] = (u[c.y1] - u[c.y0]) / hy_;
        return g;
    }

    struct Value {
        double energy;
        double magnitude;  // sum of absolute term contributions (roundoff scale)
    };

    /// Energy with regularisation eps (eps = 0 gives the exact discrete energy).
    Value value(std::span<const double> u, double eps) const {
        const double epsp = std::pow(eps, p_);
        const double eps2 = eps * eps;
        double grad_term = 0.0;
        for (const auto& c : corners_) {
            const Point g = corner_gradient(c, u);
            const double s = g[0] * g[0] + g[1] * g[1];
            grad_term += std::pow(s + eps2, 0.5 * p_) - epsp;
        }
        grad_term *= corner_weight_ / p_;
        double beta_term = 0.0, load = 0.0, load_abs = 0.0;
        for (std::size_t k = 0; k < u.size(); ++k) {
            if (beta_[k] > 0.0)
                beta_term += weights_[k] * beta_[k] * (std::pow(u[k] * u[k] + eps2, 0.5 * p_) - epsp);
            load += weights_[k] * f_[k] * u[k];
            load_abs += std::abs(weights_[k] * f_[k] * u[k]);
        }
        beta_term /= p_;
        return {grad_term + beta_term - load, grad_term + beta_term + load_abs};
    }

    /// Weak-form gradient dE/du_k (zero on constrained nodes).
    void gradient(std::span<const double> u, double eps, std::vector<double>& out) const {
        out.assign(u.size(), 0.0);
        const double eps2 = eps * eps;
        for (const auto& c : corners_) {
            const Point g = corner_gradient(c, u);
            const double a = flux_coefficient(g[0] * g[0] + g[1] * g[1] + eps2) * corner_weight_;
            const double fx = a * g[0] / hx_;
            out[c.x1] += fx;
            out[c.x0] -= fx;
            if (c.y0 != kNone) {
                const double fy = a * g[1] / hy_;
                out[c.y1] += fy;
                out[c.y0] -= fy;
            }
        }
        for (std::size_t k = 0; k < u.size(); ++k) {
            if (fixed_[k]) {
                out[k] = 0.0;
                continue;
            }
            if (beta_[k] > 0.0)
                out[k] += weights_[k] * beta_[k] * flux_coefficient(u[k] * u[k] + eps2) * u[k];
            out[k] -= weights_[k] * f_[k];
        }
    }

    /// max_k |dE/du_k| / w_k over free nodes.
    double strong_residual(const std::vector<double>& grad) const {
        double r = 0.0;
        for (std::size_t k : free_) r = std::max(r, std::abs(grad[k]) / weights_[k]);
        return r;
    }

    enum class Operator { Metric, Hessian };

    /// Frozen-coefficient (lagged diffusivity) metric or full Hessian of the
    /// regularised energy at u, restricted to free nodes. Both share one
    /// sparsity pattern.
    SparseMatrix assemble(std::span<const double> u, Operator op) const {
        const double eps2 = eps_ * eps_;
        std::vector<Eigen::Triplet<double>> trip;
        trip.reserve(corners_.size() * (grid_.dim() == 1 ? 4 : 16) + free_.size());
        for (const auto& c : corners_) {
            const Point g = corner_gradient(c, u);
            const double s = g[0] * g[0] + g[1] * g[1] + eps2;
            const double a = corner_weight_ * flux_coefficient(s);
            const double b =
                op == Operator::Hessian ? corner_weight_ * (p_ - 2.0) * std::pow(s, 0.5 * p_ - 2.0) : 0.0;
            const std::size_t nodes[4] = {c.x0, c.x1, c.y0, c.y1};
            const double dx[4] = {-1.0 / hx_, 1.0 / hx_, 0.0, 0.0};
            const double dy[4] = {0.0, 0.0, -1.0 / hy_, 1.0 / hy_};
            const int slots = c.y0 == kNone ? 2 : 4;
            double v[4];
            for (int s_ = 0; s_ < slots; ++s_) v[s_] = g[0] * dx[s_] + g[1] * dy[s_];
            for (int i = 0; i < slots; ++i) {
                const auto ci = column_[nodes[i]];
                if (ci == kNone) continue;
                for (int j = 0; j < slots; ++j) {
                    const auto cj = column_[nodes[j]];
                    if (cj == kNone) continue;
                    const double val = a * (dx[i] * dx[j] + dy[i] * dy[j]) + b * v[i] * v[j];
                    trip.emplace_back(static_cast<int>(ci), static_cast<int>(cj), val);
                }
            }
        }
        for (std::size_t col = 0; col < free_.size(); ++col) {
            const std::size_t k = free_[col];
            double d = 0.0;
            if (beta_[k] > 0.0) {
                const double s = u[k] * u[k] + eps2;
                d = op == Operator::Metric
                        ? weights_[k] * beta_[k] * flux_coefficient(s)
                        : weights_[k] * beta_[k] * std::pow(s, 0.5 * p_ - 2.0) * ((p_ - 1.0) * u[k] * u[k] + eps2);
            }
            trip.emplace_back(static_cast<int>(col), static_cast<int>(col), d);
        }
        const auto nfree = static_cast<int>(free_.size());
        SparseMatrix m(nfree, nfree);
        m.setFromTriplets(trip.begin(), trip.end());
        return m;
    }

private:
    // |g|^{p-2} evaluated at s = |g|^2 (+eps^2); zero flux where s == 0.
    double flux_coefficient(double s) const { return s > 0.0 ? std::pow(s, 0.5 * p_ - 1.0) : 0.0; }

    void build_corners() {
        if (grid_.dim() == 1) {
            for (std::size_t c = 0; c < grid_.cell_count(); ++c) corners_.push_back({c, c + 1, kNone, kNone});
            return;
        }
        corners_.reserve(4 * grid_.cell_count());
        for (std::size_t c = 0; c < grid_.cell_count(); ++c) {
            const auto k = grid_.cell_nodes(c);  // 00, 10, 01, 11
            corners_.push_back({k[0], k[1], k[0], k[2]});
            corners_.push_back({k[0], k[1], k[1], k[3]});
            corners_.push_back({k[2], k[3], k[0], k[2]});
            corners_.push_back({k[2], k[3], k[1], k[3]});
        }
    }

    Grid grid_;
    double p_;
    double eps_;
    double hx_ = 1.0, hy_ = 1.0, corner_weight_ = 1.0;
    std::vector<double> weights_;
    std::vector<std::uint8_t> fixed_;
    std::vector<double> f_;
    std::vector<double> beta_;
    std::vector<Corner> corners_;
    std::vector<std::size_t> free_;
    std::vector<std::size_t> column_;
};

inline double resolve_eps(const StateProblem& prob, const SolveOptions& opts) {
    return opts.eps_reg > 0.0 ? opts.eps_reg : 1e-6 * data_scale(prob.f);
}
inline double resolve_tolerance(const StateProblem& prob, const SolveOptions& opts) {
    return opts.tolerance > 0.0 ? opts.tolerance : 1e-8 * data_scale(prob.f);
}

}  // namespace detail

/// Exact (unregularised) discrete energy. u must vanish on constrained nodes.
inline double energy(const GridFunction& u, const StateProblem& prob) {
    prob.validate();
    require_same_grid(u.grid, prob.f.grid, "energy");
    const auto fixed = detail::constrained_nodes(prob);
    for (std::size_t k = 0; k < u.size(); ++k) {
        if (!fixed[k] || u[k] == 0.0) continue;
        if (prob.beta.is_inf(k))
            throw std::invalid_argument("energy: u must vanish where beta is infinite");
        throw std::invalid_argument("energy: u must vanish on Dirichlet nodes");
    }
    const detail::PEnergy op(prob, 0.0);
    return op.value(u.values, 0.0).energy;
}

/// Minimise the regularised energy by gradient descent in the lagged-diffusivity
/// metric: direction -P(u)^{-1} grad E(u), Barzilai-Borwein step length measured
/// in that metric, Armijo backtracking on E.
inline StateSolution solve_state(const StateProblem& prob, const SolveOptions& opts = {}) {
    prob.validate();
    const double eps = detail::resolve_eps(prob, opts);
    const double tol = detail::resolve_tolerance(prob, opts);
    const detail::PEnergy op(prob, eps);
    const Grid& g = prob.f.grid;
    const auto& free = op.free_nodes();

    StateSolution out{GridFunction(g, 0.0), {}};
    SolveReport& rep = out.report;
    rep.eps_reg = eps;
    rep.tolerance = tol;

    std::vector<double> u(g.size(), 0.0);
    if (opts.initial_guess) {
        if (opts.initial_guess->size() != g.size())
            throw std::invalid_argument("solve_state: initial guess has wrong size");
        for (std::size_t k : free) u[k] = (*opts.initial_guess)[k];
    }

    std::vector<double> grad, grad_prev, trial(g.size()), grad_trial;
    std::vector<double> u_prev;
    op.gradient(u, eps, grad);
    auto val = op.value(u, eps);
    rep.energy_history.push_back(val.energy);

    Eigen::SimplicialLDLT<detail::SparseMatrix> ldlt;
    bool pattern_ready = false;
    const auto nfree = static_cast<Eigen::Index>(free.size());
    Eigen::VectorXd rhs(nfree), dir(nfree);

    int it = 0;
    double residual = op.strong_residual(grad);
    while (!free.empty() && residual > tol && it < opts.max_iterations) {
        const auto metric = op.assemble(u, detail::PEnergy::Operator::Metric);
        if (!pattern_ready) {
            ldlt.analyzePattern(metric);
            pattern_ready = true;
        }
        ldlt.factorize(metric);
        if (ldlt.info() != Eigen::Success) break;
        for (Eigen::Index i = 0; i < nfree; ++i) rhs[i] = -grad[free[i]];
        dir = ldlt.solve(rhs);

        double slope = 0.0;
        for (Eigen::Index i = 0; i < nfree; ++i) slope += grad[free[i]] * dir[i];
        if (!(slope < 0.0)) break;

        // BB1 step in the metric: (s' P s) / (s' y); the lagged-diffusivity step is 1.
        double step = 1.0;
        if (!u_prev.empty()) {
            Eigen::VectorXd s(nfree);
            double sy = 0.0;
            for (Eigen::Index i = 0; i < nfree; ++i) {
                const auto k = free[i];
                s[i] = u[k] - u_prev[k];
                sy += s[i] * (grad[k] - grad_prev[k]);
            }
            const double sps = s.dot(metric * s);
            if (sy > 0.0 && sps > 0.0) step = std::clamp(sps / sy, 1e-3, 1e3);
        }

        const double slack = 1e-14 * (val.magnitude + std::abs(val.energy));
        bool accepted = false;
        for (int bt = 0; bt < 60; ++bt) {
            trial = u;
            for (Eigen::Index i = 0; i < nfree; ++i) trial[free[i]] += step * dir[i];
            const auto tv = op.value(trial, eps);
            if (tv.energy <= val.energy + 1e-4 * step * slope) {
                accepted = true;
                val = tv;
                break;
            }
            if (std::abs(step * slope) < slack && tv.energy <= val.energy + slack) {
                // Decrease is below roundoff: accept if the residual still improves.
                op.gradient(trial, eps, grad_trial);
                if (op.strong_residual(grad_trial) < residual) {
                    accepted = true;
                    val = tv;
                    break;
                }
            }
            step *= 0.5;
        }
        if (!accepted) break;

        u_prev = u;
        grad_prev = grad;
        u = trial;
        op.gradient(u, eps, grad);
        residual = op.strong_residual(grad);
        rep.energy_history.push_back(val.energy);
        ++it;
    }

    rep.iterations = it;
    rep.residual = residual;
    rep.converged = residual <= tol;
    std::vector<double> exact_grad;
    op.gradient(u, 0.0, exact_grad);
    rep.unregularized_residual = op.strong_residual(exact_grad);
    rep.final_energy = op.value(u, 0.0).energy;
    out.u.values = std::move(u);
    return out;
}

/// State on a set: beta = 0, u = 0 off omega.
inline StateSolution solve_on_set(const DomainMask& omega, const GridFunction& f, double p,
                                  const SolveOptions& opts = {}) {
    require_same_grid(omega.grid, f.grid, "solve_on_set");
    return solve_state(StateProblem::on_domain(omega, f, p), opts);
}

/// Solve H z = rhs where H is the Hessian of the regularised energy at u
/// (restricted to free nodes; z = 0 on constrained nodes).
inline std::vector<double> solve_linearized(const StateProblem& prob, const GridFunction& u,
                                            std::span<const double> rhs, double eps) {
    prob.validate();
    const detail::PEnergy op(prob, eps);
    const auto& free = op.free_nodes();
    std::vector<double> z(u.size(), 0.0);
    if (free.empty()) return z;
    const auto h = op.assemble(u.values, detail::PEnergy::Operator::Hessian);
    Eigen::SimplicialLDLT<detail::SparseMatrix> ldlt(h);
    if (ldlt.info() != Eigen::Success) throw std::runtime_error("linearised solve: factorisation failed");
    Eigen::VectorXd b(static_cast<Eigen::Index>(free.size()));
    for (std::size_t i = 0; i < free.size(); ++i) b[static_cast<Eigen::Index>(i)] = rhs[free[i]];
    const Eigen::VectorXd x = ldlt.solve(b);
    for (std::size_t i = 0; i < free.size(); ++i) z[free[i]] = x[static_cast<Eigen::Index>(i)];
    return z;
}

}  // namespace pshape
