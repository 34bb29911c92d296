#pragma once

// Run configurations and the command dispatcher behind the `pshape` tool.
//
// A config is line-oriented `key = value` text with dotted keys; `#` starts a
// comment. Every command writes its artifacts plus manifest.json into
// output.dir. Exit status: 0 ok, 2 invalid config, 3 solver failure or
// non-convergence.

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <limits>
#include <map>
#include <numbers>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "capmeasure.hpp"
#include "geometry.hpp"
#include "grid.hpp"
#include "infcase.hpp"
#include "io.hpp"
#include "measure_field.hpp"
#include "optimizer.hpp"
#include "state.hpp"

namespace pshape::cli {

inline constexpr const char* kVersion = "0.1.0";

inline const char* usage() {
    return "usage: pshape <command> [--config FILE] [--set key=value ...] [--out DIR] [inputs...]\n"
           "commands:\n"
           "  solve-state        state solve on the configured domain (u.csv, report.json)\n"
           "  optimize-fb        free boundary minimisation for f = g (u.csv, omega.csv)\n"
           "  optimize-control   relaxed density optimisation (u.csv, omega.csv, beta.csv)\n"
           "  gamma-distance     L^p distance of torsion states: pshape gamma-distance MU.csv NU.csv\n"
           "  perimeter-diag     band and level-set diagnostic (diag.csv)\n"
           "  inf-lens           p = infinity lens check: pshape inf-lens --m 2\n"
           "  check-hypotheses   which existence/regularity statements apply\n";
}

/// Malformed or out-of-range configuration (exit 2).
struct ConfigError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

using ConfigMap = std::map<std::string, std::string>;

/// Parses `key = value` lines. Later keys override earlier ones.
inline ConfigMap parse_config_text(const std::string& text, ConfigMap into = {}) {
    std::istringstream is(text);
    std::string line;
    int lineno = 0;
    auto trim = [](std::string s) {
        s.erase(0, s.find_first_not_of(" \t\r"));
        s.erase(s.find_last_not_of(" \t\r") + 1);
        return s;
    };
    while (std::getline(is, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
        const auto key = trim(line.substr(0, eq));
        if (key.empty()) throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
        into[key] = trim(line.substr(eq + 1));
    }
    return into;
}

struct DataSpec {
    std::string kind = "constant";  ///< constant | radial | csv
    double value = 1.0;
    std::vector<double> coeffs;     ///< radial: sum_i coeffs[i] |x - center|^i
    Point center{0.0, 0.0};
    std::string path;
};

struct RunConfig {
    std::string command;
    int dim = 2;
    int n = 65;
    bool n_given = false;
    double lo = 0.0;
    double hi = 1.0;
    std::string domain_kind = "box";  ///< box | disc
    Point domain_center{0.5, 0.5};
    double domain_radius = 0.5;
    double p = 2.0;
    double q = std::numeric_limits<double>::infinity();
    double ell = std::numeric_limits<double>::infinity();
    double lambda = 0.0;
    double m = 0.0;
    DataSpec f;
    DataSpec g;
    SolveOptions solve;
    int control_iterations = 300;
    double filter_radius = 1.5;
    std::vector<double> epsilons;
    std::string u_path;
    std::string mu_path;
    std::string nu_path;
    std::string out_dir = ".";
    bool pgm = false;
    ConfigMap raw;
};

namespace detail {

inline double to_real(const ConfigMap& c, const std::string& key) {
    try {
        return io::detail::parse_real(c.at(key));
    } catch (const std::exception&) {
        throw ConfigError(key + ": expected a number, got '" + c.at(key) + "'");
    }
}

inline int to_int(const ConfigMap& c, const std::string& key) {
    const double v = to_real(c, key);
    if (v != std::floor(v) || std::abs(v) > 1e9) throw ConfigError(key + ": expected an integer");
    return static_cast<int>(v);
}

inline std::vector<double> to_list(const ConfigMap& c, const std::string& key) {
    std::string s = c.at(key);
    for (char& ch : s)
        if (ch == ',') ch = ' ';
    std::istringstream is(s);
    std::vector<double> out;
    std::string tok;
    while (is >> tok) {
        try {
            out.push_back(io::detail::parse_real(tok));
        } catch (const std::exception&) {
            throw ConfigError(key + ": bad list entry '" + tok + "'");
        }
    }
    return out;
}

inline Point to_point(const ConfigMap& c, const std::string& key) {
    const auto v = to_list(c, key);
    if (v.empty() || v.size() > 2) throw ConfigError(key + ": expected one or two coordinates");
    return {v[0], v.size() > 1 ? v[1] : 0.0};
}

inline void read_data(const ConfigMap& c, const std::string& prefix, DataSpec& d) {
    if (c.count(prefix + ".kind")) d.kind = c.at(prefix + ".kind");
    if (d.kind != "constant" && d.kind != "radial" && d.kind != "csv")
        throw ConfigError(prefix + ".kind must be constant, radial or csv");
    if (c.count(prefix + ".value")) d.value = to_real(c, prefix + ".value");
    if (c.count(prefix + ".coeffs")) d.coeffs = to_list(c, prefix + ".coeffs");
    if (c.count(prefix + ".center")) d.center = to_point(c, prefix + ".center");
    if (c.count(prefix + ".path")) d.path = c.at(prefix + ".path");
    if (d.kind == "radial" && d.coeffs.empty()) throw ConfigError(prefix + ".coeffs required for radial data");
    if (d.kind == "csv" && d.path.empty()) throw ConfigError(prefix + ".path required for csv data");
}

}  // namespace detail

inline const std::set<std::string>& known_keys() {
    static const std::set<std::string> keys = {
        "command", "grid.dim", "grid.n", "grid.lo", "grid.hi", "domain.kind", "domain.center", "domain.radius",
        "p", "q", "ell", "lambda", "m",
        "f.kind", "f.value", "f.coeffs", "f.center", "f.path",
        "g.kind", "g.value", "g.coeffs", "g.center", "g.path",
        "solver.tolerance", "solver.eps_reg", "solver.max_iterations",
        "control.max_iterations", "control.filter_radius",
        "diag.epsilons", "diag.u", "gamma.mu", "gamma.nu", "output.dir", "output.pgm"};
    return keys;
}

inline RunConfig config_from_map(const ConfigMap& c) {
    using namespace detail;
    for (const auto& [k, v] : c)
        if (!known_keys().count(k)) throw ConfigError("unknown config key '" + k + "'");
    RunConfig r;
    r.raw = c;
    if (c.count("command")) r.command = c.at("command");
    if (c.count("grid.dim")) r.dim = to_int(c, "grid.dim");
    if (r.dim != 1 && r.dim != 2) throw ConfigError("grid.dim must be 1 or 2");
    if (c.count("grid.n")) {
        r.n = to_int(c, "grid.n");
        r.n_given = true;
    }
    if (r.n < 3) throw ConfigError("grid.n must be >= 3");
    if (c.count("grid.lo")) r.lo = to_real(c, "grid.lo");
    if (c.count("grid.hi")) r.hi = to_real(c, "grid.hi");
    if (!(r.hi > r.lo)) throw ConfigError("grid.hi must exceed grid.lo");
    const double mid = 0.5 * (r.lo + r.hi);
    r.domain_center = {mid, r.dim == 2 ? mid : 0.0};
    if (c.count("domain.kind")) r.domain_kind = c.at("domain.kind");
    if (r.domain_kind != "box" && r.domain_kind != "disc") throw ConfigError("domain.kind must be box or disc");
    if (c.count("domain.center")) r.domain_center = to_point(c, "domain.center");
    r.domain_radius = 0.5 * (r.hi - r.lo);
    if (c.count("domain.radius")) r.domain_radius = to_real(c, "domain.radius");
    if (!(r.domain_radius > 0.0)) throw ConfigError("domain.radius must be > 0");
    if (c.count("p")) r.p = to_real(c, "p");
    if (!(r.p > 1.0) || !std::isfinite(r.p)) throw ConfigError("p must be a finite number > 1");
    if (c.count("q")) r.q = to_real(c, "q");
    if (c.count("ell")) r.ell = to_real(c, "ell");
    if (c.count("lambda")) r.lambda = to_real(c, "lambda");
    if (!(r.lambda >= 0.0)) throw ConfigError("lambda must be >= 0");
    if (c.count("m")) r.m = to_real(c, "m");
    r.f.center = r.domain_center;
    r.g.center = r.domain_center;
    read_data(c, "f", r.f);
    read_data(c, "g", r.g);
    if (c.count("solver.tolerance")) r.solve.tolerance = to_real(c, "solver.tolerance");
    if (c.count("solver.eps_reg")) r.solve.eps_reg = to_real(c, "solver.eps_reg");
    if (c.count("solver.max_iterations")) r.solve.max_iterations = to_int(c, "solver.max_iterations");
    if (r.solve.max_iterations < 1) throw ConfigError("solver.max_iterations must be >= 1");
    if (c.count("control.max_iterations")) r.control_iterations = to_int(c, "control.max_iterations");
    if (c.count("control.filter_radius")) r.filter_radius = to_real(c, "control.filter_radius");
    if (!(r.filter_radius >= 1.0)) throw ConfigError("control.filter_radius must be >= 1");
    if (c.count("diag.epsilons")) r.epsilons = to_list(c, "diag.epsilons");
    if (c.count("diag.u")) r.u_path = c.at("diag.u");
    if (c.count("gamma.mu")) r.mu_path = c.at("gamma.mu");
    if (c.count("gamma.nu")) r.nu_path = c.at("gamma.nu");
    if (c.count("output.dir")) r.out_dir = c.at("output.dir");
    if (c.count("output.pgm")) r.pgm = c.at("output.pgm") == "true" || c.at("output.pgm") == "1";
    for (const auto* path : {&r.f.path, &r.g.path, &r.u_path, &r.mu_path, &r.nu_path})
        if (!path->empty() && !std::filesystem::exists(*path)) throw ConfigError("file not found: " + *path);
    return r;
}

namespace detail {

using Json = nlohmann::ordered_json;

/// Finite values rounded to 9 significant digits; others as strings.
inline Json num(double v) {
    if (std::isfinite(v)) return io::round9(v);
    return io::format_real(v);
}

/// Serialises with every float in %.9g form.
inline std::string dump(const Json& j, int indent = 2, int depth = 0) {
    const std::string pad = indent > 0 ? "\n" + std::string(static_cast<std::size_t>(indent * (depth + 1)), ' ') : "";
    const std::string close = indent > 0 ? "\n" + std::string(static_cast<std::size_t>(indent * depth), ' ') : "";
    const std::string colon = indent > 0 ? ": " : ":";
    if (j.is_number_float()) return io::format_real(j.get<double>());
    if (j.is_object()) {
        if (j.empty()) return "{}";
        std::string s = "{";
        bool first = true;
        for (const auto& [k, v] : j.items()) {
            s += (first ? "" : ",") + pad + Json(k).dump() + colon + dump(v, indent, depth + 1);
            first = false;
        }
        return s + close + "}";
    }
    if (j.is_array()) {
        if (j.empty()) return "[]";
        std::string s = "[";
        for (std::size_t i = 0; i < j.size(); ++i) s += (i ? "," : "") + pad + dump(j[i], indent, depth + 1);
        return s + close + "]";
    }
    return j.dump();
}

inline Json num_list(const std::vector<double>& v) {
    Json a = Json::array();
    for (double x : v) a.push_back(num(x));
    return a;
}

inline Grid make_grid(const RunConfig& c) {
    return c.dim == 1 ? build_grid_1d(c.lo, c.hi, c.n) : build_grid_2d({c.lo, c.hi}, {c.lo, c.hi}, c.n, c.n);
}

inline DomainMask make_domain(const RunConfig& c, const Grid& g) {
    return c.domain_kind == "box" ? full_mask(g) : disc_mask(g, c.domain_center, c.domain_radius);
}

inline GridFunction make_data(const DataSpec& d, const Grid& g, const char* name) {
    if (d.kind == "constant") return GridFunction(g, d.value);
    if (d.kind == "radial")
        return sample(g, [&](const Point& x) {
            const double r = std::hypot(x[0] - d.center[0], x[1] - d.center[1]);
            double v = 0.0, rp = 1.0;
            for (double a : d.coeffs) {
                v += a * rp;
                rp *= r;
            }
            return v;
        });
    auto u = io::read_csv(d.path);
    if (!(u.grid == g)) throw ConfigError(std::string(name) + ".path: CSV grid does not match the configured grid");
    return u;
}

inline Json report_json(const SolveReport& r) {
    Json j;
    j["iterations"] = r.iterations;
    j["final_energy"] = num(r.final_energy);
    j["residual"] = num(r.residual);
    j["unregularized_residual"] = num(r.unregularized_residual);
    j["tolerance"] = num(r.tolerance);
    j["eps_reg"] = num(r.eps_reg);
    j["converged"] = r.converged;
    return j;
}

inline Json hypotheses_json(const HypothesisReport& h) {
    Json j;
    j["existence_open_p_gt_d"] = h.existence_open_p_gt_d;
    j["existence_quasiopen"] = h.existence_quasiopen;
    j["openness"] = h.openness;
    j["finite_perimeter"] = h.finite_perimeter;
    j["c_best"] = num(h.c_best);
    j["reasons"] = h.reasons;
    return j;
}

struct Outcome {
    int exit_code = 0;
    Json report;
    std::vector<std::string> files;
    std::optional<Json> stdout_json;
};

class Runner {
public:
    explicit Runner(const RunConfig& c) : c_(c) {}

    Outcome dispatch() {
        const auto& cmd = c_.command;
        if (cmd == "solve-state") return solve_state_cmd();
        if (cmd == "optimize-fb") return optimize_fb_cmd();
        if (cmd == "optimize-control") return optimize_control_cmd();
        if (cmd == "gamma-distance") return gamma_distance_cmd();
        if (cmd == "perimeter-diag") return perimeter_diag_cmd();
        if (cmd == "inf-lens") return inf_lens_cmd();
        if (cmd == "check-hypotheses") return check_hypotheses_cmd();
        throw ConfigError(cmd.empty() ? "no command given" : "unknown command '" + cmd + "'");
    }

private:
    std::string path(const std::string& name) const { return (std::filesystem::path(c_.out_dir) / name).string(); }

    void write(Outcome& o, const std::string& name, const GridFunction& u) {
        io::write_csv(path(name), u);
        o.files.push_back(name);
        if (c_.pgm && u.grid.dim() == 2) {
            const auto pgm = name.substr(0, name.rfind('.')) + ".pgm";
            io::write_pgm(path(pgm), u);
            o.files.push_back(pgm);
        }
    }
    void write(Outcome& o, const std::string& name, const DomainMask& m) {
        GridFunction v(m.grid, 0.0);
        for (std::size_t k = 0; k < m.size(); ++k) v[k] = m[k] ? 1.0 : 0.0;
        write(o, name, v);
    }

    HypothesisReport hypotheses(const GridFunction& f, const GridFunction& g) const {
        CostSpec cost{g, c_.lambda, c_.p, c_.q, c_.ell, c_.m};
        return check_hypotheses(f, cost, c_.dim);
    }

    Outcome solve_state_cmd() {
        const Grid grid = make_grid(c_);
        const auto domain = make_domain(c_, grid);
        const auto f = make_data(c_.f, grid, "f");
        const auto sol = solve_state(StateProblem::on_domain(domain, f, c_.p), c_.solve);
        Outcome o;
        write(o, "u.csv", sol.u);
        o.report = report_json(sol.report);
        o.report["max_u"] = num(sol.u.max());
        o.exit_code = sol.report.converged ? 0 : 3;
        return o;
    }

    FreeBoundaryResult run_fb(const GridFunction& f, const DomainMask& domain) const {
        FreeBoundaryOptions opts;
        opts.solve = c_.solve;
        return free_boundary_minimize(f, c_.p, (c_.p - 1.0) * c_.lambda / c_.p, domain, opts);
    }

    Outcome optimize_fb_cmd() {
        const Grid grid = make_grid(c_);
        const auto domain = make_domain(c_, grid);
        const auto f = make_data(c_.f, grid, "f");
        const auto res = run_fb(f, domain);
        Outcome o;
        write(o, "u.csv", res.u);
        write(o, "omega.csv", res.omega);
        o.report = report_json(res.report);
        o.report["lambda"] = num(c_.lambda);
        o.report["Lambda"] = num((c_.p - 1.0) * c_.lambda / c_.p);
        o.report["objective"] = num(res.objective);
        o.report["cost"] = num(pshape::detail::model_cost(res.u, f, c_.lambda, res.omega));
        o.report["measure_omega"] = num(measure(res.omega));
        o.report["objective_history"] = num_list(res.objective_history);
        o.report["hypotheses"] = hypotheses_json(hypotheses(f, f));
        o.exit_code = res.report.converged ? 0 : 3;
        return o;
    }

    Outcome optimize_control_cmd() {
        const Grid grid = make_grid(c_);
        const auto domain = make_domain(c_, grid);
        const auto f = make_data(c_.f, grid, "f");
        const auto g = make_data(c_.g, grid, "g");
        const double dm = nodal_measure(domain);
        if (!(c_.m > 0.0) || c_.m > dm * (1.0 + 1e-9))
            throw ConfigError("m must lie in (0, |D|] with |D| = " + io::format_real(dm));
        ControlOptions opts;
        opts.solve = c_.solve;
        opts.max_iterations = c_.control_iterations;
        opts.filter_radius = c_.filter_radius;
        const auto res = control_optimize(f, CostSpec{g, c_.lambda, c_.p, c_.q, c_.ell, c_.m}, domain, opts);
        Outcome o;
        write(o, "u.csv", res.u);
        write(o, "omega.csv", res.omega);
        io::write_csv(path("beta.csv"), GridFunction(grid, res.beta.beta));
        o.files.push_back("beta.csv");
        o.report = report_json(res.report);
        o.report["status"] = res.status;
        o.report["objective"] = num(res.objective);
        o.report["measure_omega"] = num(measure(res.omega));
        o.report["volume_budget"] = num(res.volume_budget);
        o.report["objective_history"] = num_list(res.objective_history);
        o.report["hypotheses"] = hypotheses_json(hypotheses(f, g));
        o.exit_code = res.report.converged && res.status == "ok" ? 0 : 3;
        return o;
    }

    Outcome gamma_distance_cmd() {
        if (c_.mu_path.empty() || c_.nu_path.empty())
            throw ConfigError("gamma-distance needs two measure CSVs (gamma.mu, gamma.nu)");
        auto read_measure = [](const std::string& p) {
            const auto u = io::read_csv(p);
            try {
                return MeasureField(u.grid, u.values);
            } catch (const std::invalid_argument& e) {
                throw ConfigError(p + ": " + e.what());
            }
        };
        const auto mu = read_measure(c_.mu_path);
        const auto nu = read_measure(c_.nu_path);
        if (!(mu.grid == nu.grid)) throw ConfigError("gamma-distance: the two CSVs use different grids");
        const GridFunction f = c_.f.kind == "constant" ? GridFunction(mu.grid, c_.f.value)
                                                       : make_data(c_.f, mu.grid, "f");
        const double d = gamma_distance(mu, nu, c_.p, full_mask(mu.grid), c_.solve, f);
        Outcome o;
        o.report["d_gamma_p"] = num(d);
        o.report["p"] = num(c_.p);
        o.stdout_json = Json{{"d_gamma_p", num(d)}};
        return o;
    }

    Outcome perimeter_diag_cmd() {
        Outcome o;
        GridFunction u;
        if (!c_.u_path.empty()) {
            u = io::read_csv(c_.u_path);
        } else {
            const Grid grid = make_grid(c_);
            const auto res = run_fb(make_data(c_.f, grid, "f"), make_domain(c_, grid));
            u = res.u;
            o.report["state"] = report_json(res.report);
            if (!res.report.converged) o.exit_code = 3;
        }
        if (u.min() < 0.0) throw ConfigError("perimeter-diag: u must be >= 0");
        std::vector<double> eps = c_.epsilons;
        if (eps.empty()) {
            const double top = u.max();
            if (!(top > 0.0)) throw ConfigError("perimeter-diag: u vanishes identically; give diag.epsilons");
            for (int k = 0; k <= 4; ++k) eps.push_back(0.1 * top * std::ldexp(1.0, -k));
        }
        for (double e : eps)
            if (!(e > 0.0)) throw ConfigError("diag.epsilons must be positive");
        const auto t = finite_perimeter_diagnostic(u, c_.p, eps);
        std::string csv = "epsilon,measure_omega_eps,grad_p_integral,perimeter\n";
        for (const auto& r : t.rows)
            csv += io::format_real(r.epsilon) + "," + io::format_real(r.measure_omega_eps) + "," +
                   io::format_real(r.grad_p_integral) + "," + io::format_real(r.perimeter) + "\n";
        io::write_file(path("diag.csv"), csv);
        o.files.push_back("diag.csv");
        o.report["slope_measure"] = num(t.slope_measure);
        o.report["slope_grad_p"] = num(t.slope_grad_p);
        o.report["perimeter_ratio"] = num(t.perimeter_ratio);
        o.report["finite_perimeter"] = t.finite_perimeter;
        return o;
    }

    Outcome inf_lens_cmd() {
        if (!(c_.m > 0.0 && c_.m < std::numbers::pi)) throw ConfigError("inf-lens: m must lie in (0, pi)");
        const auto rep = verify_lens_optimality(c_.m, c_.n_given ? c_.n : 257);
        Outcome o;
        Json margins = Json::object();
        for (const auto& [name, v] : rep.margins) margins[name] = num(v);
        Json out;
        out["r_m"] = num(rep.r_m);
        out["winner"] = rep.winner;
        out["margins"] = margins;
        o.stdout_json = out;
        o.report = out;
        o.report["m"] = num(rep.m);
        o.report["h"] = num(rep.h);
        o.report["lens_value"] = num(rep.lens_value);
        Json cands = Json::array();
        for (const auto& cnd : rep.candidates)
            cands.push_back(Json{{"name", cnd.name},
                                 {"offset", num(cnd.offset)},
                                 {"radius", num(cnd.radius)},
                                 {"grid_area", num(cnd.grid_area)},
                                 {"value", num(cnd.value)}});
        o.report["candidates"] = cands;
        for (const auto& cnd : rep.candidates)
            if (cnd.name == rep.winner) write(o, "omega.csv", cnd.mask);
        return o;
    }

    Outcome check_hypotheses_cmd() {
        const Grid grid = make_grid(c_);
        const auto f = make_data(c_.f, grid, "f");
        const auto g = make_data(c_.g, grid, "g");
        Outcome o;
        o.report = hypotheses_json(hypotheses(f, g));
        o.report["d"] = c_.dim;
        o.report["p"] = num(c_.p);
        return o;
    }

    const RunConfig& c_;
};

}  // namespace detail

/// Runs one command. Human-readable errors go to `err`, JSON results (if
/// any) to `out`. manifest.json is written whenever the output directory
/// can be created.
inline int run(const ConfigMap& config, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    using detail::Json;
    const auto start = std::chrono::steady_clock::now();
    std::string out_dir = config.count("output.dir") ? config.at("output.dir") : ".";
    Json manifest;
    manifest["command"] = config.count("command") ? config.at("command") : "";
    manifest["config"] = Json(config);
    manifest["version"] = kVersion;
    manifest["eigen"] = std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                        std::to_string(EIGEN_MINOR_VERSION);
    manifest["threads"] = thread_cap();

    int code = 0;
    std::string status = "ok";
    detail::Outcome outcome;
    try {
        const RunConfig cfg = config_from_map(config);
        out_dir = cfg.out_dir;
        std::filesystem::create_directories(out_dir);
        outcome = detail::Runner(cfg).dispatch();
        code = outcome.exit_code;
        if (code == 3) status = "not converged";
        outcome.report["exit_code"] = code;
        io::write_file((std::filesystem::path(out_dir) / "report.json").string(), detail::dump(outcome.report) + "\n");
        outcome.files.push_back("report.json");
        if (outcome.stdout_json) out << detail::dump(*outcome.stdout_json, 0) << "\n";
    } catch (const std::invalid_argument& e) {
        // ConfigError and precondition failures inside the library alike.
        code = 2;
        status = std::string("invalid configuration: ") + e.what();
        err << "pshape: " << e.what() << "\n";
        if (dynamic_cast<const ConfigError*>(&e) && std::string(e.what()).find("command") != std::string::npos)
            err << usage();
    } catch (const std::exception& e) {
        code = 3;
        status = std::string("failure: ") + e.what();
        err << "pshape: " << e.what() << "\n";
    }
    manifest["status"] = status;
    manifest["exit_code"] = code;
    manifest["outputs"] = outcome.files;
    manifest["wall_time_s"] = detail::num(std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
    try {
        std::filesystem::create_directories(out_dir);
        io::write_file((std::filesystem::path(out_dir) / "manifest.json").string(), detail::dump(manifest) + "\n");
    } catch (const std::exception& e) {
        err << "pshape: could not write manifest: " << e.what() << "\n";
    }
    return code;
}

}  // namespace pshape::cli
