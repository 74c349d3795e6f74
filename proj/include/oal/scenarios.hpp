#ifndef OAL_SCENARIOS_HPP
#define OAL_SCENARIOS_HPP

// Configuration-driven experiment runner: named scenarios that produce CSV
// series, Wigner maps and a JSON run summary, plus the analytic-vs-numeric
// validation battery. This is the only layer that touches the filesystem.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "oal/analytic.hpp"
#include "oal/dynamics.hpp"
#include "oal/models.hpp"
#include "oal/observables.hpp"

namespace oal {

using Json = nlohmann::ordered_json;

inline const std::vector<std::string>& scenario_names() {
    static const std::vector<std::string> names = {"fig2", "fig3", "fig4",    "fig5",
                                                   "fig6", "fig7", "validate"};
    return names;
}

struct RunConfig {
    std::string scenario;
    LambdaParams params{0.9, 0.004, 0.1, 0.05, 0.1, 0.0};
    std::uint64_t master_seed = 0;
    std::optional<int> n_traj;
    std::optional<double> dt;
    std::optional<double> t_max;
    std::optional<int> fock_dim;
    std::string out_dir = ".";
    bool kappa_given = false;

    void validate() const {
        bool known = false;
        for (const auto& n : scenario_names()) known = known || n == scenario;
        if (!known) throw ConfigError("unknown scenario '" + scenario + "'");
        params.validate();
        if (n_traj && *n_traj < 1) throw ConfigError("n_traj must be >= 1");
        if (dt && !(*dt > 0.0)) throw ConfigError("dt must be > 0");
        if (t_max && !(*t_max > 0.0)) throw ConfigError("t_max must be > 0");
        if (fock_dim && *fock_dim < 2) throw ConfigError("fock_dim must be >= 2");
    }
};

namespace detail {

inline std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

inline double parse_double(const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        const double x = std::stod(v, &used);
        if (used != v.size()) throw ConfigError("");
        return x;
    } catch (...) {
        throw ConfigError("key '" + key + "': cannot parse number '" + v + "'");
    }
}

inline long long parse_int(const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        const long long x = std::stoll(v, &used);
        if (used != v.size()) throw ConfigError("");
        return x;
    } catch (...) {
        throw ConfigError("key '" + key + "': cannot parse integer '" + v + "'");
    }
}

inline std::uint64_t parse_u64(const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        const std::uint64_t x = std::stoull(v, &used);
        if (used != v.size()) throw ConfigError("");
        return x;
    } catch (...) {
        throw ConfigError("key '" + key + "': cannot parse unsigned integer '" + v + "'");
    }
}

/// Column label fragment for a steady-state photon number: 0.25 -> "n0p25".
inline std::string n_label(double n) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", n);
    std::string s = buf;
    for (auto& c : s)
        if (c == '.') c = 'p';
    return "n" + s;
}

inline std::string format_value(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

} // namespace detail

/// Flat `key = value` text with '#' comments; unknown keys are rejected.
inline RunConfig parse_config(std::istream& in) {
    RunConfig cfg;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string val = detail::trim(line.substr(eq + 1));
        if (key == "scenario")
            cfg.scenario = val;
        else if (key == "delta_prime")
            cfg.params.delta_prime = detail::parse_double(key, val);
        else if (key == "g")
            cfg.params.g = detail::parse_double(key, val);
        else if (key == "omega")
            cfg.params.omega = detail::parse_double(key, val);
        else if (key == "omega1p")
            cfg.params.omega1p = detail::parse_double(key, val);
        else if (key == "omega2p")
            cfg.params.omega2p = detail::parse_double(key, val);
        else if (key == "kappa") {
            cfg.params.kappa = detail::parse_double(key, val);
            cfg.kappa_given = true;
        } else if (key == "n_traj")
            cfg.n_traj = int(detail::parse_int(key, val));
        else if (key == "dt")
            cfg.dt = detail::parse_double(key, val);
        else if (key == "t_max")
            cfg.t_max = detail::parse_double(key, val);
        else if (key == "master_seed")
            cfg.master_seed = detail::parse_u64(key, val);
        else if (key == "fock_dim")
            cfg.fock_dim = int(detail::parse_int(key, val));
        else
            throw ConfigError("line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    }
    return cfg;
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    return parse_config(in);
}

struct ScenarioResult {
    Json summary;
    std::vector<std::string> files;
    bool passed = true;
};

namespace detail {

inline void write_series_csv(const std::string& path, const std::vector<double>& times,
                             const std::vector<std::string>& names,
                             const std::vector<std::vector<double>>& columns) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write " + path);
    out << "time";
    for (const auto& n : names) out << "," << n;
    out << "\n";
    for (std::size_t i = 0; i < times.size(); ++i) {
        out << format_value(times[i]);
        for (const auto& c : columns) out << "," << format_value(c[i]);
        out << "\n";
    }
}

inline void write_series_csv(const std::string& path, const ObservableSeries& s) {
    write_series_csv(path, s.times, s.names, s.columns);
}

/// Matrix with the x axis in the first row and the y axis in the first column;
/// the corner cell is zero.
inline void write_wigner_csv(const std::string& path, const WignerGrid& grid,
                             const Eigen::MatrixXd& w) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write " + path);
    out << format_value(0.0);
    for (int i = 0; i < grid.nx; ++i) out << "," << format_value(grid.x(i));
    out << "\n";
    for (int j = 0; j < grid.ny; ++j) {
        out << format_value(grid.y(j));
        for (int i = 0; i < grid.nx; ++i) out << "," << format_value(w(j, i));
        out << "\n";
    }
}

inline Json params_json(const RunConfig& cfg) {
    const auto e = effective_params(cfg.params);
    Json j;
    j["delta_prime"] = cfg.params.delta_prime;
    j["g"] = cfg.params.g;
    j["omega"] = cfg.params.omega;
    j["omega1p"] = cfg.params.omega1p;
    j["omega2p"] = cfg.params.omega2p;
    j["kappa"] = cfg.params.kappa;
    j["g_eff"] = e.g_eff;
    j["omega_eff"] = e.omega_eff;
    if (e.kappa > 0.0) {
        AnalyticSolution s{e.g_eff, e.kappa};
        const auto rates = decoherence_rates(s);
        j["steady_mean_photon"] = s.steady_mean_photon();
        j["t_f"] = inflection_time(s);
        j["gamma_d"] = rates.gamma_d;
        j["gamma_d_prime"] = rates.gamma_d_prime;
    }
    return j;
}

inline std::string out_path(const RunConfig& cfg, const std::string& name) {
    namespace fs = std::filesystem;
    fs::create_directories(cfg.out_dir);
    return (fs::path(cfg.out_dir) / name).string();
}

inline void finish(const RunConfig& cfg, ScenarioResult& res) {
    res.summary["passed"] = res.passed;
    res.summary["outputs"] = res.files;
    const std::string path = out_path(cfg, cfg.scenario + "_summary.json");
    std::ofstream out(path);
    out << res.summary.dump(2) << "\n";
    res.files.push_back(path);
}

/// Closed-form families over a kt grid; used by fig2/fig3/fig4.
template <typename F>
inline ScenarioResult analytic_family_scenario(const RunConfig& cfg,
                                               const std::vector<double>& n_ss,
                                               const std::string& prefix, F&& columns_for) {
    const double dt = cfg.dt.value_or(0.01);
    const double t_max = cfg.t_max.value_or(10.0);
    std::vector<double> times;
    for (double t = 0.0; t <= t_max + 0.5 * dt; t += dt) times.push_back(t);

    std::vector<std::string> names;
    std::vector<std::vector<double>> cols;
    for (double n : n_ss) {
        AnalyticSolution s{std::sqrt(n), 1.0}; // kappa = 1 units
        columns_for(s, n_label(n), times, names, cols);
    }

    ScenarioResult res;
    const std::string csv = out_path(cfg, cfg.scenario + "_series.csv");
    write_series_csv(csv, times, names, cols);
    res.files.push_back(csv);
    res.summary["scenario"] = cfg.scenario;
    res.summary["description"] = prefix;
    res.summary["steady_mean_photon_family"] = n_ss;
    res.summary["dt"] = dt;
    res.summary["t_max"] = t_max;
    finish(cfg, res);
    return res;
}

struct FullRunSetup {
    TruncatedSpace space;
    TimeDependentHamiltonian h;
    Matrix collapse;
    StateVector psi0;
    EffectiveParams eff;
};

inline FullRunSetup full_run_setup(const RunConfig& cfg, double t_max) {
    const auto eff = effective_params(cfg.params);
    const double alpha_max = cfg.params.kappa > 0.0
                                 ? 1.1 * eff.g_eff / cfg.params.kappa
                                 : 0.5 * eff.g_eff * t_max;
    const int fock = cfg.fock_dim.value_or(suggest_fock_dim(alpha_max));
    TruncatedSpace space(fock, 3);
    FullRunSetup s{space, full_hamiltonian_terms(cfg.params, space),
                   std::sqrt(cfg.params.kappa) * annihilation_op(space).matrix,
                   fock_state(space, 0, 0), eff};
    return s;
}

} // namespace detail

/// Conditional Mandel-Fano Q for both measurement branches.
inline ScenarioResult run_fig2(const RunConfig& cfg) {
    return detail::analytic_family_scenario(
        cfg, {1.0, 2.0, 5.0, 10.0}, "conditional Mandel-Fano Q per branch",
        [](const AnalyticSolution& s, const std::string& label,
           const std::vector<double>& times, std::vector<std::string>& names,
           std::vector<std::vector<double>>& cols) {
            std::vector<double> q1, q2;
            for (double t : times) {
                q1.push_back(mandel_q(s, t, Branch::Lower));
                q2.push_back(mandel_q(s, t, Branch::Upper));
            }
            names.push_back("q1_" + label);
            cols.push_back(std::move(q1));
            names.push_back("q2_" + label);
            cols.push_back(std::move(q2));
        });
}

/// Entropy of entanglement families.
inline ScenarioResult run_fig3(const RunConfig& cfg) {
    return detail::analytic_family_scenario(
        cfg, {0.25, 1.0, 5.0, 10.0, 20.0}, "von Neumann entropy of the reduced atom",
        [](const AnalyticSolution& s, const std::string& label,
           const std::vector<double>& times, std::vector<std::string>& names,
           std::vector<std::vector<double>>& cols) {
            std::vector<double> v;
            for (double t : times) v.push_back(entanglement_entropy(s, t));
            names.push_back("s_" + label);
            cols.push_back(std::move(v));
        });
}

/// Atomic inversion families with the decoherence landmarks in the summary.
inline ScenarioResult run_fig4(const RunConfig& cfg) {
    auto res = detail::analytic_family_scenario(
        cfg, {0.25, 0.5, 1.0, 5.0, 20.0}, "atomic population inversion",
        [](const AnalyticSolution& s, const std::string& label,
           const std::vector<double>& times, std::vector<std::string>& names,
           std::vector<std::vector<double>>& cols) {
            std::vector<double> v;
            for (double t : times) v.push_back(inversion(s, t));
            names.push_back("i_" + label);
            cols.push_back(std::move(v));
        });
    return res;
}

/// Hamiltonian (kappa = 0) dynamics of the full three-level model with the
/// closed-form effective curves appended for comparison.
inline ScenarioResult run_fig5(const RunConfig& cfg) {
    const double t_max = cfg.t_max.value_or(7160.0);
    const double dt = cfg.dt.value_or(0.02);
    auto setup = detail::full_run_setup(cfg, t_max);

    const int n_steps = int(std::llround(t_max / dt));
    const int stride = std::max(1, n_steps / 2000);
    TrajectoryConfig tc{1, cfg.master_seed, dt, t_max, stride, JumpRule::FirstOrder};
    Matrix zero = Matrix::Zero(setup.space.dim(), setup.space.dim());
    auto traj = mcwf_trajectory(setup.h, cfg.params.kappa > 0.0 ? setup.collapse : zero,
                                setup.psi0, tc, trajectory_seed(cfg.master_seed, 0));

    AnalyticSolution sol{setup.eff.g_eff, cfg.params.kappa};
    ObservableSeries s = std::move(traj.series);
    std::vector<double> tm, tp1, tp2;
    for (double t : s.times) {
        tm.push_back(mean_photon(sol, t));
        tp1.push_back(branch_probability(sol, t, Branch::Lower));
        tp2.push_back(branch_probability(sol, t, Branch::Upper));
    }
    s.names.insert(s.names.end(), {"theory_mean_photon", "theory_p1", "theory_p2"});
    s.columns.push_back(std::move(tm));
    s.columns.push_back(std::move(tp1));
    s.columns.push_back(std::move(tp2));

    ScenarioResult res;
    const std::string csv = detail::out_path(cfg, cfg.scenario + "_series.csv");
    detail::write_series_csv(csv, s);
    res.files.push_back(csv);
    res.summary["scenario"] = cfg.scenario;
    res.summary["params"] = detail::params_json(cfg);
    res.summary["dt"] = dt;
    res.summary["t_max"] = t_max;
    res.summary["fock_dim"] = setup.space.fock_dim;
    res.summary["final_mean_photon"] = s.col("mean_photon").back();
    res.summary["theory_final_mean_photon"] = mean_photon(sol, t_max);
    res.summary["max_p3"] = *std::max_element(s.col("p3").begin(), s.col("p3").end());
    detail::finish(cfg, res);
    return res;
}

/// fig5 evolution followed by an atomic measurement: Wigner maps of the two
/// conditional field states.
inline ScenarioResult run_fig6(const RunConfig& cfg) {
    const double t_max = cfg.t_max.value_or(7160.0);
    const double dt = cfg.dt.value_or(0.02);
    auto setup = detail::full_run_setup(cfg, t_max);
    TrajectoryConfig tc{1, cfg.master_seed, dt, t_max, 1 << 20, JumpRule::FirstOrder};
    Matrix zero = Matrix::Zero(setup.space.dim(), setup.space.dim());
    auto traj = mcwf_trajectory(setup.h, cfg.params.kappa > 0.0 ? setup.collapse : zero,
                                setup.psi0, tc, trajectory_seed(cfg.master_seed, 0));

    ScenarioResult res;
    res.summary["scenario"] = cfg.scenario;
    res.summary["params"] = detail::params_json(cfg);
    res.summary["dt"] = dt;
    res.summary["t_max"] = t_max;
    res.summary["fock_dim"] = setup.space.fock_dim;

    WignerGrid grid; // default [-4,4]^2 at 161x161
    Json branches = Json::array();
    for (int level : {0, 1}) {
        auto b = conditional_field_state(traj.final_state, level);
        auto w = wigner(b.field, grid);
        const std::string path = detail::out_path(
            cfg, cfg.scenario + "_wigner_branch" + std::to_string(level + 1) + ".csv");
        detail::write_wigner_csv(path, grid, w);
        res.files.push_back(path);
        Json bj;
        bj["branch"] = level + 1;
        bj["probability"] = b.probability;
        bj["wigner_min"] = w.minCoeff();
        bj["wigner_max"] = w.maxCoeff();
        branches.push_back(bj);
    }
    res.summary["branches"] = branches;
    detail::finish(cfg, res);
    return res;
}

/// Dissipative full-model ensemble run.
inline ScenarioResult run_fig7(const RunConfig& cfg) {
    RunConfig c = cfg;
    if (!c.kappa_given) {
        c.params.kappa = 0.00044;
        c.kappa_given = true;
    }
    const double t_max = c.t_max.value_or(18000.0);
    const double dt = c.dt.value_or(0.02);
    const int n_traj = c.n_traj.value_or(20);
    auto setup = detail::full_run_setup(c, t_max);

    const int n_steps = int(std::llround(t_max / dt));
    const int stride = std::max(1, n_steps / 2000);
    TrajectoryConfig tc{n_traj, c.master_seed, dt, t_max, stride, JumpRule::FirstOrder};
    auto ens = mcwf_ensemble(setup.h, setup.collapse, setup.psi0, tc);

    ScenarioResult res;
    const std::string csv = detail::out_path(cfg, cfg.scenario + "_series.csv");
    detail::write_series_csv(csv, ens.series);
    res.files.push_back(csv);

    // settled value: mean over the last fifth of the run
    const auto& n = ens.series.col("mean_photon");
    const std::size_t from = n.size() - n.size() / 5;
    double settled = 0.0;
    for (std::size_t i = from; i < n.size(); ++i) settled += n[i];
    settled /= double(n.size() - from);

    res.summary["scenario"] = cfg.scenario;
    res.summary["params"] = detail::params_json(c);
    res.summary["n_traj"] = n_traj;
    res.summary["master_seed"] = c.master_seed;
    res.summary["dt"] = dt;
    res.summary["t_max"] = t_max;
    res.summary["fock_dim"] = setup.space.fock_dim;
    res.summary["settled_mean_photon"] = settled;
    res.summary["mean_jump_count"] = ens.mean_jump_count;
    res.summary["jump_counts"] = ens.jump_counts;
    detail::finish(cfg, res);
    return res;
}

/// Analytic-vs-numeric validation battery; passes only if every tolerance
/// holds.
inline ScenarioResult run_validate(const RunConfig& cfg) {
    ScenarioResult res;
    res.summary["scenario"] = "validate";
    Json checks = Json::array();
    auto record = [&](const std::string& name, double value, double tol) {
        const bool ok = value < tol;
        Json c;
        c["name"] = name;
        c["value"] = value;
        c["tolerance"] = tol;
        c["passed"] = ok;
        checks.push_back(c);
        res.passed = res.passed && ok;
    };

    // 1. Lindblad vs closed form, g_eff/kappa = 1.
    {
        AnalyticSolution s{1.0, 1.0};
        TruncatedSpace space(24, 2);
        auto h = build_effective_hamiltonian({1.0, 0.0, 1.0}, space,
                                             HamiltonianKind::EffectiveFinal);
        Matrix c = annihilation_op(space).matrix;
        auto r = lindblad_evolve({h.matrix, {}}, {c},
                                 DensityMatrix::from_pure(fock_state(space, 0, 0)),
                                 {cfg.dt.value_or(0.002), cfg.t_max.value_or(6.0), 50});
        double err_n = 0.0, err_i = 0.0;
        for (std::size_t i = 0; i < r.series.times.size(); ++i) {
            const double t = r.series.times[i];
            err_n = std::max(err_n, std::abs(r.series.col("mean_photon")[i] -
                                             mean_photon(s, t)));
            err_i = std::max(err_i, std::abs(r.series.col("inversion")[i] - f_t(s, t)));
        }
        record("lindblad_mean_photon_max_err", err_n, 1e-5);
        record("lindblad_inversion_max_err", err_i, 1e-5);
        record("lindblad_trace_err", r.final_state.trace_error(), 1e-8);
    }

    // 2. Closed form satisfies the master equation in finite differences.
    {
        AnalyticSolution s{1.0, 1.0};
        TruncatedSpace space(24, 2);
        auto hop = build_effective_hamiltonian({1.0, 0.0, 1.0}, space,
                                               HamiltonianKind::EffectiveFinal);
        const Matrix a = annihilation_op(space).matrix;
        const Matrix ada = a.adjoint() * a;
        const double h = 1e-3;
        double worst = 0.0;
        for (int k = 1; k <= 20; ++k) {
            const double t = 0.4 * k;
            const Matrix rho = joint_state(s, t, space).rho_af.matrix;
            const Matrix lhs = (joint_state(s, t + h, space).rho_af.matrix -
                                joint_state(s, t - h, space).rho_af.matrix) /
                               (2.0 * h);
            Matrix rhs = Complex(0, -1) * (hop.matrix * rho - rho * hop.matrix);
            rhs += s.kappa * (a * rho * a.adjoint() - 0.5 * (ada * rho + rho * ada));
            worst = std::max(worst, (lhs - rhs).cwiseAbs().maxCoeff());
        }
        record("closed_form_me_residual", worst, 1e-4);
    }

    // 3. MCWF ensemble tracks the Lindblad curve.
    {
        TruncatedSpace space(24, 2);
        auto h = build_effective_hamiltonian({1.0, 0.0, 1.0}, space,
                                             HamiltonianKind::EffectiveFinal);
        Matrix c = annihilation_op(space).matrix;
        auto psi0 = fock_state(space, 0, 0);
        const double dt = cfg.dt.value_or(0.002), tmax = cfg.t_max.value_or(6.0);
        TrajectoryConfig tc{cfg.n_traj.value_or(100), cfg.master_seed, dt, tmax, 100,
                           JumpRule::FirstOrder};
        auto ens = mcwf_ensemble({h.matrix, {}}, c, psi0, tc);
        auto lind = lindblad_evolve({h.matrix, {}}, {c}, DensityMatrix::from_pure(psi0),
                                    {dt, tmax, 100});
        double worst = 0.0;
        const auto& m = ens.series.col("mean_photon");
        const auto& se = ens.series.col("mean_photon_stderr");
        const auto& ref = lind.series.col("mean_photon");
        for (std::size_t i = 0; i < m.size(); ++i)
            worst = std::max(worst, std::abs(m[i] - ref[i]) / (3.0 * se[i] + 1e-3));
        record("mcwf_mean_photon_sigma_ratio", worst, 1.0);
    }

    // 4. Perturbative-regime margins of the configured parameters.
    {
        auto report = check_validity(cfg.params);
        double worst = 0.0;
        for (const auto& e : report.entries) worst = std::max(worst, e.value);
        record("regime_margin", worst, 0.35);
        Json margins = Json::array();
        for (const auto& e : report.entries) {
            Json m;
            m["name"] = e.name;
            m["value"] = e.value;
            margins.push_back(m);
        }
        res.summary["regime_margins"] = margins;
    }

    res.summary["checks"] = checks;
    detail::finish(cfg, res);
    return res;
}

inline ScenarioResult run_scenario(const RunConfig& cfg) {
    cfg.validate();
    if (cfg.scenario == "fig2") return run_fig2(cfg);
    if (cfg.scenario == "fig3") return run_fig3(cfg);
    if (cfg.scenario == "fig4") return run_fig4(cfg);
    if (cfg.scenario == "fig5") return run_fig5(cfg);
    if (cfg.scenario == "fig6") return run_fig6(cfg);
    if (cfg.scenario == "fig7") return run_fig7(cfg);
    return run_validate(cfg);
}

} // namespace oal

#endif
