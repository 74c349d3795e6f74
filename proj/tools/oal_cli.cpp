// Command line front end: `oal run` executes a named scenario from a config
// file, `oal validate` runs the analytic-vs-numeric battery. Exit codes:
// 0 success, 2 validation failure, 1 usage or configuration error.

#include <cstdio>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "oal/scenarios.hpp"

int main(int argc, char** argv) {
    CLI::App app{"one-atom laser toolbox: closed-form, Lindblad and Monte Carlo "
                 "wave-function dynamics of a strongly driven three-level atom "
                 "in a damped cavity"};
    app.require_subcommand(1);

    std::string config_path, out_dir, scenario;
    std::optional<std::uint64_t> seed;
    std::optional<int> trajectories;
    std::optional<double> dt, tmax;

    auto* run = app.add_subcommand("run", "run a scenario and write CSV/JSON outputs");
    run->add_option("--config", config_path, "config file (key = value lines)")->required();
    run->add_option("--scenario", scenario, "override the scenario named in the config");
    run->add_option("--out", out_dir, "output directory (default: current directory)");
    run->add_option("--seed", seed, "override master_seed");
    run->add_option("--trajectories", trajectories, "override n_traj");
    run->add_option("--dt", dt, "override the integration step");
    run->add_option("--tmax", tmax, "override the final time");

    auto* validate = app.add_subcommand("validate", "run the validation battery");
    validate->add_option("--config", config_path, "config file")->required();
    validate->add_option("--out", out_dir, "output directory (default: current directory)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return e.get_exit_code() == 0 ? 0 : 1;
    }

    try {
        oal::RunConfig cfg = oal::load_config(config_path);
        if (!scenario.empty()) cfg.scenario = scenario;
        if (validate->parsed()) cfg.scenario = "validate";
        if (!out_dir.empty()) cfg.out_dir = out_dir;
        if (seed) cfg.master_seed = *seed;
        if (trajectories) cfg.n_traj = *trajectories;
        if (dt) cfg.dt = *dt;
        if (tmax) cfg.t_max = *tmax;

        auto res = oal::run_scenario(cfg);
        for (const auto& f : res.files) std::printf("wrote %s\n", f.c_str());
        if (!res.passed) {
            std::fprintf(stderr, "validation failed; see summary\n");
            return 2;
        }
        return 0;
    } catch (const oal::Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
