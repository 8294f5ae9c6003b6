#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "entroflow/scenario.hpp"

namespace fs = std::filesystem;
using namespace entroflow;

namespace {

struct CommonArgs {
    std::string config_path;
    std::string out_dir;
    std::int64_t seed = -1;
    int threads = 0;
};

ScenarioConfig load(const CommonArgs& args) {
    ScenarioConfig cfg = ScenarioConfig::from_file(args.config_path);
    if (args.seed >= 0) cfg.seed = static_cast<std::uint64_t>(args.seed);
    if (args.threads > 0) cfg.threads = args.threads;
    fs::create_directories(args.out_dir);
    return cfg;
}

int cmd_simulate(const CommonArgs& args) {
    const ScenarioConfig cfg = load(args);
    const SimulationResult result = simulate_scenario(cfg);
    write_trajectory_csv(args.out_dir + "/trajectory.csv", result.def.space, result.traj);
    write_simulation_summary(args.out_dir + "/summary.json", cfg, result);
    std::cout << "simulate: " << result.traj.steps << " steps, sup ||y|| = "
              << result.traj.sup_state_norm << ", audits "
              << (result.audit.all_ok() ? "ok" : "VIOLATED") << "\n";
    return result.audit.all_ok() ? 0 : 2;
}

int cmd_fastlimit(const CommonArgs& args) {
    const ScenarioConfig cfg = load(args);
    const SystemDef def = make_system(cfg);
    const RateFit fit = run_fastlimit(cfg);
    write_rates_csv(args.out_dir + "/rates.csv", fit);
    write_rate_summary(args.out_dir + "/summary.json", cfg, def, fit);
    std::cout << "fastlimit: slope " << fit.slope << " (R^2 " << fit.r2 << ") over "
              << fit.lambdas.size() << " lambdas\n";
    return 0;
}

int cmd_meanfield(const CommonArgs& args) {
    const ScenarioConfig cfg = load(args);
    const SystemDef def = make_system(cfg);
    const MeanFieldResult res = run_meanfield(cfg);
    write_meanfield_csv(args.out_dir + "/rates.csv", res);
    write_meanfield_summary(args.out_dir + "/summary.json", cfg, def, res);
    std::cout << "meanfield: " << res.Ns.size() << " (N, 2N) pairs\n";
    return 0;
}

int cmd_check(const CommonArgs& args) {
    const ScenarioConfig cfg = load(args);
    const SystemDef def = make_system(cfg);
    const AssumptionReport rep = probe_assumptions(def.space, def.box, def.velocity, def.transfer,
                                                   def.C_T, cfg.d, cfg.seed);
    std::cout << "r_eps = " << def.box.r_eps << "  R_eps = " << def.box.R_eps
              << "  theta_eps = " << def.theta_eps << "  M_eps = " << def.M_eps << "\n";
    nlohmann::json j;
    j["resolved"] = {{"config_hash", cfg.hash()}, {"r_eps", def.box.r_eps},
                     {"R_eps", def.box.R_eps},   {"theta_eps", def.theta_eps},
                     {"M_eps", def.M_eps},       {"C_T", def.C_T}};
    for (const auto& c : rep.checks) {
        std::cout << (c.pass ? "  pass  " : "  FAIL  ") << c.name << "  observed " << c.observed
                  << (std::isfinite(c.threshold) ? "  threshold " + format_double(c.threshold)
                                                 : std::string("  (informational)"))
                  << "\n";
        j["checks"].push_back({{"name", c.name},
                               {"observed", c.observed},
                               {"threshold", c.threshold},
                               {"pass", c.pass},
                               {"note", c.note}});
    }
    std::ofstream out(args.out_dir + "/report.json");
    out << j.dump(2) << "\n";
    return rep.all_pass() ? 0 : 2;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"entroflow: entropy-regularized multi-population agent dynamics"};
    app.require_subcommand(1);

    CommonArgs args;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", args.config_path, "scenario JSON")->required();
        sub->add_option("--out", args.out_dir, "output directory")->required();
        sub->add_option("--seed", args.seed, "override the config seed");
        sub->add_option("--threads", args.threads, "worker threads");
    };

    CLI::App* simulate = app.add_subcommand("simulate", "integrate the N-agent system");
    CLI::App* fastlimit = app.add_subcommand("fastlimit", "lambda -> infinity rate study");
    CLI::App* meanfield = app.add_subcommand("meanfield", "N -> infinity Cauchy study");
    CLI::App* check = app.add_subcommand("check", "probe assumptions and print constants");
    for (CLI::App* sub : {simulate, fastlimit, meanfield, check}) add_common(sub);

    CLI11_PARSE(app, argc, argv);

    try {
        if (simulate->parsed()) return cmd_simulate(args);
        if (fastlimit->parsed()) return cmd_fastlimit(args);
        if (meanfield->parsed()) return cmd_meanfield(args);
        if (check->parsed()) return cmd_check(args);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}
