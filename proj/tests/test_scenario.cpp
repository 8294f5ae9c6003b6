#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "entroflow/scenario.hpp"

using namespace entroflow;

namespace {

std::string tiny_config(const std::string& extra = "") {
    return R"({
      "space": {"M": 6, "metric": "euclidean", "p": 2.0},
      "kernel": {"tag": "undisclosed_cosine", "a": 0.025},
      "velocity": {"tag": "mean_revert"},
      "eps": 0.5, "lambda": 1.0, "N": 6, "d": 2, "T": 0.2,
      "seed": 99, "samples": 3)" +
           extra + "\n}";
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

TEST_CASE("config parsing") {
    SUBCASE("well-formed config round-trips basic fields") {
        const ScenarioConfig cfg = ScenarioConfig::from_json_text(tiny_config());
        CHECK(cfg.space.M == 6);
        CHECK(cfg.kernel.tag == "undisclosed_cosine");
        CHECK(cfg.seed == 99);
        CHECK(cfg.samples == 3);
    }
    SUBCASE("unknown keys are rejected, also in nested blocks") {
        CHECK_THROWS_AS(ScenarioConfig::from_json_text(tiny_config(R"(, "typo_key": 1)")),
                        ConfigError);
        CHECK_THROWS_AS(ScenarioConfig::from_json_text(
                            R"({"space": {"M": 4, "metrc": "euclidean"}, "seed": 1})"),
                        ConfigError);
    }
    SUBCASE("seed is mandatory") {
        CHECK_THROWS_AS(ScenarioConfig::from_json_text(R"({"eps": 0.5})"), ConfigError);
    }
    SUBCASE("eps = 0 is refused: the entropic box is undefined") {
        CHECK_THROWS_AS(
            ScenarioConfig::from_json_text(R"({"eps": 0.0, "seed": 1})"), ConfigError);
    }
    SUBCASE("p = infinity is refused for dynamics") {
        CHECK_THROWS_AS(ScenarioConfig::from_json_text(
                            R"({"space": {"M": 4, "p": 1e999}, "seed": 1})"),
                        ConfigError);
    }
    SUBCASE("hash is stable and seed-sensitive") {
        const ScenarioConfig a = ScenarioConfig::from_json_text(tiny_config());
        const ScenarioConfig b = ScenarioConfig::from_json_text(tiny_config());
        CHECK(a.hash() == b.hash());
        ScenarioConfig c = a;
        c.seed = 100;
        CHECK(a.hash() != c.hash());
    }
}

TEST_CASE("make_system resolves constants consistently") {
    const ScenarioConfig cfg = ScenarioConfig::from_json_text(tiny_config());
    const SystemDef def = make_system(cfg);
    CHECK(def.C_T == doctest::Approx(2.0 * 2.0 * 0.025)); // 2 C_F with C_F = 2a
    CHECK(def.box.certify());
    CHECK(def.theta_eps > 0.0);
    CHECK(def.M_eps > def.velocity.M_v);

    ScenarioConfig with_override = cfg;
    with_override.C_T_override = 0.5;
    CHECK(make_system(with_override).C_T == 0.5);
}

TEST_CASE("initial ensembles are deterministic and nested across N") {
    const ScenarioConfig cfg = ScenarioConfig::from_json_text(tiny_config());
    const SystemDef def = make_system(cfg);
    const std::vector<AgentState> a = initial_ensemble(cfg, def);
    const std::vector<AgentState> b = initial_ensemble(cfg, def);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].x == b[i].x);
        CHECK(a[i].ell.values == b[i].ell.values);
    }
    for (const auto& agent : a) {
        agent.ell.validate(def.space);
        CHECK(euclid_norm(agent.x) <= cfg.initial.radius);
    }
}

TEST_CASE("simulate_scenario: audits are green on a small run") {
    const ScenarioConfig cfg = ScenarioConfig::from_json_text(tiny_config());
    const SimulationResult res = simulate_scenario(cfg);
    CHECK(res.audit.all_ok());
    CHECK(res.traj.snapshots.size() == 3);
    CHECK(res.traj.times.back() == doctest::Approx(0.2));
}

TEST_CASE("simulate_scenario twice gives byte-identical trajectory files") {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "entroflow_test_det";
    fs::create_directories(dir);
    const ScenarioConfig cfg = ScenarioConfig::from_json_text(tiny_config());
    for (int run = 0; run < 2; ++run) {
        const SimulationResult res = simulate_scenario(cfg);
        write_trajectory_csv((dir / ("t" + std::to_string(run) + ".csv")).string(),
                             res.def.space, res.traj);
    }
    CHECK(slurp((dir / "t0.csv").string()) == slurp((dir / "t1.csv").string()));
    fs::remove_all(dir);
}

TEST_CASE("markov kernel wiring needs a discrete space") {
    const std::string cfg_text = R"({
      "space": {"M": 4, "metric": "discrete", "p": 2.0},
      "kernel": {"tag": "markov_symmetric", "rate": 0.05},
      "velocity": {"tag": "zero"},
      "eps": 0.5, "lambda": 1.0, "N": 4, "d": 1, "T": 0.1, "seed": 5, "samples": 2
    })";
    const ScenarioConfig cfg = ScenarioConfig::from_json_text(cfg_text);
    const SimulationResult res = simulate_scenario(cfg);
    CHECK(res.audit.all_ok());

    ScenarioConfig euclid = cfg;
    euclid.space.metric = "euclidean";
    CHECK_THROWS_AS(make_system(euclid), ConfigError);
}

TEST_CASE("kernel library tags all build and run one field evaluation") {
    for (const std::string tag :
         {"zero", "undisclosed_cosine", "penalized_cosine", "integral_sqrt"}) {
        std::string text = R"({
          "space": {"M": 4, "metric": "euclidean", "p": 2.0},
          "kernel": {"tag": ")" + tag + R"(", "a": 0.02, "c": 0.05},
          "velocity": {"tag": "mean_revert"},
          "eps": 0.5, "lambda": 1.0, "N": 3, "d": 2, "T": 0.05, "seed": 7, "samples": 2
        })";
        const ScenarioConfig cfg = ScenarioConfig::from_json_text(text);
        const SimulationResult res = simulate_scenario(cfg);
        INFO("kernel tag ", tag);
        CHECK(res.audit.all_ok());
    }
}

TEST_CASE("fastlimit setup rejects the full replicator kernel") {
    std::string text = R"({
      "space": {"M": 4, "metric": "euclidean", "p": 2.0},
      "kernel": {"tag": "replicator_cosine", "a": 0.05},
      "velocity": {"tag": "mean_revert"},
      "eps": 0.5, "lambda": 1.0, "N": 3, "d": 2, "T": 0.1, "seed": 7, "samples": 2
    })";
    CHECK_THROWS_AS(make_fast_setup(ScenarioConfig::from_json_text(text)), ConfigError);
}
