#pragma once

#include <optional>
#include <string>

#include "entroflow/fast_reaction.hpp"

namespace entroflow {

struct SpaceConfig {
    int M = 16;
    std::string metric = "euclidean";
    double p = 2.0;
};

struct KernelConfig {
    std::string tag = "undisclosed_cosine";
    double a = 0.05;    // payoff amplitude
    double c = 0.1;     // penalty strength (penalized_cosine)
    double rate = 1.0;  // markov_symmetric base rate
};

struct VelocityConfig {
    std::string tag = "mean_revert";
    Vec c;              // constant drift vector
    Vec dir;            // label_steer direction
};

struct InitialConfig {
    double radius = 1.0;
    std::string labels = "dirichlet"; // dirichlet | uniform | minimizer
    double concentration = 1.0;
};

struct Tolerances {
    double tol_mass = 1e-10;
    double solver_tol = 1e-9;
};

struct StudyConfig {
    std::vector<double> lambdas = {10.0, 100.0, 1000.0, 10000.0};
    std::vector<int> Ns = {16, 32, 64, 128, 256};
    double burn_in = 0.1;
};

// Everything an experiment needs; JSON round-trip with unknown-key rejection.
struct ScenarioConfig {
    SpaceConfig space;
    KernelConfig kernel;
    VelocityConfig velocity;
    double eps = 0.5;
    double lambda = 1.0;
    std::optional<double> C_T_override;
    int N = 64;
    int d = 2;
    double T = 1.0;
    std::optional<double> dt;
    std::string method = "euler";
    std::uint64_t seed = 0;
    InitialConfig initial;
    int samples = 21;
    Tolerances tol;
    StudyConfig study;
    int threads = 1;

    static ScenarioConfig from_json_text(const std::string& text);
    static ScenarioConfig from_file(const std::string& path);
    std::string canonical_json() const;
    std::string hash() const; // FNV-1a of the canonical form
};

StrategySpace build_space(const ScenarioConfig& cfg);
TransferOperator build_transfer(const ScenarioConfig& cfg, const StrategySpace& space);
VelocityField build_velocity(const ScenarioConfig& cfg);

// resolves C_T, selects the box, theta_eps and M_eps
SystemDef make_system(const ScenarioConfig& cfg);

// seeded initial ensemble; labels per cfg.initial.labels
std::vector<AgentState> initial_ensemble(const ScenarioConfig& cfg, const SystemDef& def);

struct AuditReport {
    bool mass_ok = true;
    bool box_ok = true;
    bool entropy_ok = true;
    bool gronwall_ok = true;
    double mass_drift = 0.0;
    double entropy_min = 0.0;
    double entropy_max = 0.0;
    double k_eps = 0.0;

    bool all_ok() const { return mass_ok && box_ok && entropy_ok && gronwall_ok; }
};

struct SimulationResult {
    SystemDef def;
    Trajectory traj;
    AuditReport audit;
};

SimulationResult simulate_scenario(const ScenarioConfig& cfg);
AuditReport audit_trajectory(const SystemDef& def, const Trajectory& traj);

FastStudySetup make_fast_setup(const ScenarioConfig& cfg);
RateFit run_fastlimit(const ScenarioConfig& cfg);
MeanFieldResult run_meanfield(const ScenarioConfig& cfg);

// file emission (deterministic float formatting, %.17g)
void write_trajectory_csv(const std::string& path, const StrategySpace& space,
                          const Trajectory& traj);
void write_plan_csv(const std::string& path, const TransportPlan& plan);
void write_simulation_summary(const std::string& path, const ScenarioConfig& cfg,
                              const SimulationResult& result);
void write_rates_csv(const std::string& path, const RateFit& fit);
void write_rate_summary(const std::string& path, const ScenarioConfig& cfg, const SystemDef& def,
                        const RateFit& fit);
void write_meanfield_csv(const std::string& path, const MeanFieldResult& res);
void write_meanfield_summary(const std::string& path, const ScenarioConfig& cfg,
                             const SystemDef& def, const MeanFieldResult& res);

std::string format_double(double v);

} // namespace entroflow
