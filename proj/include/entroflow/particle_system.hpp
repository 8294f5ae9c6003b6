#pragma once

#include "entroflow/dynamics.hpp"

namespace entroflow {

enum class Method { Euler, Rk4 };

// Everything a step needs to evaluate b^{eps,lambda} and police its
// invariants. Built from a ScenarioConfig by make_system().
struct SystemDef {
    StrategySpace space;
    BoxBounds box;
    double eps = 0.5;
    double lambda = 1.0;
    VelocityField velocity;
    TransferOperator transfer;
    double C_T = 0.0;
    double theta_eps = 0.0;
    double M_eps = 0.0;
    int threads = 1;
};

struct ParticleEnsemble {
    std::vector<AgentState> agents;
    double t = 0.0;

    EmpiricalMeasure measure() const { return EmpiricalMeasure{agents}; }
};

struct StepDiagnostics {
    double mass_defect_max = 0.0; // pre-renormalization |1 - mass|
    double renorm_total = 0.0;    // summed corrections this step
    double raw_mean_max = 0.0;    // operator zero-mean residual
    double box_margin_min = std::numeric_limits<double>::infinity();
};

struct TheoremConstants {
    double M_eps;
    double M_v;
    double C_T;
    double theta_eps;
    double T;
};

struct Trajectory {
    std::vector<double> times;
    std::vector<std::vector<AgentState>> snapshots;

    // run-level diagnostics
    double mass_drift_max_agent = 0.0; // max over agents of accumulated pre-renorm defect
    double renorm_total = 0.0;
    double raw_mean_max = 0.0;
    double box_margin_min = std::numeric_limits<double>::infinity();
    double sup_state_norm = 0.0;
    double gronwall_log_bound = 0.0;
    bool gronwall_ok = true;
    long steps = 0;
};

// One forward-Euler step: the field is evaluated for every agent at the
// frozen pre-step empirical measure, then all agents move together.
ParticleEnsemble euler_step(const SystemDef& def, const ParticleEnsemble& ens, double dt,
                            StepDiagnostics* diag = nullptr);

// Classical RK4; every internal stage state is clamped (tolerance 1e-9,
// StageLeftBox beyond) and renormalized before the next field evaluation.
ParticleEnsemble rk4_step(const SystemDef& def, const ParticleEnsemble& ens, double dt,
                          StepDiagnostics* diag = nullptr);

// (max_i ||y_i||_Ybar + M_eps T) e^{2 M_eps T}; may overflow to +inf, use the
// log version for comparisons.
double gronwall_bound(const StrategySpace& space, const std::vector<AgentState>& initial,
                      const TheoremConstants& c);
double gronwall_log_bound(const StrategySpace& space, const std::vector<AgentState>& initial,
                          const TheoremConstants& c);

// Integrates to horizon T recording `samples` equispaced snapshots (the
// initial state included). dt is a target; segments are subdivided so sample
// times are hit exactly. Asserts the a-priori bound along the way.
Trajectory integrate(const SystemDef& def, const ParticleEnsemble& ens0, double T, double dt,
                     Method method, int samples);

} // namespace entroflow
