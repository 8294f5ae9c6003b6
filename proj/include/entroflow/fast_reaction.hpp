#pragma once

#include <mutex>
#include <unordered_map>

#include "entroflow/particle_system.hpp"

namespace entroflow {

// min over C_eps of G_nu(x, l) = int (F_nu(x, l(u), u) + eps l (log l - 1)) deta
struct GProblem {
    StrategySpace space;
    PayoffKernel kernel;
    SpatialMeasure nu;
    Vec x;
    double eps;
    BoxBounds box;
};

struct MinimizerCertificate {
    LabelDensity ell_star;
    double residual = 0.0;     // projected-step norm / step size at exit
    double beta_eps = 0.0;     // eps / R_eps, L2 strong-convexity modulus
    double gap_estimate = 0.0; // residual^2 / (2 beta_eps)
    int iterations = 0;
};

struct GibbsResult {
    LabelDensity ell;
    bool box_active = false;
};

// thrown by minimize_g with the best iterate attached
struct MaxIterations : Error {
    MaxIterations(const std::string& msg, MinimizerCertificate best_)
        : Error(msg), best(std::move(best_)) {}
    MinimizerCertificate best;
};

double g_value(const GProblem& problem, const LabelDensity& ell);

// Projected mirror descent: multiplicative update
//   l <- l exp(-s (dF_nu(x, l, .) + eps log l))
// followed by the exact KL projection onto {mass = 1, r <= l <= R} (clipped
// exponential tilt, scale found by bisection). warm_start seeds the iterate.
MinimizerCertificate minimize_g(const GProblem& problem, double tol, int max_iters = 200000,
                                const Vec* warm_start = nullptr);

// Closed-form reference for kernels linear in xi: l ~ exp(J_nu(x,.)/eps),
// clipped into the box with the mass-fixing tilt when needed.
GibbsResult gibbs_reference(const GProblem& problem);

// Memoizing wrapper around minimize_g; exact-argument cache, thread-safe.
class DeltaMap {
public:
    DeltaMap(StrategySpace space, PayoffKernel kernel, double eps, BoxBounds box, double tol)
        : space_(std::move(space)), kernel_(std::move(kernel)), eps_(eps), box_(box), tol_(tol) {}

    LabelDensity operator()(const SpatialMeasure& nu, const Vec& x) const;

private:
    StrategySpace space_;
    PayoffKernel kernel_;
    double eps_;
    BoxBounds box_;
    double tol_;
    mutable std::mutex mu_;
    mutable std::unordered_map<std::size_t, LabelDensity> cache_;
};

LabelDensity delta_map(const StrategySpace& space, const PayoffKernel& kernel,
                       const SpatialMeasure& nu, const Vec& x, double eps, const BoxBounds& box,
                       double tol);

// w_nu(x) = v evaluated at (x, Delta(x,nu)) under the lifted measure
// (id, Delta)_# nu; asserts |w| <= M_v (1+R_eps) (1 + |x| + m1(nu)).
Vec limit_velocity(const StrategySpace& space, const VelocityField& v, const PayoffKernel& kernel,
                   const SpatialMeasure& nu, const Vec& x, double eps, const BoxBounds& box,
                   double tol);

struct SpatialTrajectory {
    std::vector<double> times;
    std::vector<std::vector<Vec>> positions; // per time, per agent
    double sup_norm = 0.0;
    bool bounded_ok = true;
};

// xdot_i = w_{mu^N}(x_i) with mu^N the running spatial empirical measure.
SpatialTrajectory integrate_limit(const StrategySpace& space, const VelocityField& v,
                                  const PayoffKernel& kernel, const std::vector<Vec>& x0,
                                  double eps, const BoxBounds& box, double T, double dt,
                                  Method method, double tol, int samples, int threads = 1);

struct RateFit {
    std::vector<double> lambdas;
    std::vector<double> gaps;
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
};

struct FastStudySetup {
    StrategySpace space;
    PayoffKernel kernel;
    VelocityField velocity;
    double eps;
    BoxBounds box;
    double C_T;
    double theta_eps;
    std::vector<Vec> x0;
    std::vector<LabelDensity> ell0; // empty = start at the initial minimizer
    double T = 1.0;
    double burn_in_frac = 0.1;
    int samples = 33;
    double solver_tol = 1e-9;
    int threads = 1;
};

// For each lambda: integrate the two-time-scale system and the limit system
// from the same initial positions; gap(lambda) is the sup over sample times
// t >= t_burn of the agent-mean Ybar distance to (x_i(t), Delta(x_i, mu_t)).
// Least-squares fit of log gap against log lambda.
RateFit fast_reaction_study(const FastStudySetup& setup, const std::vector<double>& lambdas);

struct MeanFieldResult {
    std::vector<int> Ns;
    std::vector<double> init_w1; // W1(bar Lambda^N, bar Lambda^2N)
    std::vector<double> sup_w1;  // sup_t W1(Lambda^N_t, Lambda^2N_t)
    std::vector<double> rho;     // sup_w1 / init_w1
};

// Nested initial data from a common pool; runs each N once and compares
// consecutive (N, 2N) trajectories in W1 at the shared sample times.
MeanFieldResult mean_field_study(const SystemDef& def, const std::vector<AgentState>& pool,
                                 const std::vector<int>& Ns, double T, double dt, int samples);

// least-squares slope/intercept/R^2 of y against x
void linear_fit(const std::vector<double>& x, const std::vector<double>& y, double* slope,
                double* intercept, double* r2);

} // namespace entroflow
