#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>

#include "entroflow/measures.hpp"
#include "entroflow/rng.hpp"

namespace entroflow {

// Payoff structure behind the label-transfer operators. Kernels in F-form
// provide F_nu(x, xi, u) and its xi-derivative averaged over the spatial
// atoms of nu; the full replicator kernel instead carries J(x, u, x', u').
class PayoffKernel {
public:
    enum class Kind { ReplicatorFull, Undisclosed, Integral, Penalized };

    using FullPayoff = std::function<double(const Vec& x, const Vec& u, const Vec& x2, const Vec& u2)>;
    using SpatialPayoff = std::function<double(const Vec& x, const Vec& u, const Vec& x2)>;
    using IntegralTerm = std::function<double(const Vec& x, double xi, const Vec& u, const Vec& x2)>;
    using ScalarFn = std::function<double(double)>;

    Kind kind() const { return kind_; }
    bool has_F_form() const { return kind_ != Kind::ReplicatorFull; }
    bool linear_in_xi() const { return kind_ == Kind::Undisclosed; }

    double C_F() const { return C_F_; }
    // Lipschitz bound of xi -> dF(xi); 0 for kernels linear in xi
    double dF_lip_xi() const { return dF_lip_xi_; }
    // (T3) constant with omega(s) = s: |T(y)(u)| <= 2 C_F |l(u)|
    double C_T() const { return 2.0 * C_F_; }

    // F_nu(x, xi, u_k) and d_xi F_nu(x, xi, u_k), nu-averages over atoms
    double F(const StrategySpace& space, const SpatialMeasure& nu, const Vec& x, double xi,
             int k) const;
    double dF(const StrategySpace& space, const SpatialMeasure& nu, const Vec& x, double xi,
              int k) const;
    // batched dF over all nodes at xi = xi_per_node[k] (the hot path)
    Vec dF_row(const StrategySpace& space, const SpatialMeasure& nu, const Vec& x,
               const Vec& xi_per_node) const;
    // J_nu(x, u_k) for all k; only for kernels built from a spatial payoff
    Vec jnu_row(const StrategySpace& space, const SpatialMeasure& nu, const Vec& x) const;
    double jpsi(const StrategySpace& space, const EmpiricalMeasure& psi, const Vec& x,
                const Vec& u) const;

    static PayoffKernel replicator_full(FullPayoff j4, double sup_j);
    static PayoffKernel undisclosed(SpatialPayoff j3, double sup_j3);
    static PayoffKernel integral(IntegralTerm f, IntegralTerm df, double sup_df, double df_lip_xi);
    // F = -J_nu xi + Q(xi) with Q' = J1 (J1 increasing, concave, bounded)
    static PayoffKernel penalized(SpatialPayoff j3, ScalarFn j1, ScalarFn q, double sup_j3,
                                  double sup_j1, double j1_lip);

private:
    Kind kind_ = Kind::Undisclosed;
    double C_F_ = 0.0;
    double dF_lip_xi_ = 0.0;
    FullPayoff j4_;
    SpatialPayoff j3_;
    IntegralTerm f_, df_;
    ScalarFn j1_, q_;
};

// Markov label switching on the discrete H-point space; alpha(h,k,..) >= 0 is
// the rate of change from label h to label k, the diagonal is
// alpha_hh = sum_{k != h} alpha_kh (uniform density stationary).
struct MarkovRates {
    int H = 0;
    std::function<double(int h, int k, const Vec& x, const EmpiricalMeasure& psi)> alpha;
    double C_T = 0.0; // bound on max_h alpha_hh
};

// Velocity field v_Psi(y) with its declared (v3) constant and a Lipschitz
// budget used by the assumption probes.
struct VelocityField {
    std::string tag;
    std::function<Vec(const StrategySpace&, const EmpiricalMeasure&, const AgentState&)> eval;
    double M_v = 1.0;
    double lip_budget = 1.0;
};

// One of the label-transfer operators, or none.
struct TransferOperator {
    enum class Kind { None, Replicator, Undisclosed, Markov };
    Kind kind = Kind::None;
    std::shared_ptr<const PayoffKernel> kernel;
    std::shared_ptr<const MarkovRates> rates;

    static TransferOperator none() { return {}; }
    static TransferOperator replicator(std::shared_ptr<const PayoffKernel> k) {
        return {Kind::Replicator, std::move(k), nullptr};
    }
    static TransferOperator undisclosed(std::shared_ptr<const PayoffKernel> k) {
        return {Kind::Undisclosed, std::move(k), nullptr};
    }
    static TransferOperator markov(std::shared_ptr<const MarkovRates> r) {
        return {Kind::Markov, nullptr, std::move(r)};
    }

    double default_C_T() const;
};

// Operator output: the tangent is exactly mean-subtracted; raw_mean keeps the
// magnitude of the subtracted quadrature residual observable.
struct LabelTangent {
    Vec v;
    double raw_mean = 0.0;
};

LabelTangent replicator_operator(const StrategySpace& space, const PayoffKernel& kernel,
                                 const EmpiricalMeasure& psi, const AgentState& y);
LabelTangent undisclosed_operator(const StrategySpace& space, const PayoffKernel& kernel,
                                  const SpatialMeasure& nu, const AgentState& y);
LabelTangent markov_operator(const StrategySpace& space, const MarkovRates& rates,
                             const EmpiricalMeasure& psi, const AgentState& y);
LabelTangent transfer_apply(const StrategySpace& space, const TransferOperator& op,
                            const EmpiricalMeasure& psi, const SpatialMeasure& nu,
                            const AgentState& y);

struct Drift {
    Vec dx;
    Vec dl;
    double raw_mean = 0.0;
};

// b^{eps,lambda}_Psi(y) = (v_Psi(y), lambda (T_Psi(y) + eps H(l)))
Drift entropic_field(const StrategySpace& space, const VelocityField& v,
                     const TransferOperator& op, const EmpiricalMeasure& psi,
                     const SpatialMeasure& nu, const AgentState& y, double eps, double lambda);

// M_eps = C_T omega(R_eps) + eps max(R_eps log R_eps, R_eps k_eps + 1/e) + M_v
double sublinearity_constant(const BoxBounds& box, double C_T, double M_v);

// Invariant-preserving Euler step bound theta_eps > 0, from the two proof
// cases: up-crossing via the root R' of C_T omega(R) + eps t (k - log t) and
// down-crossing via the r/3 margin.
double step_bound_theta(double eps, const BoxBounds& box, double C_T, const GrowthFn& omega);

struct AssumptionCheck {
    std::string name;
    double observed = 0.0;
    double threshold = 0.0;
    bool pass = true;
    std::string note;
};

struct AssumptionReport {
    std::vector<AssumptionCheck> checks;
    bool all_pass() const {
        for (const auto& c : checks)
            if (!c.pass) return false;
        return true;
    }
};

// Monte-Carlo probes of (v1)-(v3) and (T1)-(T3) on random states/measures in
// the box; report-only, never throws on a violated inequality.
AssumptionReport probe_assumptions(const StrategySpace& space, const BoxBounds& box,
                                   const VelocityField& v, const TransferOperator& op, double C_T,
                                   int d, std::uint64_t seed, int probes = 64);

} // namespace entroflow
