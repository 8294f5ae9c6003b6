#pragma once

#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "entroflow/errors.hpp"

namespace entroflow {

using Vec = std::vector<double>;

enum class Metric { Euclidean, Discrete };

// Quadrature model of the compact label space (U, eta): nodes u_k, pairwise
// metric, strictly positive weights eta_k summing to 1, and the integrability
// exponent p. Every L^p(U, eta) integral in the dynamics is the corresponding
// weighted sum over the nodes.
class StrategySpace {
public:
    StrategySpace(); // trivial single-node space, placeholder until assigned
    StrategySpace(std::vector<Vec> nodes, Metric metric, Vec weights, double p);

    // M equispaced midpoints of [0,1] with uniform weights.
    static StrategySpace uniform_grid(int m, double p);
    // finite label set {1..H} with uniform weights and the discrete metric
    static StrategySpace discrete(int h, double p);

    int size() const { return static_cast<int>(nodes_.size()); }
    const std::vector<Vec>& nodes() const { return nodes_; }
    const Vec& weights() const { return weights_; }
    double p() const { return p_; }
    Metric metric() const { return metric_; }

    double node_coord(int k) const { return nodes_[k][0]; }
    double distance(int i, int j) const;

    // sum_k eta_k f_k
    double integrate(const Vec& f) const;

    std::string to_json() const;
    static StrategySpace from_json(const std::string& text);

private:
    std::vector<Vec> nodes_;
    Metric metric_;
    Vec weights_;
    double p_;
};

// A probability density w.r.t. eta, stored as node values, together with the
// box [r, R] it is supposed to live in (0 <= r < 1 < R).
struct LabelDensity {
    Vec values;
    double r = 0.0;
    double R = std::numeric_limits<double>::infinity();

    static LabelDensity uniform(const StrategySpace& space, double r, double R);

    double mass(const StrategySpace& space) const { return space.integrate(values); }
    // throws if mass or box invariants are violated beyond tol_mass
    void validate(const StrategySpace& space, double tol_mass = 1e-10) const;
};

// alpha_{r,R} = (R-1) r / (R-r),  k_{r,R} = alpha log r + (1-alpha) log R.
// On C_{r,R} these give 0 <= I(l) <= k_{r,R} and the component bounds
// -R log R <= H(l) <= R k_{r,R} + 1/e.
struct EntropyBounds {
    double alpha;
    double k;
    double h_low;   // -R log R
    double h_high;  // R k_{r,R} + 1/e
};

// Monotone growth function omega used by condition (T3), kept as a named
// closure so configs can refer to it by tag.
struct GrowthFn {
    std::string tag;
    std::function<double(double)> fn;

    double operator()(double s) const { return fn(s); }

    static GrowthFn identity() {
        return {"identity", [](double s) { return s; }};
    }
    static GrowthFn from_tag(const std::string& tag);
};

// The eps-dependent invariant box [r_eps, R_eps] plus the data that selected
// it. Both defining inequalities are re-checkable through certify().
struct BoxBounds {
    double r_eps;
    double R_eps;
    double eps;
    double C_T;
    GrowthFn omega = GrowthFn::identity();

    bool certify() const;
    EntropyBounds entropy() const;
};

// I(l) = sum_k eta_k l_k log l_k, with t log t := 0 at t = 0.
double negative_entropy(const StrategySpace& space, const LabelDensity& ell);

// H(l)_k = l_k (I(l) - log l_k); requires strictly positive densities.
Vec entropy_drift(const StrategySpace& space, const LabelDensity& ell);

EntropyBounds entropy_bounds(double r, double R);

// Lipschitz constant of H on C_{r,R}: L = (R+1) L' + k with
// L' = max(|1+log r|, |1+log R|) the t log t Lipschitz constant on [r,R].
double entropy_lipschitz(double r, double R);

// Deterministic dyadic selection of (r_eps, R_eps): the largest r = 2^-j and
// then the smallest R = 2^j satisfying
//   eps log(3/(4r)) >= C_T omega(4r/3)/r
//   alpha_{r,R} log(R/r) >= 2 C_T omega(R) / (eps R)
// Throws NoFeasibleBounds if no candidate with j <= 64 works.
BoxBounds select_box_bounds(double eps, double C_T, const GrowthFn& omega = GrowthFn::identity());

// (sum_k eta_k |f_k|^p)^(1/p); p = infinity gives the max norm.
double lp_norm(const StrategySpace& space, const Vec& f, double p);

// Repairs a mass defect < 1e-6 by shifting mass proportionally to headroom
// (l_k - r when removing, R - l_k when adding); box is preserved exactly.
// Returns the corrected density; |defect| is written to *correction.
LabelDensity renormalize(const StrategySpace& space, const Vec& raw, double r, double R,
                         double* correction = nullptr);

} // namespace entroflow
