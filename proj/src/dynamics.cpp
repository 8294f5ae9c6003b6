#include "entroflow/dynamics.hpp"

#include <algorithm>
#include <cmath>

#include "entroflow/sampling.hpp"

namespace entroflow {

double PayoffKernel::F(const StrategySpace& space, const SpatialMeasure& nu, const Vec& x,
                       double xi, int k) const {
    if (nu.points.empty()) throw EmptyMeasure("PayoffKernel::F: empty spatial measure");
    const Vec& u = space.nodes()[k];
    double s = 0.0;
    switch (kind_) {
    case Kind::Undisclosed:
        for (const auto& x2 : nu.points) s += j3_(x, u, x2);
        return -(s / nu.size()) * xi;
    case Kind::Penalized:
        for (const auto& x2 : nu.points) s += j3_(x, u, x2);
        return -(s / nu.size()) * xi + q_(xi);
    case Kind::Integral:
        for (const auto& x2 : nu.points) s += f_(x, xi, u, x2);
        return s / nu.size();
    case Kind::ReplicatorFull:
        throw Error("PayoffKernel::F: full replicator kernel has no F-form");
    }
    return 0.0;
}

double PayoffKernel::dF(const StrategySpace& space, const SpatialMeasure& nu, const Vec& x,
                        double xi, int k) const {
    if (nu.points.empty()) throw EmptyMeasure("PayoffKernel::dF: empty spatial measure");
    const Vec& u = space.nodes()[k];
    double s = 0.0;
    switch (kind_) {
    case Kind::Undisclosed:
        for (const auto& x2 : nu.points) s += j3_(x, u, x2);
        return -s / nu.size();
    case Kind::Penalized:
        for (const auto& x2 : nu.points) s += j3_(x, u, x2);
        return -s / nu.size() + j1_(xi);
    case Kind::Integral:
        for (const auto& x2 : nu.points) s += df_(x, xi, u, x2);
        return s / nu.size();
    case Kind::ReplicatorFull:
        throw Error("PayoffKernel::dF: full replicator kernel has no F-form");
    }
    return 0.0;
}

Vec PayoffKernel::dF_row(const StrategySpace& space, const SpatialMeasure& nu, const Vec& x,
                         const Vec& xi_per_node) const {
    const int m = space.size();
    Vec row(m);
    if (kind_ == Kind::Undisclosed || kind_ == Kind::Penalized) {
        const Vec j = jnu_row(space, nu, x);
        for (int k = 0; k < m; ++k)
            row[k] = -j[k] + (kind_ == Kind::Penalized ? j1_(xi_per_node[k]) : 0.0);
        return row;
    }
    for (int k = 0; k < m; ++k) row[k] = dF(space, nu, x, xi_per_node[k], k);
    return row;
}

Vec PayoffKernel::jnu_row(const StrategySpace& space, const SpatialMeasure& nu, const Vec& x) const {
    if (!j3_) throw Error("PayoffKernel::jnu_row: kernel has no spatial payoff");
    if (nu.points.empty()) throw EmptyMeasure("PayoffKernel::jnu_row: empty spatial measure");
    const int m = space.size();
    Vec row(m, 0.0);
    for (const auto& x2 : nu.points)
        for (int k = 0; k < m; ++k) row[k] += j3_(x, space.nodes()[k], x2);
    for (double& v : row) v /= nu.size();
    return row;
}

double PayoffKernel::jpsi(const StrategySpace& space, const EmpiricalMeasure& psi, const Vec& x,
                          const Vec& u) const {
    if (!j4_) throw Error("PayoffKernel::jpsi: kernel has no full payoff");
    if (psi.atoms.empty()) throw EmptyMeasure("PayoffKernel::jpsi: empty measure");
    const Vec& eta = space.weights();
    double s = 0.0;
    for (const auto& atom : psi.atoms) {
        double inner = 0.0;
        for (int l = 0; l < space.size(); ++l)
            inner += eta[l] * j4_(x, u, atom.x, space.nodes()[l]) * atom.ell.values[l];
        s += inner;
    }
    return s / psi.size();
}

PayoffKernel PayoffKernel::replicator_full(FullPayoff j4, double sup_j) {
    PayoffKernel k;
    k.kind_ = Kind::ReplicatorFull;
    k.j4_ = std::move(j4);
    k.C_F_ = sup_j;
    return k;
}

PayoffKernel PayoffKernel::undisclosed(SpatialPayoff j3, double sup_j3) {
    PayoffKernel k;
    k.kind_ = Kind::Undisclosed;
    k.j3_ = std::move(j3);
    k.C_F_ = sup_j3;
    return k;
}

PayoffKernel PayoffKernel::integral(IntegralTerm f, IntegralTerm df, double sup_df,
                                    double df_lip_xi) {
    PayoffKernel k;
    k.kind_ = Kind::Integral;
    k.f_ = std::move(f);
    k.df_ = std::move(df);
    k.C_F_ = sup_df;
    k.dF_lip_xi_ = df_lip_xi;
    return k;
}

PayoffKernel PayoffKernel::penalized(SpatialPayoff j3, ScalarFn j1, ScalarFn q, double sup_j3,
                                     double sup_j1, double j1_lip) {
    PayoffKernel k;
    k.kind_ = Kind::Penalized;
    k.j3_ = std::move(j3);
    k.j1_ = std::move(j1);
    k.q_ = std::move(q);
    k.C_F_ = sup_j3 + sup_j1;
    k.dF_lip_xi_ = j1_lip;
    return k;
}

double TransferOperator::default_C_T() const {
    switch (kind) {
    case Kind::None: return 0.0;
    case Kind::Replicator:
    case Kind::Undisclosed: return kernel ? kernel->C_T() : 0.0;
    case Kind::Markov: return rates ? rates->C_T : 0.0;
    }
    return 0.0;
}

namespace {

LabelTangent subtract_mean(const StrategySpace& space, Vec raw) {
    const double m = space.integrate(raw);
    for (double& v : raw) v -= m;
    return {std::move(raw), std::abs(m)};
}

} // namespace

LabelTangent replicator_operator(const StrategySpace& space, const PayoffKernel& kernel,
                                 const EmpiricalMeasure& psi, const AgentState& y) {
    if (static_cast<int>(y.ell.values.size()) != space.size())
        throw DimensionMismatch("replicator_operator: label grid mismatch");
    const int m = space.size();
    Vec j(m);
    for (int k = 0; k < m; ++k) j[k] = kernel.jpsi(space, psi, y.x, space.nodes()[k]);
    double avg = 0.0;
    for (int k = 0; k < m; ++k) avg += space.weights()[k] * j[k] * y.ell.values[k];
    Vec raw(m);
    for (int k = 0; k < m; ++k) raw[k] = (j[k] - avg) * y.ell.values[k];
    return subtract_mean(space, std::move(raw));
}

LabelTangent undisclosed_operator(const StrategySpace& space, const PayoffKernel& kernel,
                                  const SpatialMeasure& nu, const AgentState& y) {
    if (!kernel.has_F_form())
        throw Error("undisclosed_operator: kernel must provide d_xi F");
    if (static_cast<int>(y.ell.values.size()) != space.size())
        throw DimensionMismatch("undisclosed_operator: label grid mismatch");
    const int m = space.size();
    const Vec df = kernel.dF_row(space, nu, y.x, y.ell.values);
    double avg = 0.0;
    for (int k = 0; k < m; ++k) avg += space.weights()[k] * df[k] * y.ell.values[k];
    Vec raw(m);
    for (int k = 0; k < m; ++k) raw[k] = (avg - df[k]) * y.ell.values[k];
    return subtract_mean(space, std::move(raw));
}

LabelTangent markov_operator(const StrategySpace& space, const MarkovRates& rates,
                             const EmpiricalMeasure& psi, const AgentState& y) {
    if (space.metric() != Metric::Discrete || rates.H != space.size())
        throw DimensionMismatch("markov_operator: needs the discrete H-point space");
    const int h = rates.H;
    // a[j][k] = rate of change from label j to label k
    std::vector<Vec> a(h, Vec(h, 0.0));
    for (int j = 0; j < h; ++j) {
        for (int k = 0; k < h; ++k) {
            if (j == k) continue;
            a[j][k] = rates.alpha(j, k, y.x, psi);
            if (a[j][k] < 0.0) throw NegativeRate("markov_operator: negative off-diagonal rate");
        }
    }
    Vec raw(h, 0.0);
    for (int hh = 0; hh < h; ++hh) {
        double diag = 0.0, gain = 0.0;
        for (int k = 0; k < h; ++k) {
            if (k == hh) continue;
            diag += a[k][hh];
            gain += a[k][hh] * y.ell.values[k];
        }
        raw[hh] = -diag * y.ell.values[hh] + gain;
    }
    return subtract_mean(space, std::move(raw));
}

LabelTangent transfer_apply(const StrategySpace& space, const TransferOperator& op,
                            const EmpiricalMeasure& psi, const SpatialMeasure& nu,
                            const AgentState& y) {
    switch (op.kind) {
    case TransferOperator::Kind::None:
        return {Vec(space.size(), 0.0), 0.0};
    case TransferOperator::Kind::Replicator:
        return replicator_operator(space, *op.kernel, psi, y);
    case TransferOperator::Kind::Undisclosed:
        return undisclosed_operator(space, *op.kernel, nu, y);
    case TransferOperator::Kind::Markov:
        return markov_operator(space, *op.rates, psi, y);
    }
    return {Vec(space.size(), 0.0), 0.0};
}

Drift entropic_field(const StrategySpace& space, const VelocityField& v,
                     const TransferOperator& op, const EmpiricalMeasure& psi,
                     const SpatialMeasure& nu, const AgentState& y, double eps, double lambda) {
    Drift out;
    out.dx = v.eval(space, psi, y);
    LabelTangent t = transfer_apply(space, op, psi, nu, y);
    out.dl = std::move(t.v);
    if (eps != 0.0) {
        const Vec h = entropy_drift(space, y.ell);
        for (int k = 0; k < space.size(); ++k) out.dl[k] += eps * h[k];
    }
    for (double& w : out.dl) w *= lambda;
    const double m = space.integrate(out.dl);
    for (double& w : out.dl) w -= m;
    out.raw_mean = std::max(t.raw_mean, std::abs(m));
    return out;
}

double sublinearity_constant(const BoxBounds& box, double C_T, double M_v) {
    const EntropyBounds eb = box.entropy();
    const double hmax = std::max(box.R_eps * std::log(box.R_eps), eb.h_high);
    return C_T * box.omega(box.R_eps) + box.eps * hmax + M_v;
}

double step_bound_theta(double eps, const BoxBounds& box, double C_T, const GrowthFn& omega) {
    if (!(eps > 0.0)) throw InvalidBounds("step_bound_theta: eps must be > 0");
    if (!box.certify()) throw NoFeasibleBounds("step_bound_theta: box does not certify");
    const double r = box.r_eps, R = box.R_eps;
    const EntropyBounds eb = entropy_bounds(r, R);
    const double cw = C_T * omega(R);

    // phi(t) = C_T omega(R) + eps t (k - log t): positive at the interior
    // maximum t = e^(k-1), negative at R by the R_eps inequality. R' is the
    // crossing; above it the worst-case drift already points down.
    auto phi = [&](double t) { return cw + eps * t * (eb.k - std::log(t)); };
    double lo = std::exp(eb.k - 1.0), hi = R;
    if (!(phi(lo) > 0.0) || !(phi(hi) < 0.0))
        throw NoFeasibleBounds("step_bound_theta: sign bracket failed for R'");
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        (phi(mid) > 0.0 ? lo : hi) = mid;
    }
    const double R_prime = 0.5 * (lo + hi);

    const double theta_up = (R - R_prime) / (cw + eps * R * eb.k + eps / std::exp(1.0));
    const double theta_down = (r / 3.0) / (cw + eps * R * std::log(R));
    return std::min(theta_up, theta_down);
}

namespace {

AgentState random_state(const StrategySpace& space, Rng& rng, const BoxBounds& box, int d,
                        double radius) {
    return {random_ball_position(rng, d, radius),
            random_density(space, rng, box.r_eps, box.R_eps)};
}

EmpiricalMeasure random_measure(const StrategySpace& space, Rng& rng, const BoxBounds& box, int d,
                                double radius, int n) {
    EmpiricalMeasure psi;
    for (int i = 0; i < n; ++i) psi.atoms.push_back(random_state(space, rng, box, d, radius));
    return psi;
}

} // namespace

AssumptionReport probe_assumptions(const StrategySpace& space, const BoxBounds& box,
                                   const VelocityField& v, const TransferOperator& op, double C_T,
                                   int d, std::uint64_t seed, int probes) {
    Rng rng(seed);
    AssumptionReport rep;
    const double p = space.p();

    AssumptionCheck v1{"(v1) v Lipschitz in y", 0.0, v.lip_budget * 1.05 + 1e-9, true, ""};
    AssumptionCheck v2{"(v2) v Lipschitz in Psi", 0.0, v.lip_budget * 1.05 + 1e-9, true, ""};
    AssumptionCheck v3{"(v3) v sublinear", 0.0, 1.0 + 1e-9, true, ""};
    AssumptionCheck t1{"(T1) zero mean", 0.0, 1e-8, true, "raw quadrature residual"};
    AssumptionCheck t2{"(T2) T Lipschitz in (y,Psi)", 0.0,
                       std::numeric_limits<double>::infinity(), true,
                       "statistical estimate only; no certified modulus"};
    AssumptionCheck t3{"(T3) pointwise bounds", 0.0, 1e-8, true, "max excess over the bound"};

    for (int it = 0; it < probes; ++it) {
        const EmpiricalMeasure psi = random_measure(space, rng, box, d, 1.5, 8);
        const SpatialMeasure nu = spatial_marginal(psi);
        const AgentState y1 = random_state(space, rng, box, d, 1.5);
        const AgentState y2 = random_state(space, rng, box, d, 1.5);

        // (v1)
        const Vec vy1 = v.eval(space, psi, y1);
        const Vec vy2 = v.eval(space, psi, y2);
        const double dy = state_distance(space, y1, y2, p);
        if (dy > 1e-9) {
            Vec dv(vy1.size());
            for (std::size_t i = 0; i < dv.size(); ++i) dv[i] = vy1[i] - vy2[i];
            v1.observed = std::max(v1.observed, euclid_norm(dv) / dy);
        }

        // (v2)
        const EmpiricalMeasure psi2 = random_measure(space, rng, box, d, 1.5, 8);
        const double wdist = w1(space, psi, psi2).value;
        if (wdist > 1e-9) {
            const Vec va = v.eval(space, psi, y1);
            const Vec vb = v.eval(space, psi2, y1);
            Vec dv(va.size());
            for (std::size_t i = 0; i < dv.size(); ++i) dv[i] = va[i] - vb[i];
            v2.observed = std::max(v2.observed, euclid_norm(dv) / wdist);
        }

        // (v3) probed on a wider ball so superlinear growth becomes visible
        const AgentState yfar = random_state(space, rng, box, d, 4.0);
        const double bound =
            v.M_v * (1.0 + state_norm(space, yfar) + first_moment(space, psi));
        v3.observed = std::max(v3.observed, euclid_norm(v.eval(space, psi, yfar)) / bound);

        // (T1)-(T3)
        const LabelTangent t = transfer_apply(space, op, psi, nu, y1);
        t1.observed = std::max(t1.observed, t.raw_mean);
        const double up = C_T * box.omega(box.R_eps);
        for (int k = 0; k < space.size(); ++k) {
            t3.observed = std::max(t3.observed, t.v[k] - up);
            const double neg = std::max(0.0, -t.v[k]);
            t3.observed = std::max(t3.observed, neg - C_T * box.omega(y1.ell.values[k]));
        }
        const LabelTangent tb = transfer_apply(space, op, psi2, spatial_marginal(psi2), y2);
        const double denom = dy + wdist;
        if (denom > 1e-9) {
            Vec dt(t.v.size());
            for (std::size_t k = 0; k < dt.size(); ++k) dt[k] = t.v[k] - tb.v[k];
            t2.observed = std::max(t2.observed, lp_norm(space, dt, p) / denom);
        }
    }

    v1.pass = v1.observed <= v1.threshold;
    v2.pass = v2.observed <= v2.threshold;
    v3.pass = v3.observed <= v3.threshold;
    t1.pass = t1.observed <= t1.threshold;
    t2.pass = std::isfinite(t2.observed);
    t3.pass = t3.observed <= t3.threshold;
    rep.checks = {v1, v2, v3, t1, t2, t3};
    return rep;
}

} // namespace entroflow
