#include <doctest.h>

#include <cmath>

#include "entroflow/fast_reaction.hpp"
#include "entroflow/sampling.hpp"

using namespace entroflow;

namespace {

PayoffKernel zero_kernel() {
    return PayoffKernel::undisclosed([](const Vec&, const Vec&, const Vec&) { return 0.0; },
                                     0.0);
}

PayoffKernel cosine_kernel(double a) {
    return PayoffKernel::undisclosed(
        [a](const Vec& x, const Vec& u, const Vec& x2) {
            const double d = euclid_dist(x, x2);
            return a * (std::cos(2.0 * M_PI * u[0]) / (1.0 + d * d) +
                        std::sin(2.0 * M_PI * u[0]) * std::tanh(x[0] + x2[0]));
        },
        2.0 * a);
}

// two-node kernel with J_nu(x, u) = (1, 0) regardless of nu and x
PayoffKernel step_kernel() {
    return PayoffKernel::undisclosed(
        [](const Vec&, const Vec& u, const Vec&) { return u[0] < 0.5 ? 1.0 : 0.0; }, 1.0);
}

SpatialMeasure one_atom(Vec x) { return SpatialMeasure{{std::move(x)}}; }

GProblem simple_problem(const StrategySpace& sp, PayoffKernel kernel, double eps, double r,
                        double R, Vec x = {0.0, 0.0}, SpatialMeasure nu = {}) {
    if (nu.points.empty()) nu = one_atom({0.4, -0.3});
    BoxBounds box;
    box.r_eps = r;
    box.R_eps = R;
    box.eps = eps;
    box.C_T = kernel.C_T();
    return GProblem{sp, std::move(kernel), std::move(nu), std::move(x), eps, box};
}

} // namespace

TEST_CASE("g_value: pure entropy at the uniform density is -eps") {
    const StrategySpace sp = StrategySpace::uniform_grid(4, 2.0);
    for (double eps : {0.25, 0.5, 1.0}) {
        const GProblem problem = simple_problem(sp, zero_kernel(), eps, 0.1, 5.0);
        CHECK(std::abs(g_value(problem, LabelDensity::uniform(sp, 0.1, 5.0)) + eps) < 1e-15);
    }
}

TEST_CASE("g_value: linear kernel, two-node hand computation") {
    // G = -int J l deta + eps int l (log l - 1) deta with J = (1, 0), eps = 1
    const StrategySpace sp = StrategySpace({{0.25}, {0.75}}, Metric::Euclidean, {0.5, 0.5}, 2.0);
    const GProblem problem = simple_problem(sp, step_kernel(), 1.0, 0.1, 5.0);
    const LabelDensity ell{{1.5, 0.5}, 0.1, 5.0};
    CHECK(std::abs(g_value(problem, ell) - (-1.6191879640588630)) < 1e-15);
}

TEST_CASE("g_value is midpoint convex on random pairs") {
    const StrategySpace sp = StrategySpace::uniform_grid(6, 2.0);
    const GProblem problem = simple_problem(sp, cosine_kernel(0.4), 0.5, 0.1, 5.0);
    Rng rng(1);
    for (int it = 0; it < 100; ++it) {
        const LabelDensity a = random_density(sp, rng, 0.1, 5.0);
        const LabelDensity b = random_density(sp, rng, 0.1, 5.0);
        LabelDensity mid{Vec(sp.size()), 0.1, 5.0};
        for (int k = 0; k < sp.size(); ++k)
            mid.values[k] = 0.5 * (a.values[k] + b.values[k]);
        CHECK(g_value(problem, mid) <=
              0.5 * g_value(problem, a) + 0.5 * g_value(problem, b) + 1e-12);
    }
}

TEST_CASE("minimize_g: pure entropy is minimized at the uniform density") {
    const StrategySpace sp = StrategySpace::uniform_grid(5, 2.0);
    const GProblem problem = simple_problem(sp, zero_kernel(), 0.5, 0.1, 5.0);
    const MinimizerCertificate cert = minimize_g(problem, 1e-11);
    for (double v : cert.ell_star.values) CHECK(std::abs(v - 1.0) < 1e-9);
    CHECK(cert.residual <= 1e-11);
}

TEST_CASE("minimize_g matches the unconstrained softmax when the box is inactive") {
    const StrategySpace sp = StrategySpace::uniform_grid(7, 2.0);
    const PayoffKernel kernel = cosine_kernel(0.3);
    const double eps = 0.5;
    const GProblem problem = simple_problem(sp, kernel, eps, 0.05, 20.0, {0.2, 0.1},
                                            SpatialMeasure{{{0.5, 0.0}, {-0.3, 0.4}}});
    const Vec j = kernel.jnu_row(sp, problem.nu, problem.x);
    Vec softmax(sp.size());
    double z = 0.0;
    for (int k = 0; k < sp.size(); ++k) {
        softmax[k] = std::exp(j[k] / eps);
        z += sp.weights()[k] * softmax[k];
    }
    for (double& v : softmax) v /= z;

    const MinimizerCertificate cert = minimize_g(problem, 1e-11);
    for (int k = 0; k < sp.size(); ++k) CHECK(std::abs(cert.ell_star.values[k] - softmax[k]) < 1e-8);
}

TEST_CASE("minimizer certification: optimality, quadratic growth, variational inequality") {
    const StrategySpace sp = StrategySpace::uniform_grid(3, 2.0);
    Rng rng(2);
    const std::vector<PayoffKernel> kernels = {zero_kernel(), cosine_kernel(0.4),
                                               cosine_kernel(0.1)};
    for (const auto& kernel : kernels) {
        const double eps = 0.5, r = 0.1, R = 5.0;
        SpatialMeasure nu{{random_ball_position(rng, 2, 1.0), random_ball_position(rng, 2, 1.0)}};
        const GProblem problem =
            simple_problem(sp, kernel, eps, r, R, random_ball_position(rng, 2, 1.0), nu);
        const MinimizerCertificate cert = minimize_g(problem, 1e-10);
        const double g_star = g_value(problem, cert.ell_star);
        const double modulus = eps / (2.0 * R);

        const Vec df = problem.kernel.dF_row(sp, problem.nu, problem.x, cert.ell_star.values);
        for (int it = 0; it < 300; ++it) {
            const LabelDensity ell = random_density(sp, rng, r, R);
            const double g = g_value(problem, ell);
            CHECK(g >= g_star - 1e-10);

            Vec diff(sp.size());
            for (int k = 0; k < sp.size(); ++k) diff[k] = ell.values[k] - cert.ell_star.values[k];
            const double dist2 = std::pow(lp_norm(sp, diff, 2.0), 2);
            CHECK(g - g_star >= modulus * dist2 - 1e-8);

            // first-order optimality: <dF + eps log l*, l - l*> >= -tol
            double pairing = 0.0;
            for (int k = 0; k < sp.size(); ++k)
                pairing += sp.weights()[k] *
                           (df[k] + eps * std::log(cert.ell_star.values[k])) * diff[k];
            CHECK(pairing >= -1e-7);
        }
    }
}

TEST_CASE("stationary labels: the fast drift vanishes at an interior minimizer") {
    const StrategySpace sp = StrategySpace::uniform_grid(6, 2.0);
    const PayoffKernel kernel = cosine_kernel(0.2);
    const double eps = 0.5;
    const GProblem problem = simple_problem(sp, kernel, eps, 0.05, 20.0, {0.3, -0.2},
                                            SpatialMeasure{{{0.0, 0.0}, {0.8, -0.5}}});
    const MinimizerCertificate cert = minimize_g(problem, 1e-12);

    const AgentState y{problem.x, cert.ell_star};
    const LabelTangent t = undisclosed_operator(sp, kernel, problem.nu, y);
    const Vec h = entropy_drift(sp, cert.ell_star);
    for (int k = 0; k < sp.size(); ++k) CHECK(std::abs(t.v[k] + eps * h[k]) < 1e-7);
}

TEST_CASE("gibbs reference") {
    SUBCASE("constant payoff gives the uniform density") {
        const StrategySpace sp = StrategySpace::uniform_grid(5, 2.0);
        const GProblem problem = simple_problem(sp, zero_kernel(), 0.7, 0.1, 5.0);
        const GibbsResult res = gibbs_reference(problem);
        CHECK(!res.box_active);
        for (double v : res.ell.values) CHECK(std::abs(v - 1.0) < 1e-14);
    }

    SUBCASE("two-node hand KKT solution") {
        const StrategySpace sp =
            StrategySpace({{0.25}, {0.75}}, Metric::Euclidean, {0.5, 0.5}, 2.0);
        const GProblem problem = simple_problem(sp, step_kernel(), 1.0, 0.01, 50.0);
        const GibbsResult res = gibbs_reference(problem);
        CHECK(!res.box_active);
        CHECK(std::abs(res.ell.values[0] - 1.4621171572600098) < 1e-14);
        CHECK(std::abs(res.ell.values[1] - 0.53788284273999024) < 1e-14);
    }

    SUBCASE("clipped case agrees with minimize_g") {
        const StrategySpace sp =
            StrategySpace({{0.25}, {0.75}}, Metric::Euclidean, {0.5, 0.5}, 2.0);
        const GProblem problem = simple_problem(sp, step_kernel(), 1.0, 0.9, 1.2);
        const GibbsResult res = gibbs_reference(problem);
        CHECK(res.box_active);
        // hand solution of the clipped tilt: (1.1, 0.9)
        CHECK(std::abs(res.ell.values[0] - 1.1) < 1e-10);
        CHECK(std::abs(res.ell.values[1] - 0.9) < 1e-10);
        const MinimizerCertificate cert = minimize_g(problem, 1e-11);
        for (int k = 0; k < 2; ++k)
            CHECK(std::abs(res.ell.values[k] - cert.ell_star.values[k]) < 1e-6);
    }
}

TEST_CASE("delta map") {
    const StrategySpace sp = StrategySpace::uniform_grid(5, 2.0);
    const PayoffKernel kernel = cosine_kernel(0.3);
    BoxBounds box{0.05, 20.0, 0.5, kernel.C_T()};
    Rng rng(3);

    SUBCASE("deterministic") {
        const SpatialMeasure nu{{{0.1, 0.2}, {-0.4, 0.5}}};
        const Vec x{0.3, 0.3};
        const LabelDensity a = delta_map(sp, kernel, nu, x, 0.5, box, 1e-10);
        const LabelDensity b = delta_map(sp, kernel, nu, x, 0.5, box, 1e-10);
        for (int k = 0; k < sp.size(); ++k) CHECK(a.values[k] == b.values[k]);
    }

    SUBCASE("zero kernel maps everything to the uniform density") {
        const PayoffKernel z = zero_kernel();
        for (int it = 0; it < 5; ++it) {
            const SpatialMeasure nu{
                {random_ball_position(rng, 2, 1.0), random_ball_position(rng, 2, 1.0)}};
            const LabelDensity ell =
                delta_map(sp, z, nu, random_ball_position(rng, 2, 1.0), 0.5, box, 1e-11);
            for (double v : ell.values) CHECK(std::abs(v - 1.0) < 1e-9);
        }
    }

    SUBCASE("continuity: perturbation ratios stay bounded") {
        double A = 0.0;
        for (int it = 0; it < 50; ++it) {
            const Vec x1 = random_ball_position(rng, 2, 1.0);
            Vec x2 = x1;
            x2[0] += rng.uniform(1e-4, 1e-2);
            SpatialMeasure nu1{
                {random_ball_position(rng, 2, 1.0), random_ball_position(rng, 2, 1.0)}};
            SpatialMeasure nu2 = nu1;
            nu2.points[0][1] += rng.uniform(1e-4, 1e-2);

            const LabelDensity d1 = delta_map(sp, kernel, nu1, x1, 0.5, box, 1e-11);
            const LabelDensity d2 = delta_map(sp, kernel, nu2, x2, 0.5, box, 1e-11);
            Vec diff(sp.size());
            for (int k = 0; k < sp.size(); ++k) diff[k] = d1.values[k] - d2.values[k];
            const double denom = euclid_dist(x1, x2) + w1(nu1, nu2).value;
            A = std::max(A, lp_norm(sp, diff, 2.0) / denom);
        }
        CHECK(std::isfinite(A));
        CHECK(A < 1e3);
    }

    SUBCASE("memoized wrapper returns cached results") {
        DeltaMap cached(sp, kernel, 0.5, box, 1e-10);
        const SpatialMeasure nu{{{0.1, 0.2}, {-0.4, 0.5}}};
        const LabelDensity a = cached(nu, {0.3, 0.3});
        const LabelDensity b = cached(nu, {0.3, 0.3});
        for (int k = 0; k < sp.size(); ++k) CHECK(a.values[k] == b.values[k]);
    }
}

TEST_CASE("limit velocity") {
    const StrategySpace sp = StrategySpace::uniform_grid(4, 2.0);
    const PayoffKernel z = zero_kernel();
    BoxBounds box{0.25, 4.0, 0.5, 0.0};

    SUBCASE("velocity that ignores labels passes straight through") {
        VelocityField v;
        v.tag = "constant";
        v.M_v = 2.0;
        v.eval = [](const StrategySpace&, const EmpiricalMeasure&, const AgentState&) {
            return Vec{1.5, -0.5};
        };
        const Vec w = limit_velocity(sp, v, z, one_atom({0.0, 0.0}), {0.2, 0.2}, 0.5, box, 1e-10);
        CHECK(w[0] == 1.5);
        CHECK(w[1] == -0.5);
    }

    SUBCASE("single atom with zero payoff: v sees the uniform label") {
        // label-steering field: w = dir * int ubar * 1 deta = dir * 0.5
        VelocityField v;
        v.tag = "label_steer";
        v.M_v = 1.0;
        v.eval = [](const StrategySpace& s, const EmpiricalMeasure&, const AgentState& y) {
            double m = 0.0;
            for (int k = 0; k < s.size(); ++k)
                m += s.weights()[k] * s.node_coord(k) * y.ell.values[k];
            return Vec{m, 0.0};
        };
        const Vec w = limit_velocity(sp, v, z, one_atom({0.3, -0.1}), {0.3, -0.1}, 0.5, box,
                                     1e-11);
        CHECK(std::abs(w[0] - 0.5) < 1e-9);
        CHECK(w[1] == 0.0);
    }

    SUBCASE("Lipschitz probe of w on random pairs") {
        const PayoffKernel kernel = cosine_kernel(0.2);
        VelocityField v;
        v.tag = "mean_revert";
        v.M_v = 1.0;
        v.eval = [](const StrategySpace&, const EmpiricalMeasure& psi, const AgentState& y) {
            Vec out(y.x.size(), 0.0);
            for (const auto& atom : psi.atoms)
                for (std::size_t i = 0; i < out.size(); ++i) out[i] += atom.x[i] - y.x[i];
            for (double& o : out) o /= psi.size();
            return out;
        };
        Rng rng(4);
        double xi = 0.0;
        for (int it = 0; it < 20; ++it) {
            const Vec x1 = random_ball_position(rng, 2, 1.0);
            Vec x2 = x1;
            x2[0] += rng.uniform(1e-3, 1e-2);
            SpatialMeasure nu1{
                {random_ball_position(rng, 2, 1.0), random_ball_position(rng, 2, 1.0)}};
            SpatialMeasure nu2 = nu1;
            nu2.points[1][0] += rng.uniform(1e-3, 1e-2);
            const Vec w1v = limit_velocity(sp, v, kernel, nu1, x1, 0.5, box, 1e-10);
            const Vec w2v = limit_velocity(sp, v, kernel, nu2, x2, 0.5, box, 1e-10);
            Vec dw(w1v.size());
            for (std::size_t i = 0; i < dw.size(); ++i) dw[i] = w1v[i] - w2v[i];
            xi = std::max(xi, euclid_norm(dw) /
                                  (euclid_dist(x1, x2) + w1(nu1, nu2).value));
        }
        CHECK(std::isfinite(xi));
        CHECK(xi < 100.0);
    }
}

TEST_CASE("integrate_limit") {
    const StrategySpace sp = StrategySpace::uniform_grid(4, 2.0);
    const PayoffKernel z = zero_kernel();
    BoxBounds box{0.25, 4.0, 0.5, 0.0};

    SUBCASE("zero velocity keeps positions fixed") {
        VelocityField v;
        v.tag = "zero";
        v.M_v = 1e-12;
        v.eval = [](const StrategySpace&, const EmpiricalMeasure&, const AgentState& y) {
            return Vec(y.x.size(), 0.0);
        };
        const SpatialTrajectory traj =
            integrate_limit(sp, v, z, {{0.5, -0.5}, {1.0, 0.0}}, 0.5, box, 1.0, 0.05,
                            Method::Euler, 1e-9, 5);
        for (const auto& snap : traj.positions)
            for (std::size_t i = 0; i < snap.size(); ++i) {
                CHECK(snap[i][0] == traj.positions[0][i][0]);
                CHECK(snap[i][1] == traj.positions[0][i][1]);
            }
        CHECK(traj.bounded_ok);
    }

    SUBCASE("single agent under constant velocity moves on a line") {
        VelocityField v;
        v.tag = "constant";
        v.M_v = 1.0;
        v.eval = [](const StrategySpace&, const EmpiricalMeasure&, const AgentState&) {
            return Vec{0.5, -0.25};
        };
        const SpatialTrajectory traj = integrate_limit(sp, v, z, {{0.0, 0.0}}, 0.5, box, 1.0,
                                                       0.05, Method::Rk4, 1e-9, 5);
        CHECK(std::abs(traj.positions.back()[0][0] - 0.5) < 1e-12);
        CHECK(std::abs(traj.positions.back()[0][1] + 0.25) < 1e-12);
    }
}

TEST_CASE("linear_fit recovers an exact line") {
    std::vector<double> x = {0.0, 1.0, 2.0, 3.0};
    std::vector<double> y = {1.0, 3.0, 5.0, 7.0};
    double slope, icpt, r2;
    linear_fit(x, y, &slope, &icpt, &r2);
    CHECK(std::abs(slope - 2.0) < 1e-12);
    CHECK(std::abs(icpt - 1.0) < 1e-12);
    CHECK(std::abs(r2 - 1.0) < 1e-12);
}

TEST_CASE("fast_reaction_study rejects bad lambda grids") {
    FastStudySetup setup;
    setup.space = StrategySpace::uniform_grid(4, 2.0);
    setup.kernel = cosine_kernel(0.025);
    CHECK_THROWS_AS(fast_reaction_study(setup, {10.0, 20.0, 30.0}), InsufficientSamples);
    CHECK_THROWS_AS(fast_reaction_study(setup, {10.0, 20.0, 40.0, 80.0}), InsufficientSamples);
}

TEST_CASE("mean_field_study: replicated initial atoms give zero distances") {
    SystemDef def;
    def.space = StrategySpace::uniform_grid(4, 2.0);
    auto kernel = std::make_shared<PayoffKernel>(cosine_kernel(0.025));
    def.transfer = TransferOperator::undisclosed(kernel);
    VelocityField v;
    v.tag = "mean_revert";
    v.M_v = 1.0;
    v.eval = [](const StrategySpace&, const EmpiricalMeasure& psi, const AgentState& y) {
        Vec out(y.x.size(), 0.0);
        for (const auto& atom : psi.atoms)
            for (std::size_t i = 0; i < out.size(); ++i) out[i] += atom.x[i] - y.x[i];
        for (double& o : out) o /= psi.size();
        return out;
    };
    def.velocity = v;
    def.eps = 0.5;
    def.lambda = 1.0;
    def.C_T = kernel->C_T();
    def.box = select_box_bounds(def.eps, def.C_T);
    def.theta_eps = step_bound_theta(def.eps, def.box, def.C_T, def.box.omega);
    def.M_eps = sublinearity_constant(def.box, def.C_T, v.M_v);

    Rng rng(5);
    const AgentState proto{random_ball_position(rng, 2, 1.0),
                           random_density(def.space, rng, def.box.r_eps, def.box.R_eps)};
    const std::vector<AgentState> pool(8, proto);
    const MeanFieldResult res = mean_field_study(def, pool, {2, 4, 8}, 0.2, 1e-2, 3);
    for (double d : res.sup_w1) CHECK(d < 1e-12);
    for (double d : res.init_w1) CHECK(d < 1e-15);
}
