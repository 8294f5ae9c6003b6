#include <doctest.h>

#include <cmath>

#include "entroflow/sampling.hpp"
#include "entroflow/strategy_space.hpp"

using namespace entroflow;

namespace {

StrategySpace two_node() {
    return StrategySpace({{0.25}, {0.75}}, Metric::Euclidean, {0.5, 0.5}, 2.0);
}

} // namespace

TEST_CASE("negative entropy of the uniform density is zero") {
    for (int m : {1, 4, 16}) {
        const StrategySpace sp = StrategySpace::uniform_grid(m, 2.0);
        CHECK(std::abs(negative_entropy(sp, LabelDensity::uniform(sp, 0.0, 10.0))) == 0.0);
    }
}

TEST_CASE("negative entropy, two-node hand quadrature") {
    // 0.5 (1.5 ln 1.5 + 0.5 ln 0.5) computed by hand
    const StrategySpace sp = two_node();
    const LabelDensity ell{{1.5, 0.5}, 0.0, 2.0};
    CHECK(std::abs(negative_entropy(sp, ell) - 0.13081203594113696) < 1e-15);
}

TEST_CASE("negative entropy rejects negative values") {
    const StrategySpace sp = two_node();
    CHECK_THROWS_AS(negative_entropy(sp, LabelDensity{{1.5, -0.5}, 0.0, 2.0}), NonFiniteValue);
}

TEST_CASE("entropy stays in [0, k_{r,R}] on random box densities") {
    const StrategySpace sp = StrategySpace::uniform_grid(12, 2.0);
    const double r = 0.2, R = 3.0;
    const EntropyBounds eb = entropy_bounds(r, R);
    Rng rng(7);
    for (int it = 0; it < 200; ++it) {
        const LabelDensity ell = random_density(sp, rng, r, R);
        const double I = negative_entropy(sp, ell);
        CHECK(I >= -1e-12);
        CHECK(I <= eb.k + 1e-10);
    }
}

TEST_CASE("entropy drift: uniform gives zero, two-node hand value") {
    const StrategySpace sp = two_node();
    const Vec zero = entropy_drift(sp, LabelDensity::uniform(sp, 0.1, 2.0));
    CHECK(std::abs(zero[0]) == 0.0);
    CHECK(std::abs(zero[1]) == 0.0);

    const Vec h = entropy_drift(sp, LabelDensity{{1.5, 0.5}, 0.1, 2.0});
    CHECK(std::abs(h[0] - (-0.41197960825054113)) < 1e-15);
    CHECK(std::abs(h[1] - 0.41197960825054113) < 1e-15);
}

TEST_CASE("entropy drift has zero quadrature mean and sits in the component bounds") {
    const StrategySpace sp = StrategySpace::uniform_grid(9, 2.0);
    const double r = 0.2, R = 3.0;
    const EntropyBounds eb = entropy_bounds(r, R);
    Rng rng(11);
    for (int it = 0; it < 200; ++it) {
        const LabelDensity ell = random_density(sp, rng, r, R);
        const Vec h = entropy_drift(sp, ell);
        CHECK(std::abs(sp.integrate(h)) < 1e-12);
        for (double v : h) {
            CHECK(v >= eb.h_low - 1e-10);
            CHECK(v <= eb.h_high + 1e-10);
        }
    }
}

TEST_CASE("entropy drift needs strictly positive densities") {
    const StrategySpace sp = two_node();
    CHECK_THROWS_AS(entropy_drift(sp, LabelDensity{{2.0, 0.0}, 0.0, 2.0}), NonFiniteValue);
}

TEST_CASE("entropy bounds formulas") {
    const EntropyBounds b = entropy_bounds(0.5, 2.0);
    CHECK(std::abs(b.alpha - 1.0 / 3.0) < 1e-15);
    CHECK(std::abs(b.k - std::log(2.0) / 3.0) < 1e-15);
    CHECK(b.h_low < 0.0);
    CHECK(b.h_high > 0.0);

    // degenerate limit R -> 1+
    const EntropyBounds tight = entropy_bounds(0.5, 1.0 + 1e-9);
    CHECK(tight.alpha < 1e-8);
    CHECK(std::abs(tight.k) < 1e-8);

    CHECK_THROWS_AS(entropy_bounds(1.5, 2.0), InvalidBounds);
    CHECK_THROWS_AS(entropy_bounds(0.5, 0.9), InvalidBounds);
}

TEST_CASE("k_{r,R} is positive across a parameter sweep") {
    for (int i = 1; i <= 10; ++i) {
        for (int j = 1; j <= 10; ++j) {
            const double r = i / 11.0;
            const double R = 1.0 + j;
            CHECK(entropy_bounds(r, R).k > 0.0);
        }
    }
}

TEST_CASE("entropy drift Lipschitz bound L_{r,R}") {
    const StrategySpace sp = StrategySpace::uniform_grid(10, 2.0);
    const double r = 0.2, R = 3.0;
    const double L = entropy_lipschitz(r, R);
    Rng rng(3);
    for (int it = 0; it < 100; ++it) {
        const LabelDensity a = random_density(sp, rng, r, R);
        const LabelDensity b = random_density(sp, rng, r, R);
        const Vec ha = entropy_drift(sp, a);
        const Vec hb = entropy_drift(sp, b);
        Vec dh(sp.size()), dl(sp.size());
        for (int k = 0; k < sp.size(); ++k) {
            dh[k] = ha[k] - hb[k];
            dl[k] = a.values[k] - b.values[k];
        }
        CHECK(lp_norm(sp, dh, 2.0) <= L * lp_norm(sp, dl, 2.0) + 1e-12);
    }
}

TEST_CASE("select_box_bounds: zero operator gives (1/2, 2)") {
    const BoxBounds box = select_box_bounds(1.0, 0.0);
    CHECK(box.r_eps == 0.5);
    CHECK(box.R_eps == 2.0);
    CHECK(box.certify());
}

TEST_CASE("select_box_bounds self-certifies") {
    const double eps = 0.5, C_T = 0.1;
    const BoxBounds box = select_box_bounds(eps, C_T);
    CHECK(box.certify());
    const double r = box.r_eps, R = box.R_eps;
    CHECK(eps * std::log(3.0 / (4.0 * r)) >= C_T * (4.0 / 3.0 * r) / r);
    const double alpha = (R - 1.0) * r / (R - r);
    CHECK(alpha * std::log(R / r) >= 2.0 * C_T * R / (eps * R));
}

TEST_CASE("select_box_bounds: halving eps never enlarges the box from inside") {
    double prev_r = 1.0, prev_R = 1.0;
    bool first = true;
    for (double eps : {1.0, 0.5, 0.25}) {
        const BoxBounds box = select_box_bounds(eps, 0.1);
        if (!first) {
            CHECK(box.r_eps <= prev_r);
            CHECK(box.R_eps >= prev_R);
        }
        prev_r = box.r_eps;
        prev_R = box.R_eps;
        first = false;
    }
}

TEST_CASE("select_box_bounds: infeasible when eps is too small for C_T") {
    CHECK_THROWS_AS(select_box_bounds(1e-3, 10.0), NoFeasibleBounds);
    // the R_eps inequality needs alpha log(R/r) >= 2 C_T / eps with
    // alpha < r_eps, which the dyadic range j <= 64 cannot reach here
    CHECK_THROWS_AS(select_box_bounds(0.5, 1.0), NoFeasibleBounds);
}

TEST_CASE("lp_norm") {
    const StrategySpace sp = two_node();
    SUBCASE("constant vector") {
        for (double p : {1.0, 2.0, 7.0}) CHECK(std::abs(lp_norm(sp, {3.0, 3.0}, p) - 3.0) < 1e-15);
        CHECK(lp_norm(sp, {-3.0, -3.0}, std::numeric_limits<double>::infinity()) == 3.0);
    }
    SUBCASE("two-node hand value") { CHECK(std::abs(lp_norm(sp, {1.0, -1.0}, 2.0) - 1.0) < 1e-15); }
    SUBCASE("L1 below Lp since eta is a probability") {
        const StrategySpace grid = StrategySpace::uniform_grid(8, 3.0);
        Rng rng(5);
        for (int it = 0; it < 100; ++it) {
            Vec f(8);
            for (double& v : f) v = rng.uniform(-2.0, 2.0);
            CHECK(lp_norm(grid, f, 1.0) <= lp_norm(grid, f, 3.0) + 1e-12);
        }
    }
}

TEST_CASE("renormalize") {
    // 4-node grid: the weights 1/4 are exactly representable, so the "exact
    // input" case really is exact
    const StrategySpace sp = StrategySpace::uniform_grid(4, 2.0);
    SUBCASE("exact input is untouched") {
        double corr = 1.0;
        const LabelDensity out = renormalize(sp, Vec(4, 1.0), 0.2, 3.0, &corr);
        CHECK(corr == 0.0);
        for (double v : out.values) CHECK(v == 1.0);
    }
    SUBCASE("uniform 1e-9 excess collapses back to uniform") {
        double corr = 0.0;
        const LabelDensity out = renormalize(sp, Vec(4, 1.0 + 1e-9), 0.2, 3.0, &corr);
        CHECK(std::abs(corr - 1e-9) < 1e-12);
        for (double v : out.values) CHECK(std::abs(v - 1.0) < 1e-15);
    }
    SUBCASE("defect beyond the threshold is an error") {
        CHECK_THROWS_AS(renormalize(sp, Vec(4, 1.0 + 1e-3), 0.2, 3.0), CorrectionTooLarge);
    }
    SUBCASE("random small defects land mass on 1 and respect the box") {
        const StrategySpace sp6 = StrategySpace::uniform_grid(6, 2.0);
        Rng rng(9);
        for (int it = 0; it < 200; ++it) {
            const LabelDensity base = random_density(sp6, rng, 0.2, 3.0);
            Vec raw = base.values;
            const double shift = rng.uniform(-5e-7, 5e-7);
            for (double& v : raw) v = std::min(3.0, std::max(0.2, v + shift));
            const LabelDensity out = renormalize(sp6, raw, 0.2, 3.0);
            CHECK(std::abs(out.mass(sp6) - 1.0) < 1e-14);
            for (double v : out.values) {
                CHECK(v >= 0.2);
                CHECK(v <= 3.0);
            }
        }
    }
}

TEST_CASE("strategy space invariants and JSON round trip") {
    CHECK_THROWS_AS(StrategySpace({{0.0}, {1.0}}, Metric::Euclidean, {0.7, 0.300001}, 2.0),
                    InvalidBounds);
    CHECK_THROWS_AS(StrategySpace({{0.0}, {1.0}}, Metric::Euclidean, {1.0, 0.0}, 2.0),
                    InvalidBounds);

    const StrategySpace sp = StrategySpace::uniform_grid(5, 3.0);
    const StrategySpace back = StrategySpace::from_json(sp.to_json());
    CHECK(back.size() == 5);
    CHECK(back.p() == 3.0);
    CHECK(back.metric() == Metric::Euclidean);
    for (int k = 0; k < 5; ++k) {
        CHECK(back.node_coord(k) == sp.node_coord(k));
        CHECK(back.weights()[k] == sp.weights()[k]);
    }
}
