#pragma once

#include "entroflow/rng.hpp"
#include "entroflow/state.hpp"

namespace entroflow {

// uniform point in the closed euclidean ball of the given radius (rejection
// from the cube; deterministic for a given rng state)
inline Vec random_ball_position(Rng& rng, int d, double radius) {
    Vec x(d);
    for (;;) {
        for (int i = 0; i < d; ++i) x[i] = rng.uniform(-radius, radius);
        if (euclid_norm(x) <= radius) return x;
    }
}

// Dirichlet-like density projected into C_{r,R}: exponential weights
// normalized to mass one, then blended toward the uniform density just far
// enough to sit strictly inside the box. concentration > 1 flattens.
inline LabelDensity random_density(const StrategySpace& space, Rng& rng, double r, double R,
                                   double concentration = 1.0) {
    const int m = space.size();
    Vec g(m);
    double mass = 0.0;
    for (int k = 0; k < m; ++k) {
        g[k] = rng.exponential() + concentration - 1.0;
        mass += space.weights()[k] * g[k];
    }
    for (double& v : g) v /= mass;

    double t_max = std::numeric_limits<double>::infinity();
    for (double v : g) {
        if (v < 1.0) t_max = std::min(t_max, (1.0 - r) / (1.0 - v));
        if (v > 1.0) t_max = std::min(t_max, (R - 1.0) / (v - 1.0));
    }
    const double t = std::min(1.0, 0.9 * t_max);
    for (double& v : g) v = 1.0 + t * (v - 1.0);
    double corr = 0.0;
    return renormalize(space, g, r, R, &corr);
}

} // namespace entroflow
