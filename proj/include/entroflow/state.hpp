#pragma once

#include <cmath>

#include "entroflow/strategy_space.hpp"

namespace entroflow {

inline double euclid_norm(const Vec& x) {
    double s = 0.0;
    for (double v : x) s += v * v;
    return std::sqrt(s);
}

inline double euclid_dist(const Vec& a, const Vec& b) {
    if (a.size() != b.size()) throw DimensionMismatch("euclid_dist: dimension mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return std::sqrt(s);
}

// y = (x, l): position in R^d plus a label density on the shared grid.
struct AgentState {
    Vec x;
    LabelDensity ell;
};

// ||y||_Ybar = |x| + ||l||_{L^p}
inline double state_norm(const StrategySpace& space, const AgentState& y) {
    return euclid_norm(y.x) + lp_norm(space, y.ell.values, space.p());
}

} // namespace entroflow
