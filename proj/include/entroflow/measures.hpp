#pragma once

#include <functional>
#include <vector>

#include "entroflow/state.hpp"

namespace entroflow {

// Uniform atomic measure (1/N) sum delta_{y_i} on the product state space.
struct EmpiricalMeasure {
    std::vector<AgentState> atoms;

    int size() const { return static_cast<int>(atoms.size()); }
};

// Spatial marginal: atoms carry positions only.
struct SpatialMeasure {
    std::vector<Vec> points;

    int size() const { return static_cast<int>(points.size()); }
};

// Optimal assignment between two uniform atomic measures of equal (padded)
// atom count: sigma maps atoms of the first measure onto the second.
struct TransportPlan {
    std::vector<int> sigma;
    std::vector<double> edge_costs; // per-atom ground cost c(y_i, z_sigma(i))
    double cost = 0.0;              // (1/N) sum_i edge_costs[i]
};

struct W1Result {
    double value;
    TransportPlan plan;
};

// |x1-x2| + ||l1-l2||_{L^p}
double state_distance(const StrategySpace& space, const AgentState& y1, const AgentState& y2,
                      double p);

// Exact W1 via an O(n^3) shortest-augmenting-path assignment on the dense
// cost matrix. Unequal atom counts are padded by replicating atoms to the lcm
// (masses stay uniform); the padded count is guarded against blow-up.
W1Result w1(const StrategySpace& space, const EmpiricalMeasure& mu1, const EmpiricalMeasure& mu2);
W1Result w1(const SpatialMeasure& mu1, const SpatialMeasure& mu2);

// Kantorovich dual lower bound: max over witnesses of int phi d(mu1 - mu2).
// Each witness must be 1-Lipschitz on the atoms (pairwise ratio check).
double w1_dual_check(const StrategySpace& space, const EmpiricalMeasure& mu1,
                     const EmpiricalMeasure& mu2,
                     const std::vector<std::function<double(const AgentState&)>>& witnesses);

// m1 = (1/N) sum ||y_i||_Ybar  (positions only in the spatial case)
double first_moment(const StrategySpace& space, const EmpiricalMeasure& mu);
double first_moment(const SpatialMeasure& mu);

SpatialMeasure spatial_marginal(const EmpiricalMeasure& lambda);

// exact solver on a dense cost matrix; returns the column assigned to each row
std::vector<int> solve_assignment(const std::vector<std::vector<double>>& cost);

} // namespace entroflow
