#include "entroflow/measures.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace entroflow {

double state_distance(const StrategySpace& space, const AgentState& y1, const AgentState& y2,
                      double p) {
    if (y1.x.size() != y2.x.size())
        throw DimensionMismatch("state_distance: position dimensions differ");
    if (y1.ell.values.size() != y2.ell.values.size())
        throw DimensionMismatch("state_distance: label grids differ");
    Vec diff(y1.ell.values.size());
    for (std::size_t k = 0; k < diff.size(); ++k) diff[k] = y1.ell.values[k] - y2.ell.values[k];
    return euclid_dist(y1.x, y2.x) + lp_norm(space, diff, p);
}

// Hungarian method with potentials and shortest augmenting paths (exact,
// O(n^3), dense costs).
std::vector<int> solve_assignment(const std::vector<std::vector<double>>& cost) {
    const int n = static_cast<int>(cost.size());
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
    std::vector<int> p(n + 1, 0), way(n + 1, 0);
    for (int i = 1; i <= n; ++i) {
        p[0] = i;
        int j0 = 0;
        std::vector<double> minv(n + 1, inf);
        std::vector<char> used(n + 1, false);
        do {
            used[j0] = true;
            const int i0 = p[j0];
            int j1 = -1;
            double delta = inf;
            for (int j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const double cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            const int j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0 != 0);
    }
    std::vector<int> row_to_col(n, -1);
    for (int j = 1; j <= n; ++j)
        if (p[j] != 0) row_to_col[p[j] - 1] = j - 1;
    return row_to_col;
}

namespace {

long long lcm_ll(long long a, long long b) {
    return a / std::gcd(a, b) * b;
}

template <typename Atom>
std::vector<const Atom*> padded_atoms(const std::vector<Atom>& atoms, long long target) {
    const long long rep = target / static_cast<long long>(atoms.size());
    std::vector<const Atom*> out;
    out.reserve(static_cast<std::size_t>(target));
    for (const auto& a : atoms)
        for (long long r = 0; r < rep; ++r) out.push_back(&a);
    return out;
}

template <typename Atom, typename Dist>
W1Result w1_impl(const std::vector<Atom>& a1, const std::vector<Atom>& a2, Dist dist) {
    if (a1.empty() || a2.empty()) throw EmptyMeasure("w1: empty measure");
    const long long n1 = static_cast<long long>(a1.size());
    const long long n2 = static_cast<long long>(a2.size());
    const long long n = lcm_ll(n1, n2);
    if (n * std::max(n1, n2) > 1000000LL)
        throw Error("w1: padded atom count too large (lcm blow-up guard)");

    const auto left = padded_atoms(a1, n);
    const auto right = padded_atoms(a2, n);
    std::vector<std::vector<double>> cost(n, std::vector<double>(n));
    for (long long i = 0; i < n; ++i)
        for (long long j = 0; j < n; ++j) cost[i][j] = dist(*left[i], *right[j]);

    W1Result res;
    res.plan.sigma = solve_assignment(cost);
    res.plan.edge_costs.resize(n);
    double total = 0.0;
    for (long long i = 0; i < n; ++i) {
        res.plan.edge_costs[i] = cost[i][res.plan.sigma[i]];
        total += res.plan.edge_costs[i];
    }
    res.plan.cost = total / static_cast<double>(n);
    res.value = res.plan.cost;
    return res;
}

} // namespace

W1Result w1(const StrategySpace& space, const EmpiricalMeasure& mu1, const EmpiricalMeasure& mu2) {
    const double p = space.p();
    return w1_impl(mu1.atoms, mu2.atoms, [&](const AgentState& a, const AgentState& b) {
        return state_distance(space, a, b, p);
    });
}

W1Result w1(const SpatialMeasure& mu1, const SpatialMeasure& mu2) {
    return w1_impl(mu1.points, mu2.points,
                   [](const Vec& a, const Vec& b) { return euclid_dist(a, b); });
}

double w1_dual_check(const StrategySpace& space, const EmpiricalMeasure& mu1,
                     const EmpiricalMeasure& mu2,
                     const std::vector<std::function<double(const AgentState&)>>& witnesses) {
    if (mu1.atoms.empty() || mu2.atoms.empty()) throw EmptyMeasure("w1_dual_check: empty measure");
    const double p = space.p();

    std::vector<const AgentState*> all;
    for (const auto& a : mu1.atoms) all.push_back(&a);
    for (const auto& a : mu2.atoms) all.push_back(&a);

    double best = -std::numeric_limits<double>::infinity();
    for (const auto& phi : witnesses) {
        // 1-Lipschitz certification on the atom set
        for (std::size_t i = 0; i < all.size(); ++i) {
            for (std::size_t j = i + 1; j < all.size(); ++j) {
                const double d = state_distance(space, *all[i], *all[j], p);
                const double gap = std::abs(phi(*all[i]) - phi(*all[j]));
                if (gap > d * (1.0 + 1e-9) + 1e-12)
                    throw WitnessNotLipschitz("w1_dual_check: witness exceeds Lipschitz 1 on atoms");
            }
        }
        double s1 = 0.0, s2 = 0.0;
        for (const auto& a : mu1.atoms) s1 += phi(a);
        for (const auto& a : mu2.atoms) s2 += phi(a);
        best = std::max(best, s1 / mu1.size() - s2 / mu2.size());
    }
    return best;
}

double first_moment(const StrategySpace& space, const EmpiricalMeasure& mu) {
    if (mu.atoms.empty()) throw EmptyMeasure("first_moment: empty measure");
    double s = 0.0;
    for (const auto& a : mu.atoms) s += state_norm(space, a);
    return s / mu.size();
}

double first_moment(const SpatialMeasure& mu) {
    if (mu.points.empty()) throw EmptyMeasure("first_moment: empty measure");
    double s = 0.0;
    for (const auto& x : mu.points) s += euclid_norm(x);
    return s / mu.size();
}

SpatialMeasure spatial_marginal(const EmpiricalMeasure& lambda) {
    SpatialMeasure nu;
    nu.points.reserve(lambda.atoms.size());
    for (const auto& a : lambda.atoms) nu.points.push_back(a.x);
    return nu;
}

} // namespace entroflow
