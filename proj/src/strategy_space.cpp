#include "entroflow/strategy_space.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <json.hpp>

namespace entroflow {

namespace {

double tlogt(double t) {
    return t > 0.0 ? t * std::log(t) : 0.0;
}

} // namespace

StrategySpace::StrategySpace() : StrategySpace({{1.0}}, Metric::Discrete, {1.0}, 1.0) {}

StrategySpace::StrategySpace(std::vector<Vec> nodes, Metric metric, Vec weights, double p)
    : nodes_(std::move(nodes)), metric_(metric), weights_(std::move(weights)), p_(p) {
    if (nodes_.empty() || nodes_.size() != weights_.size())
        throw InvalidBounds("StrategySpace: nodes/weights size mismatch or empty");
    if (!(p_ >= 1.0))
        throw InvalidBounds("StrategySpace: p must be >= 1");
    double total = 0.0;
    for (double w : weights_) {
        if (!(w > 0.0))
            throw InvalidBounds("StrategySpace: eta must have full support (every weight > 0)");
        total += w;
    }
    if (std::abs(total - 1.0) > 1e-12)
        throw InvalidBounds("StrategySpace: weights must sum to 1 within 1e-12");
    const std::size_t dim = nodes_.front().size();
    for (const auto& n : nodes_)
        if (n.size() != dim)
            throw DimensionMismatch("StrategySpace: inconsistent node dimensions");
}

StrategySpace StrategySpace::uniform_grid(int m, double p) {
    if (m < 1) throw InvalidBounds("uniform_grid: need at least one node");
    std::vector<Vec> nodes(m);
    for (int k = 0; k < m; ++k) nodes[k] = {(k + 0.5) / m};
    return StrategySpace(std::move(nodes), Metric::Euclidean, Vec(m, 1.0 / m), p);
}

StrategySpace StrategySpace::discrete(int h, double p) {
    if (h < 1) throw InvalidBounds("discrete: need at least one label");
    std::vector<Vec> nodes(h);
    for (int k = 0; k < h; ++k) nodes[k] = {static_cast<double>(k + 1)};
    return StrategySpace(std::move(nodes), Metric::Discrete, Vec(h, 1.0 / h), p);
}

double StrategySpace::distance(int i, int j) const {
    if (metric_ == Metric::Discrete) return i == j ? 0.0 : 1.0;
    double s = 0.0;
    for (std::size_t c = 0; c < nodes_[i].size(); ++c) {
        const double d = nodes_[i][c] - nodes_[j][c];
        s += d * d;
    }
    return std::sqrt(s);
}

double StrategySpace::integrate(const Vec& f) const {
    if (f.size() != weights_.size())
        throw DimensionMismatch("integrate: vector does not match grid");
    double s = 0.0;
    for (std::size_t k = 0; k < f.size(); ++k) s += weights_[k] * f[k];
    return s;
}

std::string StrategySpace::to_json() const {
    nlohmann::json j;
    j["nodes"] = nodes_;
    j["weights"] = weights_;
    j["metric"] = metric_ == Metric::Euclidean ? "euclidean" : "discrete";
    j["p"] = p_;
    return j.dump();
}

StrategySpace StrategySpace::from_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    const std::string m = j.at("metric").get<std::string>();
    if (m != "euclidean" && m != "discrete")
        throw ConfigError("StrategySpace: metric must be 'euclidean' or 'discrete'");
    return StrategySpace(j.at("nodes").get<std::vector<Vec>>(),
                         m == "euclidean" ? Metric::Euclidean : Metric::Discrete,
                         j.at("weights").get<Vec>(), j.at("p").get<double>());
}

LabelDensity LabelDensity::uniform(const StrategySpace& space, double r, double R) {
    return LabelDensity{Vec(space.size(), 1.0), r, R};
}

void LabelDensity::validate(const StrategySpace& space, double tol_mass) const {
    if (static_cast<int>(values.size()) != space.size())
        throw DimensionMismatch("LabelDensity: size does not match grid");
    for (double v : values) {
        if (!std::isfinite(v)) throw NonFiniteValue("LabelDensity: non-finite value");
        if (v < r || v > R) throw InvalidBounds("LabelDensity: box bounds violated");
    }
    if (std::abs(mass(space) - 1.0) > tol_mass)
        throw InvalidBounds("LabelDensity: mass invariant violated");
}

double negative_entropy(const StrategySpace& space, const LabelDensity& ell) {
    double s = 0.0;
    const Vec& eta = space.weights();
    for (std::size_t k = 0; k < ell.values.size(); ++k) {
        const double v = ell.values[k];
        if (v < 0.0 || !std::isfinite(v))
            throw NonFiniteValue("negative_entropy: density values must be >= 0 and finite");
        s += eta[k] * tlogt(v);
    }
    return s;
}

Vec entropy_drift(const StrategySpace& space, const LabelDensity& ell) {
    for (double v : ell.values)
        if (!(v > 0.0))
            throw NonFiniteValue("entropy_drift: requires strictly positive density");
    const double I = negative_entropy(space, ell);
    Vec h(ell.values.size());
    for (std::size_t k = 0; k < h.size(); ++k)
        h[k] = ell.values[k] * (I - std::log(ell.values[k]));
    return h;
}

EntropyBounds entropy_bounds(double r, double R) {
    if (!(r > 0.0 && r < 1.0 && R > 1.0 && std::isfinite(R)))
        throw InvalidBounds("entropy_bounds: need 0 < r < 1 < R < inf");
    EntropyBounds b;
    b.alpha = (R - 1.0) * r / (R - r);
    b.k = b.alpha * std::log(r) + (1.0 - b.alpha) * std::log(R);
    b.h_low = -R * std::log(R);
    b.h_high = R * b.k + 1.0 / std::exp(1.0);
    return b;
}

double entropy_lipschitz(double r, double R) {
    const EntropyBounds b = entropy_bounds(r, R);
    const double lp = std::max(std::abs(1.0 + std::log(r)), std::abs(1.0 + std::log(R)));
    return (R + 1.0) * lp + b.k;
}

EntropyBounds BoxBounds::entropy() const {
    return entropy_bounds(r_eps, R_eps);
}

bool BoxBounds::certify() const {
    if (!(r_eps > 0.0 && r_eps < 1.0 && R_eps > 1.0)) return false;
    const double lhs_r = eps * std::log(3.0 / (4.0 * r_eps));
    const double rhs_r = C_T * omega(4.0 / 3.0 * r_eps) / r_eps;
    if (lhs_r < rhs_r) return false;
    const double alpha = (R_eps - 1.0) * r_eps / (R_eps - r_eps);
    const double lhs_R = alpha * std::log(R_eps / r_eps);
    const double rhs_R = 2.0 * C_T * omega(R_eps) / (eps * R_eps);
    return lhs_R >= rhs_R;
}

BoxBounds select_box_bounds(double eps, double C_T, const GrowthFn& omega) {
    if (!(eps > 0.0)) throw InvalidBounds("select_box_bounds: eps must be > 0");
    if (C_T < 0.0) throw InvalidBounds("select_box_bounds: C_T must be >= 0");

    BoxBounds box;
    box.eps = eps;
    box.C_T = C_T;
    box.omega = omega;
    box.r_eps = 0.0;
    for (int j = 1; j <= 64; ++j) {
        const double r = std::ldexp(1.0, -j);
        if (eps * std::log(3.0 / (4.0 * r)) >= C_T * omega(4.0 / 3.0 * r) / r) {
            box.r_eps = r;
            break;
        }
    }
    if (box.r_eps == 0.0)
        throw NoFeasibleBounds("select_box_bounds: no feasible r_eps = 2^-j with j <= 64");

    box.R_eps = 0.0;
    for (int j = 1; j <= 64; ++j) {
        const double R = std::ldexp(1.0, j);
        const double alpha = (R - 1.0) * box.r_eps / (R - box.r_eps);
        if (alpha * std::log(R / box.r_eps) >= 2.0 * C_T * omega(R) / (eps * R)) {
            box.R_eps = R;
            break;
        }
    }
    if (box.R_eps == 0.0)
        throw NoFeasibleBounds(
            "select_box_bounds: no feasible R_eps = 2^j with j <= 64 (eps too small for C_T)");

    if (!box.certify())
        throw NoFeasibleBounds("select_box_bounds: self-certification failed");
    return box;
}

GrowthFn GrowthFn::from_tag(const std::string& tag) {
    if (tag == "identity") return identity();
    if (tag == "sqrt1p")
        // omega(s) = sqrt(s(1+s)): monotone, omega(s)/s finite at 0+ and inf
        return {"sqrt1p", [](double s) { return std::sqrt(s * (1.0 + s)); }};
    throw ConfigError("GrowthFn: unknown tag '" + tag + "'");
}

double lp_norm(const StrategySpace& space, const Vec& f, double p) {
    if (static_cast<int>(f.size()) != space.size())
        throw DimensionMismatch("lp_norm: vector does not match grid");
    if (std::isinf(p)) {
        double m = 0.0;
        for (double v : f) m = std::max(m, std::abs(v));
        return m;
    }
    if (!(p >= 1.0)) throw InvalidBounds("lp_norm: p must be >= 1 or infinity");
    double s = 0.0;
    const Vec& eta = space.weights();
    for (std::size_t k = 0; k < f.size(); ++k) s += eta[k] * std::pow(std::abs(f[k]), p);
    return std::pow(s, 1.0 / p);
}

LabelDensity renormalize(const StrategySpace& space, const Vec& raw, double r, double R,
                         double* correction) {
    if (static_cast<int>(raw.size()) != space.size())
        throw DimensionMismatch("renormalize: vector does not match grid");
    for (double v : raw)
        if (!(v >= r && v <= R))
            throw InvalidBounds("renormalize: input must already satisfy the box");

    const Vec& eta = space.weights();
    double mass = 0.0;
    for (std::size_t k = 0; k < raw.size(); ++k) mass += eta[k] * raw[k];
    const double defect = 1.0 - mass;
    if (correction) *correction = std::abs(defect);
    if (std::abs(defect) > 1e-6)
        throw CorrectionTooLarge("renormalize: mass defect exceeds 1e-6, step too large");

    LabelDensity out{raw, r, R};
    if (defect == 0.0) return out;

    // headroom-proportional shift keeps the box exactly and lands mass on 1
    double head = 0.0;
    if (defect > 0.0) {
        for (std::size_t k = 0; k < raw.size(); ++k) head += eta[k] * (R - raw[k]);
        if (head > 0.0)
            for (std::size_t k = 0; k < raw.size(); ++k)
                out.values[k] = raw[k] + defect * (R - raw[k]) / head;
    } else {
        for (std::size_t k = 0; k < raw.size(); ++k) head += eta[k] * (raw[k] - r);
        if (head > 0.0)
            for (std::size_t k = 0; k < raw.size(); ++k)
                out.values[k] = raw[k] + defect * (raw[k] - r) / head;
    }
    for (double& v : out.values) v = std::min(R, std::max(r, v));
    return out;
}

} // namespace entroflow
