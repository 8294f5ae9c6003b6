#include "entroflow/scenario.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "entroflow/parallel.hpp"
#include "entroflow/sampling.hpp"

namespace entroflow {

using nlohmann::json;

namespace {

void reject_unknown(const json& obj, const std::string& where,
                    const std::set<std::string>& allowed) {
    for (auto it = obj.begin(); it != obj.end(); ++it)
        if (!allowed.count(it.key()))
            throw ConfigError("config: unknown key '" + it.key() + "' in " + where);
}

template <typename T>
void read_if(const json& obj, const char* key, T& out) {
    if (obj.contains(key) && !obj.at(key).is_null()) out = obj.at(key).get<T>();
}

} // namespace

ScenarioConfig ScenarioConfig::from_json_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const std::exception& e) {
        throw ConfigError(std::string("config: invalid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("config: top level must be an object");
    reject_unknown(j, "top level",
                   {"space", "kernel", "velocity", "eps", "lambda", "C_T", "N", "d", "T", "dt",
                    "method", "seed", "initial", "samples", "tolerances", "study", "threads"});

    ScenarioConfig cfg;
    if (j.contains("space")) {
        const json& s = j["space"];
        reject_unknown(s, "space", {"M", "metric", "p"});
        read_if(s, "M", cfg.space.M);
        read_if(s, "metric", cfg.space.metric);
        read_if(s, "p", cfg.space.p);
    }
    if (j.contains("kernel")) {
        const json& s = j["kernel"];
        reject_unknown(s, "kernel", {"tag", "a", "c", "rate"});
        read_if(s, "tag", cfg.kernel.tag);
        read_if(s, "a", cfg.kernel.a);
        read_if(s, "c", cfg.kernel.c);
        read_if(s, "rate", cfg.kernel.rate);
    }
    if (j.contains("velocity")) {
        const json& s = j["velocity"];
        reject_unknown(s, "velocity", {"tag", "c", "dir"});
        read_if(s, "tag", cfg.velocity.tag);
        read_if(s, "c", cfg.velocity.c);
        read_if(s, "dir", cfg.velocity.dir);
    }
    read_if(j, "eps", cfg.eps);
    read_if(j, "lambda", cfg.lambda);
    if (j.contains("C_T") && !j["C_T"].is_null()) cfg.C_T_override = j["C_T"].get<double>();
    read_if(j, "N", cfg.N);
    read_if(j, "d", cfg.d);
    read_if(j, "T", cfg.T);
    if (j.contains("dt") && !j["dt"].is_null()) cfg.dt = j["dt"].get<double>();
    read_if(j, "method", cfg.method);
    if (!j.contains("seed")) throw ConfigError("config: 'seed' is mandatory");
    cfg.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("initial")) {
        const json& s = j["initial"];
        reject_unknown(s, "initial", {"radius", "labels", "concentration"});
        read_if(s, "radius", cfg.initial.radius);
        read_if(s, "labels", cfg.initial.labels);
        read_if(s, "concentration", cfg.initial.concentration);
    }
    read_if(j, "samples", cfg.samples);
    if (j.contains("tolerances")) {
        const json& s = j["tolerances"];
        reject_unknown(s, "tolerances", {"tol_mass", "solver_tol"});
        read_if(s, "tol_mass", cfg.tol.tol_mass);
        read_if(s, "solver_tol", cfg.tol.solver_tol);
    }
    if (j.contains("study")) {
        const json& s = j["study"];
        reject_unknown(s, "study", {"lambdas", "Ns", "burn_in"});
        read_if(s, "lambdas", cfg.study.lambdas);
        read_if(s, "Ns", cfg.study.Ns);
        read_if(s, "burn_in", cfg.study.burn_in);
    }
    read_if(j, "threads", cfg.threads);

    if (!(cfg.eps > 0.0))
        throw ConfigError("config: eps must be > 0 (the entropic box is undefined at eps = 0)");
    if (cfg.N < 1 || cfg.d < 1 || cfg.space.M < 1)
        throw ConfigError("config: N, d and space.M must be positive");
    if (!(cfg.T >= 0.0)) throw ConfigError("config: T must be >= 0");
    if (!(cfg.lambda > 0.0)) throw ConfigError("config: lambda must be > 0");
    if (!(cfg.space.p >= 1.0) || std::isinf(cfg.space.p))
        throw ConfigError("config: dynamics require p in [1, inf)");
    if (cfg.method != "euler" && cfg.method != "rk4")
        throw ConfigError("config: method must be 'euler' or 'rk4'");
    if (cfg.samples < 2) throw ConfigError("config: samples must be >= 2");
    if (cfg.threads < 1) throw ConfigError("config: threads must be >= 1");
    return cfg;
}

ScenarioConfig ScenarioConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return from_json_text(ss.str());
}

std::string ScenarioConfig::canonical_json() const {
    json j;
    j["space"] = {{"M", space.M}, {"metric", space.metric}, {"p", space.p}};
    j["kernel"] = {{"tag", kernel.tag}, {"a", kernel.a}, {"c", kernel.c}, {"rate", kernel.rate}};
    j["velocity"] = {{"tag", velocity.tag}, {"c", velocity.c}, {"dir", velocity.dir}};
    j["eps"] = eps;
    j["lambda"] = lambda;
    j["C_T"] = C_T_override ? json(*C_T_override) : json(nullptr);
    j["N"] = N;
    j["d"] = d;
    j["T"] = T;
    j["dt"] = dt ? json(*dt) : json(nullptr);
    j["method"] = method;
    j["seed"] = seed;
    j["initial"] = {{"radius", initial.radius},
                    {"labels", initial.labels},
                    {"concentration", initial.concentration}};
    j["samples"] = samples;
    j["tolerances"] = {{"tol_mass", tol.tol_mass}, {"solver_tol", tol.solver_tol}};
    j["study"] = {{"lambdas", study.lambdas}, {"Ns", study.Ns}, {"burn_in", study.burn_in}};
    return j.dump();
}

std::string ScenarioConfig::hash() const {
    const std::string text = canonical_json();
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

StrategySpace build_space(const ScenarioConfig& cfg) {
    if (cfg.space.metric == "euclidean") return StrategySpace::uniform_grid(cfg.space.M, cfg.space.p);
    if (cfg.space.metric == "discrete") return StrategySpace::discrete(cfg.space.M, cfg.space.p);
    throw ConfigError("config: space.metric must be 'euclidean' or 'discrete'");
}

namespace {

double ubar(const Vec& u) { return u[0]; }

double coupling(const Vec& x, const Vec& x2) {
    return 1.0 / (1.0 + euclid_dist(x, x2) * euclid_dist(x, x2));
}

PayoffKernel::SpatialPayoff cosine_spatial(double a) {
    return [a](const Vec& x, const Vec& u, const Vec& x2) {
        return a * (std::cos(2.0 * M_PI * ubar(u)) * coupling(x, x2) +
                    std::sin(2.0 * M_PI * ubar(u)) * std::tanh(x[0] + x2[0]));
    };
}

} // namespace

TransferOperator build_transfer(const ScenarioConfig& cfg, const StrategySpace& space) {
    const KernelConfig& kc = cfg.kernel;
    const double a = kc.a;
    if (kc.tag == "none") return TransferOperator::none();
    if (kc.tag == "zero") {
        auto k = std::make_shared<PayoffKernel>(PayoffKernel::undisclosed(
            [](const Vec&, const Vec&, const Vec&) { return 0.0; }, 0.0));
        return TransferOperator::undisclosed(std::move(k));
    }
    if (kc.tag == "replicator_cosine") {
        auto j4 = [a](const Vec& x, const Vec& u, const Vec& x2, const Vec& u2) {
            return a * std::cos(2.0 * M_PI * (ubar(u) - ubar(u2))) * coupling(x, x2);
        };
        auto k = std::make_shared<PayoffKernel>(PayoffKernel::replicator_full(j4, a));
        return TransferOperator::replicator(std::move(k));
    }
    if (kc.tag == "undisclosed_cosine") {
        auto k = std::make_shared<PayoffKernel>(
            PayoffKernel::undisclosed(cosine_spatial(a), 2.0 * a));
        return TransferOperator::undisclosed(std::move(k));
    }
    if (kc.tag == "penalized_cosine") {
        // J1(xi) = c xi/(1+xi): increasing, concave, bounded by c;
        // Q(xi) = c (xi - log(1+xi)) so that Q' = J1
        const double c = kc.c;
        auto j1 = [c](double xi) { return c * xi / (1.0 + xi); };
        auto q = [c](double xi) { return c * (xi - std::log1p(xi)); };
        auto k = std::make_shared<PayoffKernel>(
            PayoffKernel::penalized(cosine_spatial(a), j1, q, 2.0 * a, c, c));
        return TransferOperator::undisclosed(std::move(k));
    }
    if (kc.tag == "integral_sqrt") {
        // f = w(x,u,x') sqrt(1+xi^2) with 0 <= w <= a: convex in xi,
        // |d_xi f| <= a, and d^2_xi f bounded by a
        auto w = [a](const Vec& x, const Vec& u, const Vec& x2) {
            const double cu = std::cos(2.0 * M_PI * ubar(u));
            return 0.5 * a * (1.0 + cu * cu) * coupling(x, x2);
        };
        auto f = [w](const Vec& x, double xi, const Vec& u, const Vec& x2) {
            return w(x, u, x2) * std::sqrt(1.0 + xi * xi);
        };
        auto df = [w](const Vec& x, double xi, const Vec& u, const Vec& x2) {
            return w(x, u, x2) * xi / std::sqrt(1.0 + xi * xi);
        };
        auto k = std::make_shared<PayoffKernel>(PayoffKernel::integral(f, df, a, a));
        return TransferOperator::undisclosed(std::move(k));
    }
    if (kc.tag == "markov_symmetric") {
        if (space.metric() != Metric::Discrete)
            throw ConfigError("config: markov_symmetric needs a discrete space");
        const int h = space.size();
        const double rate = kc.rate;
        auto rates = std::make_shared<MarkovRates>();
        rates->H = h;
        rates->alpha = [rate, h](int i, int k, const Vec& x, const EmpiricalMeasure&) {
            const double gap = std::abs(i - k) / static_cast<double>(h);
            return rate * std::exp(-gap) * (1.0 + 0.5 * std::tanh(x[0]));
        };
        rates->C_T = rate * 1.5 * (h - 1); // alpha_hh <= rate * 1.5 * (H-1)
        return TransferOperator::markov(std::move(rates));
    }
    throw ConfigError("config: unknown kernel tag '" + kc.tag + "'");
}

VelocityField build_velocity(const ScenarioConfig& cfg) {
    const VelocityConfig& vc = cfg.velocity;
    VelocityField v;
    v.tag = vc.tag;
    if (vc.tag == "zero") {
        v.eval = [](const StrategySpace&, const EmpiricalMeasure&, const AgentState& y) {
            return Vec(y.x.size(), 0.0);
        };
        v.M_v = 1e-12;
        v.lip_budget = 0.0;
        return v;
    }
    if (vc.tag == "constant") {
        Vec c = vc.c;
        if (static_cast<int>(c.size()) != cfg.d)
            throw ConfigError("config: constant velocity needs a d-dimensional 'c'");
        v.eval = [c](const StrategySpace&, const EmpiricalMeasure&, const AgentState&) {
            return c;
        };
        v.M_v = std::max(euclid_norm(c), 1e-12);
        v.lip_budget = 0.0;
        return v;
    }
    if (vc.tag == "mean_revert") {
        // v(Psi, y) = int (x' - x) dnu(x')
        v.eval = [](const StrategySpace&, const EmpiricalMeasure& psi, const AgentState& y) {
            Vec out(y.x.size(), 0.0);
            for (const auto& atom : psi.atoms)
                for (std::size_t i = 0; i < out.size(); ++i) out[i] += atom.x[i] - y.x[i];
            for (double& o : out) o /= psi.size();
            return out;
        };
        v.M_v = 1.0;
        v.lip_budget = 1.0;
        return v;
    }
    if (vc.tag == "label_steer") {
        // v(Psi, y) = dir * int ubar l(u) deta(u), for U in [0,1]
        Vec dir = vc.dir;
        if (static_cast<int>(dir.size()) != cfg.d)
            throw ConfigError("config: label_steer needs a d-dimensional 'dir'");
        v.eval = [dir](const StrategySpace& sp, const EmpiricalMeasure&, const AgentState& y) {
            double s = 0.0;
            for (int k = 0; k < sp.size(); ++k)
                s += sp.weights()[k] * sp.node_coord(k) * y.ell.values[k];
            Vec out(dir.size());
            for (std::size_t i = 0; i < dir.size(); ++i) out[i] = dir[i] * s;
            return out;
        };
        v.M_v = std::max(euclid_norm(dir), 1e-12);
        v.lip_budget = euclid_norm(dir);
        return v;
    }
    if (vc.tag == "superlinear") {
        // deliberately violates (v3): v = x ||y||_Ybar with a declared M_v of 1
        v.eval = [](const StrategySpace& sp, const EmpiricalMeasure&, const AgentState& y) {
            const double n = state_norm(sp, y);
            Vec out = y.x;
            for (double& o : out) o *= n;
            return out;
        };
        v.M_v = 1.0;
        v.lip_budget = 1.0;
        return v;
    }
    throw ConfigError("config: unknown velocity tag '" + vc.tag + "'");
}

SystemDef make_system(const ScenarioConfig& cfg) {
    SystemDef def;
    def.space = build_space(cfg);
    def.transfer = build_transfer(cfg, def.space);
    def.velocity = build_velocity(cfg);
    def.eps = cfg.eps;
    def.lambda = cfg.lambda;
    def.C_T = cfg.C_T_override ? *cfg.C_T_override : def.transfer.default_C_T();
    def.box = select_box_bounds(cfg.eps, def.C_T);
    def.theta_eps = step_bound_theta(cfg.eps, def.box, def.C_T, def.box.omega);
    def.M_eps = sublinearity_constant(def.box, def.C_T, def.velocity.M_v);
    def.threads = cfg.threads;
    return def;
}

std::vector<AgentState> initial_ensemble(const ScenarioConfig& cfg, const SystemDef& def) {
    Rng rng(cfg.seed);
    std::vector<AgentState> agents(cfg.N);
    for (int i = 0; i < cfg.N; ++i)
        agents[i].x = random_ball_position(rng, cfg.d, cfg.initial.radius);

    if (cfg.initial.labels == "uniform") {
        for (auto& a : agents)
            a.ell = LabelDensity::uniform(def.space, def.box.r_eps, def.box.R_eps);
    } else if (cfg.initial.labels == "dirichlet") {
        for (auto& a : agents)
            a.ell = random_density(def.space, rng, def.box.r_eps, def.box.R_eps,
                                   cfg.initial.concentration);
    } else if (cfg.initial.labels == "minimizer") {
        if (def.transfer.kind != TransferOperator::Kind::Undisclosed || !def.transfer.kernel)
            throw ConfigError("config: initial.labels=minimizer needs an F-form kernel");
        SpatialMeasure mu;
        for (const auto& a : agents) mu.points.push_back(a.x);
        for (auto& a : agents)
            a.ell = delta_map(def.space, *def.transfer.kernel, mu, a.x, cfg.eps, def.box,
                              cfg.tol.solver_tol);
    } else {
        throw ConfigError("config: initial.labels must be dirichlet|uniform|minimizer");
    }
    return agents;
}

SimulationResult simulate_scenario(const ScenarioConfig& cfg) {
    SimulationResult res;
    res.def = make_system(cfg);
    ParticleEnsemble ens;
    ens.agents = initial_ensemble(cfg, res.def);
    const double cap = res.def.theta_eps / (4.0 * cfg.lambda);
    const double dt = cfg.dt ? *cfg.dt : std::min(cap, cfg.T > 0.0 ? cfg.T / 1000.0 : cap);
    res.traj = integrate(res.def, ens, cfg.T, dt,
                         cfg.method == "rk4" ? Method::Rk4 : Method::Euler, cfg.samples);
    res.audit = audit_trajectory(res.def, res.traj);
    return res;
}

AuditReport audit_trajectory(const SystemDef& def, const Trajectory& traj) {
    AuditReport rep;
    const EntropyBounds eb = def.box.entropy();
    rep.k_eps = eb.k;
    rep.entropy_min = std::numeric_limits<double>::infinity();
    rep.entropy_max = -std::numeric_limits<double>::infinity();
    for (const auto& snap : traj.snapshots) {
        for (const auto& agent : snap) {
            for (double v : agent.ell.values)
                if (v < def.box.r_eps || v > def.box.R_eps) rep.box_ok = false;
            const double I = negative_entropy(def.space, agent.ell);
            rep.entropy_min = std::min(rep.entropy_min, I);
            rep.entropy_max = std::max(rep.entropy_max, I);
        }
    }
    rep.entropy_ok = rep.entropy_min >= -1e-12 && rep.entropy_max <= eb.k + 1e-10;
    rep.mass_drift = traj.mass_drift_max_agent;
    rep.mass_ok = rep.mass_drift <= 1e-8;
    rep.gronwall_ok = traj.gronwall_ok;
    return rep;
}

FastStudySetup make_fast_setup(const ScenarioConfig& cfg) {
    const SystemDef def = make_system(cfg);
    if (def.transfer.kind != TransferOperator::Kind::Undisclosed || !def.transfer.kernel ||
        !def.transfer.kernel->has_F_form())
        throw ConfigError("fastlimit: kernel must be in F-form (undisclosed family)");

    FastStudySetup setup;
    setup.space = def.space;
    setup.kernel = *def.transfer.kernel;
    setup.velocity = def.velocity;
    setup.eps = cfg.eps;
    setup.box = def.box;
    setup.C_T = def.C_T;
    setup.theta_eps = def.theta_eps;
    setup.T = cfg.T;
    setup.burn_in_frac = cfg.study.burn_in;
    setup.samples = cfg.samples;
    setup.solver_tol = cfg.tol.solver_tol;
    setup.threads = cfg.threads;

    Rng rng(cfg.seed);
    setup.x0.resize(cfg.N);
    for (int i = 0; i < cfg.N; ++i)
        setup.x0[i] = random_ball_position(rng, cfg.d, cfg.initial.radius);
    if (cfg.initial.labels == "minimizer") {
        setup.ell0.clear(); // study computes the initial minimizer itself
    } else if (cfg.initial.labels == "dirichlet") {
        setup.ell0.resize(cfg.N);
        for (int i = 0; i < cfg.N; ++i)
            setup.ell0[i] = random_density(setup.space, rng, def.box.r_eps, def.box.R_eps,
                                           cfg.initial.concentration);
    } else {
        setup.ell0.assign(cfg.N,
                          LabelDensity::uniform(setup.space, def.box.r_eps, def.box.R_eps));
    }
    return setup;
}

RateFit run_fastlimit(const ScenarioConfig& cfg) {
    return fast_reaction_study(make_fast_setup(cfg), cfg.study.lambdas);
}

MeanFieldResult run_meanfield(const ScenarioConfig& cfg) {
    SystemDef def = make_system(cfg);
    if (cfg.study.Ns.size() < 2) throw ConfigError("meanfield: study.Ns needs >= 2 entries");

    ScenarioConfig pool_cfg = cfg;
    pool_cfg.N = cfg.study.Ns.back();
    const std::vector<AgentState> pool = initial_ensemble(pool_cfg, def);

    const double cap = def.theta_eps / (4.0 * cfg.lambda);
    const double dt = cfg.dt ? *cfg.dt : std::min(cap, cfg.T > 0.0 ? cfg.T / 1000.0 : cap);
    return mean_field_study(def, pool, cfg.study.Ns, cfg.T, dt, cfg.samples);
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_trajectory_csv(const std::string& path, const StrategySpace& space,
                          const Trajectory& traj) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path);
    out << "t,agent";
    const int d = traj.snapshots.empty() || traj.snapshots[0].empty()
                      ? 0
                      : static_cast<int>(traj.snapshots[0][0].x.size());
    for (int i = 0; i < d; ++i) out << ",x" << i;
    for (int k = 0; k < space.size(); ++k) out << ",l" << k;
    out << "\n";
    for (std::size_t s = 0; s < traj.snapshots.size(); ++s) {
        for (std::size_t i = 0; i < traj.snapshots[s].size(); ++i) {
            out << format_double(traj.times[s]) << "," << i;
            for (double v : traj.snapshots[s][i].x) out << "," << format_double(v);
            for (double v : traj.snapshots[s][i].ell.values) out << "," << format_double(v);
            out << "\n";
        }
    }
}

void write_plan_csv(const std::string& path, const TransportPlan& plan) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path);
    out << "i,sigma_i,cost_i\n";
    for (std::size_t i = 0; i < plan.sigma.size(); ++i)
        out << i << "," << plan.sigma[i] << "," << format_double(plan.edge_costs[i]) << "\n";
}

namespace {

json resolved_block(const ScenarioConfig& cfg, const SystemDef& def) {
    return json{{"config_hash", cfg.hash()},
                {"r_eps", def.box.r_eps},
                {"R_eps", def.box.R_eps},
                {"theta_eps", def.theta_eps},
                {"M_eps", def.M_eps},
                {"C_T", def.C_T}};
}

void dump_json(const std::string& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path);
    out << j.dump(2) << "\n";
}

} // namespace

void write_simulation_summary(const std::string& path, const ScenarioConfig& cfg,
                              const SimulationResult& result) {
    json j;
    j["resolved"] = resolved_block(cfg, result.def);
    j["audit"] = {{"mass_ok", result.audit.mass_ok},
                  {"box_ok", result.audit.box_ok},
                  {"entropy_ok", result.audit.entropy_ok},
                  {"gronwall_ok", result.audit.gronwall_ok},
                  {"mass_drift", result.audit.mass_drift},
                  {"entropy_min", result.audit.entropy_min},
                  {"entropy_max", result.audit.entropy_max},
                  {"k_eps", result.audit.k_eps}};
    j["diagnostics"] = {{"steps", result.traj.steps},
                        {"renorm_total", result.traj.renorm_total},
                        {"raw_mean_max", result.traj.raw_mean_max},
                        {"box_margin_min", result.traj.box_margin_min},
                        {"sup_state_norm", result.traj.sup_state_norm},
                        {"gronwall_log_bound", result.traj.gronwall_log_bound}};
    dump_json(path, j);
}

void write_rates_csv(const std::string& path, const RateFit& fit) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path);
    out << "lambda,gap\n";
    for (std::size_t i = 0; i < fit.lambdas.size(); ++i)
        out << format_double(fit.lambdas[i]) << "," << format_double(fit.gaps[i]) << "\n";
}

void write_rate_summary(const std::string& path, const ScenarioConfig& cfg, const SystemDef& def,
                        const RateFit& fit) {
    json j;
    j["resolved"] = resolved_block(cfg, def);
    j["fit"] = {{"slope", fit.slope}, {"intercept", fit.intercept}, {"r2", fit.r2}};
    j["lambdas"] = fit.lambdas;
    j["gaps"] = fit.gaps;
    dump_json(path, j);
}

void write_meanfield_csv(const std::string& path, const MeanFieldResult& res) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path);
    out << "N,init_w1,sup_w1,rho\n";
    for (std::size_t i = 0; i < res.Ns.size(); ++i)
        out << res.Ns[i] << "," << format_double(res.init_w1[i]) << ","
            << format_double(res.sup_w1[i]) << "," << format_double(res.rho[i]) << "\n";
}

void write_meanfield_summary(const std::string& path, const ScenarioConfig& cfg,
                             const SystemDef& def, const MeanFieldResult& res) {
    json j;
    j["resolved"] = resolved_block(cfg, def);
    j["Ns"] = res.Ns;
    j["init_w1"] = res.init_w1;
    j["sup_w1"] = res.sup_w1;
    j["rho"] = res.rho;
    dump_json(path, j);
}

} // namespace entroflow
