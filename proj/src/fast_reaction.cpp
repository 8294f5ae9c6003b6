#include "entroflow/fast_reaction.hpp"

#include <algorithm>
#include <cmath>

#include "entroflow/parallel.hpp"

namespace entroflow {

namespace {

double tlogt(double t) { return t > 0.0 ? t * std::log(t) : 0.0; }

// exact KL projection of positive weights w onto {mass = 1} cap [r, R]:
// l = clip(c w), with the scale c fixed by bisection on the monotone mass map
Vec clipped_tilt(const StrategySpace& space, const Vec& w, double r, double R) {
    auto mass_at = [&](double c) {
        double s = 0.0;
        for (int k = 0; k < space.size(); ++k)
            s += space.weights()[k] * std::min(R, std::max(r, c * w[k]));
        return s;
    };
    double wmax = 0.0, wmin = std::numeric_limits<double>::infinity();
    for (double v : w) {
        if (!(v > 0.0) || !std::isfinite(v))
            throw NonFiniteValue("clipped_tilt: weights must be positive and finite");
        wmax = std::max(wmax, v);
        wmin = std::min(wmin, v);
    }
    double lo = r / wmax * 0.5;  // everything clips to r -> mass r < 1
    double hi = R / wmin * 2.0;  // everything clips to R -> mass R > 1
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        (mass_at(mid) < 1.0 ? lo : hi) = mid;
    }
    const double c = 0.5 * (lo + hi);
    Vec out(w.size());
    for (std::size_t k = 0; k < w.size(); ++k) out[k] = std::min(R, std::max(r, c * w[k]));
    return out;
}

std::size_t hash_doubles(std::size_t seed, const double* data, std::size_t n) {
    // FNV-1a over the raw bytes
    std::size_t h = seed ? seed : 1469598103934665603ULL;
    const unsigned char* bytes = reinterpret_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n * sizeof(double); ++i) {
        h ^= bytes[i];
        h *= 1099511628211ULL;
    }
    return h;
}

} // namespace

double g_value(const GProblem& problem, const LabelDensity& ell) {
    const StrategySpace& sp = problem.space;
    if (static_cast<int>(ell.values.size()) != sp.size())
        throw DimensionMismatch("g_value: label grid mismatch");
    double s = 0.0;
    for (int k = 0; k < sp.size(); ++k) {
        const double v = ell.values[k];
        if (!std::isfinite(v) || v < 0.0)
            throw NonFiniteValue("g_value: density must be finite and nonnegative");
        s += sp.weights()[k] *
             (problem.kernel.F(sp, problem.nu, problem.x, v, k) +
              problem.eps * (tlogt(v) - v));
    }
    if (!std::isfinite(s)) throw NonFiniteValue("g_value: non-finite functional value");
    return s;
}

MinimizerCertificate minimize_g(const GProblem& problem, double tol, int max_iters,
                                const Vec* warm_start) {
    const StrategySpace& sp = problem.space;
    const double r = problem.box.r_eps, R = problem.box.R_eps;
    const double eps = problem.eps;
    if (!(tol > 0.0)) throw InvalidBounds("minimize_g: tol must be positive");

    MinimizerCertificate cert;
    cert.beta_eps = eps / R;

    LabelDensity ell = warm_start ? LabelDensity{*warm_start, r, R}
                                  : LabelDensity::uniform(sp, r, R);
    double g_cur = g_value(problem, ell);
    // trial step R/(eps + C_F'), halved on non-decrease; the halving floors
    // at the relative-smoothness step 1/(eps + C_F' R) where Bregman descent
    // is guaranteed and the g-comparison (limited by machine precision near
    // the optimum) can be skipped
    const double s_safe = 1.0 / (eps + problem.kernel.dF_lip_xi() * R);
    double s = R / (eps + problem.kernel.dF_lip_xi());

    for (int it = 1; it <= max_iters; ++it) {
        const Vec df = problem.kernel.dF_row(sp, problem.nu, problem.x, ell.values);
        Vec grad(sp.size());
        for (int k = 0; k < sp.size(); ++k) grad[k] = df[k] + eps * std::log(ell.values[k]);

        for (;;) {
            Vec w(sp.size());
            for (int k = 0; k < sp.size(); ++k) w[k] = ell.values[k] * std::exp(-s * grad[k]);
            Vec candidate = clipped_tilt(sp, w, r, R);
            LabelDensity next{candidate, r, R};
            const double g_next = g_value(problem, next);
            // strict descent required above the safe step: the trial step can
            // sit exactly on the oscillation boundary for linear kernels
            if (s <= s_safe || g_next < g_cur) {
                Vec diff(sp.size());
                for (int k = 0; k < sp.size(); ++k) diff[k] = next.values[k] - ell.values[k];
                cert.residual = lp_norm(sp, diff, 2.0) / s;
                ell = std::move(next);
                g_cur = g_next;
                break;
            }
            s = std::max(0.5 * s, s_safe);
        }

        if (cert.residual <= tol) {
            cert.ell_star = ell;
            cert.iterations = it;
            cert.gap_estimate = cert.residual * cert.residual / (2.0 * cert.beta_eps);
            return cert;
        }
    }
    cert.ell_star = ell;
    cert.iterations = max_iters;
    cert.gap_estimate = cert.residual * cert.residual / (2.0 * cert.beta_eps);
    throw MaxIterations("minimize_g: iteration budget exhausted, residual " +
                            std::to_string(cert.residual),
                        cert);
}

GibbsResult gibbs_reference(const GProblem& problem) {
    if (!problem.kernel.linear_in_xi())
        throw Error("gibbs_reference: kernel must be linear in xi");
    const StrategySpace& sp = problem.space;
    const Vec j = problem.kernel.jnu_row(sp, problem.nu, problem.x);
    Vec w(sp.size());
    for (int k = 0; k < sp.size(); ++k) w[k] = std::exp(j[k] / problem.eps);
    const double z = sp.integrate(w);

    GibbsResult res;
    Vec plain(sp.size());
    bool inside = true;
    for (int k = 0; k < sp.size(); ++k) {
        plain[k] = w[k] / z;
        inside = inside && plain[k] >= problem.box.r_eps && plain[k] <= problem.box.R_eps;
    }
    if (inside) {
        res.ell = LabelDensity{plain, problem.box.r_eps, problem.box.R_eps};
        res.box_active = false;
        return res;
    }
    res.ell = LabelDensity{clipped_tilt(sp, w, problem.box.r_eps, problem.box.R_eps),
                           problem.box.r_eps, problem.box.R_eps};
    res.box_active = true;
    return res;
}

LabelDensity delta_map(const StrategySpace& space, const PayoffKernel& kernel,
                       const SpatialMeasure& nu, const Vec& x, double eps, const BoxBounds& box,
                       double tol) {
    GProblem problem{space, kernel, nu, x, eps, box};
    return minimize_g(problem, tol).ell_star;
}

LabelDensity DeltaMap::operator()(const SpatialMeasure& nu, const Vec& x) const {
    std::size_t key = hash_doubles(0, x.data(), x.size());
    for (const auto& pt : nu.points) key = hash_doubles(key, pt.data(), pt.size());
    {
        std::lock_guard<std::mutex> lock(mu_);
        auto it = cache_.find(key);
        if (it != cache_.end()) return it->second;
    }
    LabelDensity result = delta_map(space_, kernel_, nu, x, eps_, box_, tol_);
    std::lock_guard<std::mutex> lock(mu_);
    cache_.emplace(key, result);
    return result;
}

namespace {

// Delta(x_j, nu) for every atom of nu, the measure they lift to, and the
// velocity of the limit system. Shared by limit_velocity and integrate_limit.
struct LiftedMeasure {
    EmpiricalMeasure lifted;
};

LiftedMeasure lift(const StrategySpace& space, const PayoffKernel& kernel,
                   const SpatialMeasure& nu, double eps, const BoxBounds& box, double tol,
                   int threads, const std::vector<LabelDensity>* warm = nullptr) {
    LiftedMeasure out;
    out.lifted.atoms.resize(nu.points.size());
    parallel_for(nu.size(), threads, [&](int j) {
        GProblem problem{space, kernel, nu, nu.points[j], eps, box};
        const Vec* seed = warm ? &(*warm)[j].values : nullptr;
        out.lifted.atoms[j] =
            AgentState{nu.points[j], minimize_g(problem, tol, 200000, seed).ell_star};
    });
    return out;
}

} // namespace

Vec limit_velocity(const StrategySpace& space, const VelocityField& v, const PayoffKernel& kernel,
                   const SpatialMeasure& nu, const Vec& x, double eps, const BoxBounds& box,
                   double tol) {
    const LiftedMeasure lm = lift(space, kernel, nu, eps, box, tol, 1);
    const AgentState y{x, delta_map(space, kernel, nu, x, eps, box, tol)};
    Vec w = v.eval(space, lm.lifted, y);
    const double M_w = v.M_v * (1.0 + box.R_eps);
    const double bound = M_w * (1.0 + euclid_norm(x) + first_moment(nu));
    if (euclid_norm(w) > bound + 1e-9)
        throw Error("limit_velocity: sublinearity bound M_v (1 + R_eps) violated");
    return w;
}

SpatialTrajectory integrate_limit(const StrategySpace& space, const VelocityField& v,
                                  const PayoffKernel& kernel, const std::vector<Vec>& x0,
                                  double eps, const BoxBounds& box, double T, double dt,
                                  Method method, double tol, int samples, int threads) {
    if (x0.empty()) throw EmptyMeasure("integrate_limit: no agents");
    if (!(dt > 0.0)) throw ConfigError("integrate_limit: dt must be positive");

    const int n = static_cast<int>(x0.size());
    // warm-started minimizers: along a smooth trajectory the previous stage's
    // minimizers are excellent seeds and keep the solver to a few iterations
    std::vector<LabelDensity> warm;
    auto velocity_all = [&](const std::vector<Vec>& xs) {
        const SpatialMeasure nu{xs};
        const LiftedMeasure lm =
            lift(space, kernel, nu, eps, box, tol, threads, warm.empty() ? nullptr : &warm);
        warm.resize(n);
        for (int i = 0; i < n; ++i) warm[i] = lm.lifted.atoms[i].ell;
        std::vector<Vec> w(n);
        parallel_for(n, threads, [&](int i) {
            w[i] = v.eval(space, lm.lifted, lm.lifted.atoms[i]);
        });
        return w;
    };

    SpatialTrajectory traj;
    std::vector<Vec> cur = x0;
    double t = 0.0;
    auto record = [&](double tt) {
        traj.times.push_back(tt);
        traj.positions.push_back(cur);
        for (const auto& x : cur) traj.sup_norm = std::max(traj.sup_norm, euclid_norm(x));
    };
    record(0.0);

    auto axpy = [&](const std::vector<Vec>& base, const std::vector<Vec>& dir, double h) {
        std::vector<Vec> out(n);
        for (int i = 0; i < n; ++i) {
            out[i].resize(base[i].size());
            for (std::size_t c = 0; c < base[i].size(); ++c)
                out[i][c] = base[i][c] + h * dir[i][c];
        }
        return out;
    };

    for (int s = 1; s < samples; ++s) {
        const double t_target = T * s / (samples - 1);
        const long nsteps = std::max(1L, static_cast<long>(std::ceil((t_target - t) / dt - 1e-12)));
        const double h = (t_target - t) / nsteps;
        for (long k = 0; k < nsteps; ++k) {
            if (method == Method::Euler) {
                cur = axpy(cur, velocity_all(cur), h);
            } else {
                const auto k1 = velocity_all(cur);
                const auto k2 = velocity_all(axpy(cur, k1, h / 2.0));
                const auto k3 = velocity_all(axpy(cur, k2, h / 2.0));
                const auto k4 = velocity_all(axpy(cur, k3, h));
                for (int i = 0; i < n; ++i)
                    for (std::size_t c = 0; c < cur[i].size(); ++c)
                        cur[i][c] += h / 6.0 * (k1[i][c] + 2.0 * k2[i][c] + 2.0 * k3[i][c] +
                                                k4[i][c]);
            }
        }
        t = t_target;
        record(t);
    }

    // Gronwall-type boundedness for the limit flow, M_w = M_v (1 + R_eps)
    double max0 = 0.0;
    for (const auto& x : x0) max0 = std::max(max0, euclid_norm(x));
    const double M_w = v.M_v * (1.0 + box.R_eps);
    const double bound = (max0 + M_w * T) * std::exp(2.0 * M_w * T);
    traj.bounded_ok = traj.sup_norm <= bound + 1e-9;
    return traj;
}

void linear_fit(const std::vector<double>& x, const std::vector<double>& y, double* slope,
                double* intercept, double* r2) {
    const std::size_t n = x.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    const double denom = n * sxx - sx * sx;
    *slope = (n * sxy - sx * sy) / denom;
    *intercept = (sy - *slope * sx) / n;
    double ss_res = 0, ss_tot = 0;
    const double mean_y = sy / n;
    for (std::size_t i = 0; i < n; ++i) {
        const double fit = *intercept + *slope * x[i];
        ss_res += (y[i] - fit) * (y[i] - fit);
        ss_tot += (y[i] - mean_y) * (y[i] - mean_y);
    }
    *r2 = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
}

RateFit fast_reaction_study(const FastStudySetup& setup, const std::vector<double>& lambdas) {
    if (lambdas.size() < 4)
        throw InsufficientSamples("fast_reaction_study: need at least 4 lambda values");
    double lmin = lambdas.front(), lmax = lambdas.front();
    for (double l : lambdas) {
        lmin = std::min(lmin, l);
        lmax = std::max(lmax, l);
    }
    if (lmax / lmin < 100.0)
        throw InsufficientSamples("fast_reaction_study: lambdas must span >= 2 decades");
    if (!setup.kernel.has_F_form())
        throw ConfigError("fast_reaction_study: kernel must be in F-form (no full replicator)");

    const StrategySpace& sp = setup.space;
    const int n = static_cast<int>(setup.x0.size());
    const double p = sp.p();
    const double dt_limit = setup.T / 1000.0;

    // reference: limit system (RK4) plus its minimizers at the sample times
    SpatialTrajectory limit =
        integrate_limit(sp, setup.velocity, setup.kernel, setup.x0, setup.eps, setup.box, setup.T,
                        dt_limit, Method::Rk4, setup.solver_tol, setup.samples, setup.threads);
    std::vector<std::vector<LabelDensity>> limit_minimizers(limit.times.size());
    for (std::size_t s = 0; s < limit.times.size(); ++s) {
        const SpatialMeasure mu{limit.positions[s]};
        limit_minimizers[s].resize(n);
        parallel_for(n, setup.threads, [&](int i) {
            GProblem problem{sp, setup.kernel, mu, limit.positions[s][i], setup.eps, setup.box};
            const Vec* seed = s > 0 ? &limit_minimizers[s - 1][i].values : nullptr;
            limit_minimizers[s][i] = minimize_g(problem, setup.solver_tol, 200000, seed).ell_star;
        });
    }

    // initial labels: supplied, or the minimizer at t = 0
    std::vector<LabelDensity> ell0 = setup.ell0;
    if (ell0.empty()) {
        const SpatialMeasure mu0{setup.x0};
        ell0.resize(n);
        parallel_for(n, setup.threads, [&](int i) {
            ell0[i] = delta_map(sp, setup.kernel, mu0, setup.x0[i], setup.eps, setup.box,
                                setup.solver_tol);
        });
    }

    const double t_burn = setup.burn_in_frac * setup.T;
    RateFit fit;
    fit.lambdas = lambdas;

    for (double lambda : lambdas) {
        SystemDef def;
        def.space = sp;
        def.box = setup.box;
        def.eps = setup.eps;
        def.lambda = lambda;
        def.velocity = setup.velocity;
        def.transfer =
            TransferOperator::undisclosed(std::make_shared<PayoffKernel>(setup.kernel));
        def.C_T = setup.C_T;
        def.theta_eps = setup.theta_eps;
        def.threads = setup.threads;

        ParticleEnsemble ens;
        ens.agents.resize(n);
        for (int i = 0; i < n; ++i) ens.agents[i] = AgentState{setup.x0[i], ell0[i]};

        const double dt = std::min(setup.theta_eps / (4.0 * lambda), setup.T / 1000.0);
        double gap = 0.0;
        double t = 0.0;
        for (std::size_t s = 1; s < limit.times.size(); ++s) {
            const double t_target = limit.times[s];
            const long nsteps =
                std::max(1L, static_cast<long>(std::ceil((t_target - t) / dt - 1e-12)));
            const double h = (t_target - t) / nsteps;
            for (long k = 0; k < nsteps; ++k) ens = euler_step(def, ens, h);
            t = t_target;
            ens.t = t;
            if (t < t_burn - 1e-12) continue;

            double mean_dist = 0.0;
            for (int i = 0; i < n; ++i) {
                Vec diff(sp.size());
                for (int c = 0; c < sp.size(); ++c)
                    diff[c] = ens.agents[i].ell.values[c] - limit_minimizers[s][i].values[c];
                mean_dist += euclid_dist(ens.agents[i].x, limit.positions[s][i]) +
                             lp_norm(sp, diff, p);
            }
            gap = std::max(gap, mean_dist / n);
        }
        fit.gaps.push_back(std::max(gap, 1e-300));
    }

    std::vector<double> lx(lambdas.size()), ly(lambdas.size());
    for (std::size_t i = 0; i < lambdas.size(); ++i) {
        lx[i] = std::log(lambdas[i]);
        ly[i] = std::log(fit.gaps[i]);
    }
    linear_fit(lx, ly, &fit.slope, &fit.intercept, &fit.r2);
    return fit;
}

MeanFieldResult mean_field_study(const SystemDef& def, const std::vector<AgentState>& pool,
                                 const std::vector<int>& Ns, double T, double dt, int samples) {
    if (Ns.size() < 2) throw InsufficientSamples("mean_field_study: need at least two N values");
    for (std::size_t i = 0; i + 1 < Ns.size(); ++i)
        if (Ns[i + 1] != 2 * Ns[i])
            throw InsufficientSamples("mean_field_study: Ns must double");
    if (static_cast<int>(pool.size()) < Ns.back())
        throw InsufficientSamples("mean_field_study: initial pool smaller than max N");

    std::vector<Trajectory> runs(Ns.size());
    for (std::size_t i = 0; i < Ns.size(); ++i) {
        ParticleEnsemble ens;
        ens.agents.assign(pool.begin(), pool.begin() + Ns[i]);
        runs[i] = integrate(def, ens, T, dt, Method::Euler, samples);
    }

    MeanFieldResult res;
    for (std::size_t i = 0; i + 1 < Ns.size(); ++i) {
        const EmpiricalMeasure a0{runs[i].snapshots.front()};
        const EmpiricalMeasure b0{runs[i + 1].snapshots.front()};
        const double d0 = w1(def.space, a0, b0).value;
        double sup = 0.0;
        for (std::size_t s = 0; s < runs[i].snapshots.size(); ++s) {
            const EmpiricalMeasure a{runs[i].snapshots[s]};
            const EmpiricalMeasure b{runs[i + 1].snapshots[s]};
            sup = std::max(sup, w1(def.space, a, b).value);
        }
        res.Ns.push_back(Ns[i]);
        res.init_w1.push_back(d0);
        res.sup_w1.push_back(sup);
        res.rho.push_back(d0 > 0.0 ? sup / d0 : 0.0);
    }
    return res;
}

} // namespace entroflow
