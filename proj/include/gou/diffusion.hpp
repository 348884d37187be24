#pragma once

// Monte Carlo for the affine flow X^x(t) = M(t) x + N(t) of dX = X dB + dW:
//   M <- M exp(dB - dt/2),   N <- exp(dB - dt/2) N + dW.
// One realization of (M, N) serves every starting point x at once.
//
// Path p of an experiment with tag T draws from the Philox stream
// (T << 48) + p under the configured seed, so estimates are a pure function
// of (config, experiment) regardless of how paths are spread over workers.

#include "gou/convexity.hpp"
#include "gou/errors.hpp"
#include "gou/harmonics.hpp"
#include "gou/parallel.hpp"
#include "gou/radial.hpp"
#include "gou/rng.hpp"
#include "gou/solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace gou {

struct McConfig {
    long n_paths = 100000;
    double dt = 1e-3;
    double t_max = 1.0;
    std::uint64_t seed = 42;
    int workers = 1;
    double max_exit_time = 1000.0;  ///< hard cap on the simulated time of one exit path
    bool exit_bridge = true;        ///< Brownian-bridge crossing correction in exit_probability

    void validate() const {
        if (n_paths < 1) throw ConfigError("mc.n_paths must be >= 1");
        if (!(dt > 0.0)) throw ConfigError("mc.dt must be positive");
        if (!(t_max >= 0.0)) throw ConfigError("mc.t_max must be >= 0");
        if (t_max > 0.0 && dt > t_max) throw ConfigError("mc.dt must not exceed mc.t_max");
        if (workers < 0) throw ConfigError("mc.workers must be >= 0");
        if (!(max_exit_time > 0.0)) throw ConfigError("mc.max_exit_time must be positive");
    }
};

struct McEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    long n = 0;
    long rejected = 0;
    std::vector<std::string> warnings;
};

/// Mean and standard error of the finite entries of v; NaN entries count as rejected.
inline McEstimate summarize(const std::vector<double>& v) {
    std::vector<double> kept;
    kept.reserve(v.size());
    for (double x : v) if (!std::isnan(x)) kept.push_back(x);
    McEstimate e;
    e.n = static_cast<long>(kept.size());
    e.rejected = static_cast<long>(v.size() - kept.size());
    if (kept.empty()) return e;
    e.mean = pairwise_sum(kept) / e.n;
    std::vector<double> sq(kept.size());
    for (std::size_t i = 0; i < kept.size(); ++i) sq[i] = (kept[i] - e.mean) * (kept[i] - e.mean);
    const double var = e.n > 1 ? pairwise_sum(sq) / (e.n - 1) : 0.0;
    e.std_error = std::sqrt(var / e.n);
    return e;
}

/// Experiment tags; each owns a disjoint block of Philox streams.
enum class Experiment : std::uint64_t {
    flow = 1,
    second_moment = 2,
    exit_probability = 3,
    invariant_path = 4,
    invariant_closed = 5,
    feynman_kac = 6,
    lambda = 7,
    semigroup = 8,
    semigroup_gap = 9,
    coupling = 10,
    moments = 11,
};

inline Philox path_stream(const McConfig& cfg, Experiment e, std::uint64_t path) {
    return Philox(cfg.seed, (static_cast<std::uint64_t>(e) << 48) + path);
}

/// Number of grid steps to reach time t.
inline long steps_for(double t, double dt) {
    if (t <= 0.0) return 0;
    return std::max(1L, std::lround(t / dt));
}

/// Streaming (M, N) stepper of one path.
class FlowStepper {
public:
    FlowStepper(int d, Philox rng, double dt) : d_(d), rng_(rng), dt_(dt), sqdt_(std::sqrt(dt)), N_(d, 0.0) {}

    /// Advance one step: dB first, then the d components of dW.
    void step() {
        const double dB = sqdt_ * rng_.normal();
        const double f = std::exp(dB - 0.5 * dt_);
        M_ *= f;
        for (int i = 0; i < d_; ++i) N_[i] = f * N_[i] + sqdt_ * rng_.normal();
        t_ += dt_;
    }

    double M() const noexcept { return M_; }
    const std::vector<double>& N() const noexcept { return N_; }
    double t() const noexcept { return t_; }
    Philox& rng() noexcept { return rng_; }

    /// X^x = M x + N.
    void apply(std::span<const double> x, std::span<double> out) const {
        for (int i = 0; i < d_; ++i) out[i] = M_ * x[i] + N_[i];
    }

private:
    int d_;
    Philox rng_;
    double dt_, sqdt_;
    double M_ = 1.0;
    double t_ = 0.0;
    std::vector<double> N_;
};

/// One realization of the flow on the grid 0, dt, ..., t_max.
struct FlowSample {
    std::vector<double> t_grid;
    std::vector<double> M;
    std::vector<std::vector<double>> N;

    /// X^x(t_k) = M_k x + N_k.
    Point at(std::size_t k, std::span<const double> x) const {
        Point out(N[k].size());
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = M[k] * x[i] + N[k][i];
        return out;
    }
};

inline FlowSample sample_flow(int d, const McConfig& cfg, std::uint64_t rng_stream) {
    cfg.validate();
    FlowStepper s(d, path_stream(cfg, Experiment::flow, rng_stream), cfg.dt);
    FlowSample out;
    const long n = steps_for(cfg.t_max, cfg.dt);
    out.t_grid.reserve(n + 1);
    out.t_grid.push_back(0.0);
    out.M.push_back(1.0);
    out.N.push_back(std::vector<double>(d, 0.0));
    for (long k = 1; k <= n; ++k) {
        s.step();
        out.t_grid.push_back(k * cfg.dt);
        out.M.push_back(s.M());
        out.N.push_back(s.N());
    }
    return out;
}

/// Mean of M(t) over paths at the given times (martingale check).
inline std::vector<McEstimate> flow_mean_m(int d, const McConfig& cfg, const std::vector<double>& times) {
    cfg.validate();
    const double t_end = times.empty() ? 0.0 : *std::max_element(times.begin(), times.end());
    const long n_steps = steps_for(t_end, cfg.dt);
    auto per_path = parallel_map<std::vector<double>>(cfg.n_paths, cfg.workers, [&](std::size_t p) {
        FlowStepper s(d, path_stream(cfg, Experiment::flow, p), cfg.dt);
        std::vector<double> out(times.size(), 1.0);
        for (long k = 1; k <= n_steps; ++k) {
            s.step();
            for (std::size_t j = 0; j < times.size(); ++j) if (steps_for(times[j], cfg.dt) == k) out[j] = s.M();
        }
        return out;
    });
    std::vector<McEstimate> est;
    for (std::size_t j = 0; j < times.size(); ++j) {
        std::vector<double> col(per_path.size());
        for (std::size_t p = 0; p < per_path.size(); ++p) col[p] = per_path[p][j];
        est.push_back(summarize(col));
    }
    return est;
}

/// (|x|^2 + d) e^t - d.
inline double second_moment_reference(int d, std::span<const double> x, double t) {
    const double r2 = detail::norm2(x) * detail::norm2(x);
    return (r2 + d) * std::exp(t) - d;
}

/// MC estimate of E|X^x(t)|^2.
inline McEstimate second_moment(int d, std::span<const double> x, double t, const McConfig& cfg) {
    cfg.validate();
    if (static_cast<int>(x.size()) != d) throw DomainError("second_moment: dimension mismatch");
    if (t > cfg.t_max + 1e-12) throw DomainError("second_moment: t exceeds t_max");
    const long n_steps = steps_for(t, cfg.dt);
    auto vals = parallel_map<double>(cfg.n_paths, cfg.workers, [&](std::size_t p) {
        FlowStepper s(d, path_stream(cfg, Experiment::second_moment, p), cfg.dt);
        for (long k = 0; k < n_steps; ++k) s.step();
        double r2 = 0.0;
        for (int i = 0; i < d; ++i) {
            const double xi = s.M() * x[i] + s.N()[i];
            r2 += xi * xi;
        }
        return r2;
    });
    return summarize(vals);
}

/// (h(|x|) - h(r)) / (h(R) - h(r)).
inline double exit_probability_reference(int d, double x_norm, double r, double R) {
    const double hr = scale_h(d, r);
    return (scale_h(d, x_norm) - hr) / (scale_h(d, R) - hr);
}

/// Fraction of paths whose radius reaches R before r.
///
/// Paths run until exit or until max_exit_time (then rejected). With
/// exit_bridge, a crossing between grid points is detected with the
/// Brownian-bridge probability exp(-2 (b - rho0)(b - rho1) / ((1 + b^2) dt))
/// for each barrier b, using the radial diffusion coefficient 1 + rho^2.
inline McEstimate exit_probability(int d, std::span<const double> x, double r, double R, const McConfig& cfg) {
    cfg.validate();
    if (static_cast<int>(x.size()) != d) throw DomainError("exit_probability: dimension mismatch");
    const double x_norm = detail::norm2(x);
    if (!(0.0 < r && r < x_norm && x_norm < R)) throw DomainError("exit_probability: need 0 < r < |x| < R");
    const long cap = steps_for(cfg.max_exit_time, cfg.dt);
    const double sqdt = std::sqrt(cfg.dt);
    const double var_R = (1.0 + R * R) * cfg.dt, var_r = (1.0 + r * r) * cfg.dt;
    auto vals = parallel_map<double>(cfg.n_paths, cfg.workers, [&](std::size_t p) {
        Philox rng = path_stream(cfg, Experiment::exit_probability, p);
        std::vector<double> X(x.begin(), x.end());
        double rho0 = x_norm;
        for (long k = 0; k < cap; ++k) {
            const double f = std::exp(sqdt * rng.normal() - 0.5 * cfg.dt);
            double r2 = 0.0;
            for (int i = 0; i < d; ++i) {
                X[i] = f * X[i] + sqdt * rng.normal();
                r2 += X[i] * X[i];
            }
            const double rho1 = std::sqrt(r2);
            if (rho1 >= R) return 1.0;
            if (rho1 <= r) return 0.0;
            if (cfg.exit_bridge) {
                const auto u = rng.uniform2();
                if (u[0] < std::exp(-2.0 * (R - rho0) * (R - rho1) / var_R)) return 1.0;
                if (u[1] < std::exp(-2.0 * (rho0 - r) * (rho1 - r) / var_r)) return 0.0;
            }
            rho0 = rho1;
        }
        return std::numeric_limits<double>::quiet_NaN();
    });
    McEstimate e = summarize(vals);
    if (e.rejected > 0) e.warnings.push_back(std::to_string(e.rejected) + " paths did not exit before max_exit_time");
    return e;
}

enum class InvariantMethod { path_integral, closed_form };

/// One draw of the invariant law: X = int_0^inf e^{B(s)-s/2} dW(s) and
/// A = int_0^inf e^{2B(s)-s} ds (the conditional variance of each component).
struct InvariantSample {
    double A = 0.0;
    Point X;
};

struct InvariantDraws {
    std::vector<InvariantSample> samples;
    std::vector<std::string> warnings;
    long truncated_paths = 0;  ///< path_integral paths with e^{B(t_max)-t_max/2} > 1e-4
};

/// Samples of the invariant law.
///
/// closed_form: A = 1/Z^2 for a standard normal Z (the one-sided stable law
/// of index 1/2) and X = sqrt(A) Z' with an independent standard normal Z' in R^d.
/// path_integral: left-point sums of both integrals up to t_max.
inline InvariantDraws sample_invariant(int d, const McConfig& cfg, InvariantMethod method) {
    cfg.validate();
    InvariantDraws out;
    if (method == InvariantMethod::closed_form) {
        out.samples = parallel_map<InvariantSample>(cfg.n_paths, cfg.workers, [&](std::size_t p) {
            Philox rng = path_stream(cfg, Experiment::invariant_closed, p);
            const double z = rng.normal();
            InvariantSample s;
            s.A = 1.0 / (z * z);
            const double scale = std::sqrt(s.A);
            s.X.resize(d);
            for (double& v : s.X) v = scale * rng.normal();
            return s;
        });
        return out;
    }
    const long n_steps = steps_for(cfg.t_max, cfg.dt);
    const double sqdt = std::sqrt(cfg.dt);
    out.samples = parallel_map<InvariantSample>(cfg.n_paths, cfg.workers, [&](std::size_t p) {
        Philox rng = path_stream(cfg, Experiment::invariant_path, p);
        InvariantSample s;
        s.X.assign(d, 0.0);
        double log_m = 0.0;  // B(s) - s/2
        for (long k = 0; k < n_steps; ++k) {
            const double m = std::exp(log_m);
            s.A += m * m * cfg.dt;
            log_m += sqdt * rng.normal() - 0.5 * cfg.dt;
            for (int i = 0; i < d; ++i) s.X[i] += m * sqdt * rng.normal();
        }
        // Flag paths whose multiplier has not died out.
        if (std::exp(log_m) > 1e-4) s.A = -s.A;
        return s;
    });
    for (auto& s : out.samples) {
        if (s.A < 0.0) {
            s.A = -s.A;
            ++out.truncated_paths;
        }
    }
    if (out.truncated_paths > 0) {
        out.warnings.push_back(std::to_string(out.truncated_paths) + " paths have M(t_max) > 1e-4 (truncation tail)");
    }
    return out;
}

/// Two-sample Kolmogorov-Smirnov statistic sup |F_a - F_b|.
inline double ks_statistic(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) throw DomainError("ks_statistic: empty sample");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    std::size_t i = 0, j = 0;
    double worst = 0.0;
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    while (i < a.size() && j < b.size()) {
        const double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= x) ++i;
        while (j < b.size() && b[j] <= x) ++j;
        worst = std::max(worst, std::fabs(i / na - j / nb));
    }
    return worst;
}

/// Asymptotic KS critical value c(alpha) sqrt((n+m)/(n m)); c = 1.628 at the 1% level.
inline double ks_critical_value(std::size_t n, std::size_t m, double c_alpha = 1.628) {
    return c_alpha * std::sqrt((static_cast<double>(n) + m) / (static_cast<double>(n) * m));
}

/// Tail of A = 1/Z^2: P(A > x) = erf(1/sqrt(2x)) ~ sqrt(2/(pi x)).
inline double invariant_tail_asymptotic(double x) { return std::sqrt(2.0 / (std::numbers::pi * x)); }
inline double invariant_tail_exact(double x) { return std::erf(1.0 / std::sqrt(2.0 * x)); }

/// Running means of |X(inf)|^p at the checkpoints, for `replicas` independent
/// sequences of closed-form samples. Entry [k][j] is replica k at checkpoint j.
inline std::vector<std::vector<double>> invariant_running_moment(int d, double p, const McConfig& cfg,
                                                                 const std::vector<long>& checkpoints,
                                                                 int replicas = 1) {
    cfg.validate();
    if (replicas < 1) throw DomainError("invariant_running_moment: replicas must be >= 1");
    const long n = checkpoints.empty() ? 0 : *std::max_element(checkpoints.begin(), checkpoints.end());
    return parallel_map<std::vector<double>>(replicas, cfg.workers, [&](std::size_t k) {
        std::vector<double> vals(n);
        for (long i = 0; i < n; ++i) {
            Philox rng = path_stream(cfg, Experiment::moments, k * static_cast<std::uint64_t>(n) + i);
            const double z = rng.normal();
            double n2 = 0.0;
            for (int c = 0; c < d; ++c) {
                const double v = rng.normal();
                n2 += v * v;
            }
            vals[i] = std::pow(std::sqrt(n2) / std::fabs(z), p);
        }
        std::vector<double> out;
        for (long c : checkpoints) out.push_back(pairwise_sum(vals, 0, c) / c);
        return out;
    });
}

/// Median over replicas of the running means at each checkpoint.
inline std::vector<double> median_running_moment(const std::vector<std::vector<double>>& runs) {
    std::vector<double> out;
    if (runs.empty()) return out;
    for (std::size_t j = 0; j < runs[0].size(); ++j) {
        std::vector<double> col;
        for (const auto& r : runs) col.push_back(r[j]);
        std::sort(col.begin(), col.end());
        const std::size_t m = col.size() / 2;
        out.push_back(col.size() % 2 ? col[m] : 0.5 * (col[m - 1] + col[m]));
    }
    return out;
}

/// Feynman-Kac estimates of f_l(t, r) = E[R(t) exp(-(l(l+d-2)/2) int_0^t ds/R(s)^2)]
/// at each requested time, sharing paths across times.
inline std::vector<McEstimate> feynman_kac_mode(int d, int l, double r, const std::vector<double>& times,
                                                const McConfig& cfg) {
    cfg.validate();
    if (l < 1) throw DomainError("feynman_kac_mode: l must be >= 1");
    if (!(r > 0.0)) throw DomainError("feynman_kac_mode: r must be positive");
    const double t_end = times.empty() ? 0.0 : *std::max_element(times.begin(), times.end());
    const long n_steps = steps_for(t_end, cfg.dt);
    std::vector<long> at_step;
    for (double t : times) at_step.push_back(steps_for(t, cfg.dt));
    const double lam = 0.5 * l * (l + d - 2);
    const double floor = 10.0 * std::sqrt(cfg.dt);
    struct PathOut {
        std::vector<double> values;
        bool small_radius = false;
    };
    auto per_path = parallel_map<PathOut>(cfg.n_paths, cfg.workers, [&](std::size_t p) {
        FlowStepper s(d, path_stream(cfg, Experiment::feynman_kac, p), cfg.dt);
        PathOut out;
        out.values.assign(times.size(), r);
        double integral = 0.0;
        double prev = 1.0 / (r * r);
        for (long k = 1; k <= n_steps; ++k) {
            s.step();
            double r2 = s.N()[0] + s.M() * r;
            r2 *= r2;
            for (int i = 1; i < d; ++i) r2 += s.N()[i] * s.N()[i];
            const double rho = std::sqrt(r2);
            if (rho < floor) out.small_radius = true;
            const double cur = 1.0 / r2;
            integral += 0.5 * (prev + cur) * cfg.dt;
            prev = cur;
            for (std::size_t j = 0; j < times.size(); ++j) {
                if (at_step[j] == k) out.values[j] = rho * std::exp(-lam * integral);
            }
        }
        return out;
    });
    long flagged = 0;
    for (const auto& o : per_path) flagged += o.small_radius ? 1 : 0;
    std::vector<McEstimate> est;
    for (std::size_t j = 0; j < times.size(); ++j) {
        std::vector<double> col(per_path.size());
        for (std::size_t p = 0; p < per_path.size(); ++p) col[p] = per_path[p].values[j];
        McEstimate e = summarize(col);
        if (flagged > 0) {
            e.warnings.push_back(std::to_string(flagged) + " paths came within 10 sqrt(dt) of the origin");
        }
        est.push_back(std::move(e));
    }
    return est;
}

/// lambda_d = E[hat f_0(|X(inf)|)] over closed-form invariant samples.
inline McEstimate estimate_lambda(int d, const McConfig& cfg) {
    cfg.validate();
    const InhomogeneousMode& f0 = inhomogeneous_mode(d);
    auto vals = parallel_map<double>(cfg.n_paths, cfg.workers, [&](std::size_t p) {
        Philox rng = path_stream(cfg, Experiment::lambda, p);
        const double z = rng.normal();
        double n2 = 0.0;
        for (int k = 0; k < d; ++k) {
            const double v = rng.normal();
            n2 += v * v;
        }
        return f0.f0_hat(std::sqrt(n2) / std::fabs(z));
    });
    return summarize(vals);
}

/// Finite-time version of the lambda_d limit: for each starting radius,
///   raw:        E|X^x(t)| - gamma_d t - f_0(|x|)
///   controlled: E[hat f_0(|X^x(t)|)], the same quantity with the exact
///               control variate f_0(|X|) - gamma_d t - f_0(|x|) removed.
struct LambdaAtTime {
    std::vector<McEstimate> raw;
    std::vector<McEstimate> controlled;
};

inline LambdaAtTime lambda_at_time(int d, const std::vector<double>& radii, double t, const McConfig& cfg) {
    cfg.validate();
    const InhomogeneousMode& f0 = inhomogeneous_mode(d);
    const double g = f0.gamma();
    const long n_steps = steps_for(t, cfg.dt);
    auto per_path = parallel_map<std::vector<double>>(cfg.n_paths, cfg.workers, [&](std::size_t p) {
        FlowStepper s(d, path_stream(cfg, Experiment::lambda, p), cfg.dt);
        for (long k = 0; k < n_steps; ++k) s.step();
        std::vector<double> out;
        for (double r : radii) {
            double r2 = (s.M() * r + s.N()[0]) * (s.M() * r + s.N()[0]);
            for (int i = 1; i < d; ++i) r2 += s.N()[i] * s.N()[i];
            const double rho = std::sqrt(r2);
            out.push_back(rho - g * t - f0.f0(r));
            out.push_back(f0.f0_hat(rho));
        }
        return out;
    });
    LambdaAtTime res;
    for (std::size_t j = 0; j < radii.size(); ++j) {
        std::vector<double> a(per_path.size()), b(per_path.size());
        for (std::size_t p = 0; p < per_path.size(); ++p) {
            a[p] = per_path[p][2 * j];
            b[p] = per_path[p][2 * j + 1];
        }
        res.raw.push_back(summarize(a));
        res.controlled.push_back(summarize(b));
    }
    return res;
}

/// P_t w(x) = E[w(M(t) x + N(t))].
inline McEstimate semigroup_apply(const FieldFn& w, std::span<const double> x, double t, const McConfig& cfg) {
    cfg.validate();
    const int d = static_cast<int>(x.size());
    if (t == 0.0) {
        McEstimate e;
        e.mean = w(x);
        e.n = cfg.n_paths;
        return e;
    }
    const long n_steps = steps_for(t, cfg.dt);
    auto vals = parallel_map<double>(cfg.n_paths, cfg.workers, [&](std::size_t p) {
        FlowStepper s(d, path_stream(cfg, Experiment::semigroup, p), cfg.dt);
        for (long k = 0; k < n_steps; ++k) s.step();
        Point X(d);
        s.apply(x, X);
        return w(X);
    });
    return summarize(vals);
}

/// Squared semigroup gap at radius r for each requested time.
struct SemigroupGap {
    double t = 0.0;
    double gap = 0.0;          ///< mean over directions of (P_t v - u - c t - b)^2
    double noise_floor = 0.0;  ///< mean over directions of Var(P_t v estimate)
};

/// Common flow samples serve every direction and every time.
inline std::vector<SemigroupGap> semigroup_gap(const BoundarySpec& g, const EllipticSolution& u, double r,
                                         const std::vector<double>& times, double lambda_d, const McConfig& cfg,
                                         int n_dirs = 32) {
    cfg.validate();
    const int d = g.dim();
    const auto dirs = sphere_directions(d, n_dirs);
    const double c = u.constant();
    const double b = lambda_d * mean(g);
    const FieldFn v = cone_function(g);
    std::vector<double> u_vals;
    for (const auto& th : dirs) {
        Point x = th;
        for (double& z : x) z *= r;
        u_vals.push_back(u.value(x));
    }
    std::vector<SemigroupGap> out;
    const double t_end = times.empty() ? 0.0 : *std::max_element(times.begin(), times.end());
    const long n_steps = steps_for(t_end, cfg.dt);
    const std::size_t nt = times.size(), nd = dirs.size();
    auto per_path = parallel_map<std::vector<double>>(cfg.n_paths, cfg.workers, [&](std::size_t p) {
        FlowStepper s(d, path_stream(cfg, Experiment::semigroup_gap, p), cfg.dt);
        std::vector<double> vals(nt * nd, 0.0);
        Point X(d), x(d);
        auto record = [&](std::size_t j) {
            for (std::size_t k = 0; k < nd; ++k) {
                for (int i = 0; i < d; ++i) x[i] = r * dirs[k][i];
                s.apply(x, X);
                vals[j * nd + k] = v(X);
            }
        };
        for (std::size_t j = 0; j < nt; ++j) if (steps_for(times[j], cfg.dt) == 0) record(j);
        for (long k = 1; k <= n_steps; ++k) {
            s.step();
            for (std::size_t j = 0; j < nt; ++j) if (steps_for(times[j], cfg.dt) == k) record(j);
        }
        return vals;
    });
    for (std::size_t j = 0; j < nt; ++j) {
        SemigroupGap gap;
        gap.t = times[j];
        for (std::size_t k = 0; k < nd; ++k) {
            std::vector<double> col(per_path.size());
            for (std::size_t p = 0; p < per_path.size(); ++p) col[p] = per_path[p][j * nd + k];
            const McEstimate e = summarize(col);
            const double diff = e.mean - u_vals[k] - c * times[j] - b;
            gap.gap += diff * diff / nd;
            gap.noise_floor += e.std_error * e.std_error / nd;
        }
        out.push_back(gap);
    }
    return out;
}

/// Outcome of the pathwise convexity coupling check.
struct CouplingReport {
    long violations = 0;
    long paths = 0;
    double max_affine_defect = 0.0;  ///< max |X^z - (a X^x + (1-a) X^y)| / (1 + |X^z|)
};

/// Count paths with w(X^z) > a w(X^x) + (1-a) w(X^y) + 1e-12 (1 + |rhs|), z = a x + (1-a) y.
inline CouplingReport convexity_coupling_check(const FieldFn& w, std::span<const double> x, std::span<const double> y,
                                               double alpha, double t, const McConfig& cfg) {
    cfg.validate();
    if (x.size() != y.size()) throw DomainError("convexity_coupling_check: dimension mismatch");
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw DomainError("convexity_coupling_check: alpha must lie in [0,1]");
    const int d = static_cast<int>(x.size());
    Point z(d);
    for (int i = 0; i < d; ++i) z[i] = alpha * x[i] + (1.0 - alpha) * y[i];
    const long n_steps = steps_for(t, cfg.dt);
    struct PathOut {
        bool violated;
        double defect;
    };
    auto per_path = parallel_map<PathOut>(cfg.n_paths, cfg.workers, [&](std::size_t p) {
        FlowStepper s(d, path_stream(cfg, Experiment::coupling, p), cfg.dt);
        for (long k = 0; k < n_steps; ++k) s.step();
        Point Xx(d), Xy(d), Xz(d);
        s.apply(x, Xx);
        s.apply(y, Xy);
        s.apply(z, Xz);
        double defect = 0.0, nz = 0.0;
        for (int i = 0; i < d; ++i) {
            defect = std::max(defect, std::fabs(Xz[i] - (alpha * Xx[i] + (1.0 - alpha) * Xy[i])));
            nz += Xz[i] * Xz[i];
        }
        const double rhs = alpha * w(Xx) + (1.0 - alpha) * w(Xy);
        return PathOut{w(Xz) > rhs + 1e-12 * (1.0 + std::fabs(rhs)), defect / (1.0 + std::sqrt(nz))};
    });
    CouplingReport rep;
    rep.paths = static_cast<long>(per_path.size());
    for (const auto& o : per_path) {
        rep.violations += o.violated ? 1 : 0;
        rep.max_affine_defect = std::max(rep.max_affine_defect, o.defect);
    }
    return rep;
}

}  // namespace gou
