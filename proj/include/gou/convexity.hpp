#pragma once

// Numerical convexity verdicts: FD Hessian eigenvalues on a probe set plus a
// seeded midpoint scan, and the pairing of both for u and its cone function v.

#include "gou/errors.hpp"
#include "gou/harmonics.hpp"
#include "gou/parallel.hpp"
#include "gou/rng.hpp"
#include "gou/solver.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace gou {

using FieldFn = std::function<double(std::span<const double>)>;

/// v(x) = |x| g(x/|x|), v(0) = 0.
inline FieldFn cone_function(const BoundarySpec& g) {
    return [g](std::span<const double> x) {
        const double r = detail::norm2(x);
        if (r == 0.0) return 0.0;
        Point theta(x.begin(), x.end());
        for (double& v : theta) v /= r;
        return r * g(theta);
    };
}

enum class Verdict { convex_within_tolerance, nonconvex_witness_found };

inline const char* verdict_name(Verdict v) {
    return v == Verdict::convex_within_tolerance ? "convex_within_tolerance" : "nonconvex_witness_found";
}

/// Points x, y and weight alpha; violation = w(a x + (1-a) y) - a w(x) - (1-a) w(y).
struct Witness {
    Point x, y;
    double alpha = 0.5;
    double violation = 0.0;
};

inline double midpoint_violation(const FieldFn& w, std::span<const double> x, std::span<const double> y, double alpha) {
    Point z(x.size());
    for (std::size_t i = 0; i < z.size(); ++i) z[i] = alpha * x[i] + (1.0 - alpha) * y[i];
    return w(z) - alpha * w(x) - (1.0 - alpha) * w(y);
}

struct ConvexityReport {
    Verdict verdict = Verdict::convex_within_tolerance;
    double min_hessian_eigenvalue = std::numeric_limits<double>::quiet_NaN();
    double min_normalized_eigenvalue = std::numeric_limits<double>::quiet_NaN();
    std::optional<Witness> witness;
    double tolerance = 0.0;           ///< midpoint tolerance in force
    bool hessian_negative = false;    ///< some probe has a normalized eigenvalue below -eig_tol
    bool midpoint_violated = false;   ///< the midpoint scan found a violation above tolerance
    std::vector<std::string> warnings;
};

struct HessianScan {
    double min_eig = std::numeric_limits<double>::infinity();
    double min_normalized = std::numeric_limits<double>::infinity();  ///< lambda_min / (1 + |H|_2)
    Point argmin;
    Point eigvec;  ///< eigenvector of the most negative normalized eigenvalue
    long ill_conditioned = 0;
};

/// Minimum eigenvalue of the central-difference Hessian over the probes.
/// The step at probe p is h_fd * |p|; probes must avoid the origin.
inline HessianScan hessian_min_eig(const FieldFn& w, const std::vector<Point>& probes, double h_fd, int workers = 1) {
    if (!(h_fd > 0.0)) throw DomainError("hessian_min_eig: h_fd must be positive");
    if (probes.empty()) throw DomainError("hessian_min_eig: no probes");
    struct ProbeOut {
        double lmin, norm, lnorm;
        Point vec;
        bool ill;
    };
    auto outs = parallel_map<ProbeOut>(probes.size(), workers, [&](std::size_t k) {
        const Point& p = probes[k];
        const int d = static_cast<int>(p.size());
        const double r = detail::norm2(p);
        if (!(r > 0.0)) throw DomainError("hessian_min_eig: probe at the origin");
        const double h = h_fd * r;
        const auto H = fd_hessian(w, p, h);
        Eigen::MatrixXd M(d, d);
        for (int i = 0; i < d; ++i) for (int j = 0; j < d; ++j) M(i, j) = H[i * d + j];
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M);
        const auto& ev = es.eigenvalues();
        const double norm = std::max(std::fabs(ev(0)), std::fabs(ev(d - 1)));
        Point vec(d);
        for (int i = 0; i < d; ++i) vec[i] = es.eigenvectors()(i, 0);
        // Variation across the stencil against rounding.
        const double w0 = w(p);
        double var = 0.0;
        Point q = p;
        for (int i = 0; i < d; ++i) {
            q[i] = p[i] + h;
            var = std::max(var, std::fabs(w(q) - w0));
            q[i] = p[i];
        }
        const bool ill = var < 100.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::fabs(w0));
        return ProbeOut{ev(0), norm, ev(0) / (1.0 + norm), std::move(vec), ill};
    });
    HessianScan scan;
    for (std::size_t k = 0; k < outs.size(); ++k) {
        scan.min_eig = std::min(scan.min_eig, outs[k].lmin);
        if (outs[k].lnorm < scan.min_normalized) {
            scan.min_normalized = outs[k].lnorm;
            scan.argmin = probes[k];
            scan.eigvec = outs[k].vec;
        }
        scan.ill_conditioned += outs[k].ill ? 1 : 0;
    }
    return scan;
}

/// Source of (x, y, alpha) triples indexed by sample number.
struct Triple {
    Point x, y;
    double alpha;
};
using TripleSampler = std::function<Triple(std::uint64_t)>;

/// x, y uniform in the ball of the given radius, alpha uniform in (0, 1).
inline TripleSampler ball_sampler(int d, double radius, std::uint64_t seed) {
    return [d, radius, seed](std::uint64_t i) {
        Philox rng(seed, i);
        auto point = [&] {
            Point p(d);
            double n2 = 0.0;
            for (double& v : p) {
                v = rng.normal();
                n2 += v * v;
            }
            const double s = radius * std::pow(rng.uniform(), 1.0 / d) / std::sqrt(n2);
            for (double& v : p) v *= s;
            return p;
        };
        Triple t;
        t.x = point();
        t.y = point();
        t.alpha = rng.uniform();
        return t;
    };
}

/// Golden-section search for the worst alpha near w.alpha, keeping x and y.
inline Witness refine_witness(const FieldFn& f, Witness w, double half_width = 0.25, int iterations = 60) {
    double a = std::max(0.0, w.alpha - half_width), b = std::min(1.0, w.alpha + half_width);
    const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = b - phi * (b - a), d = a + phi * (b - a);
    double fc = midpoint_violation(f, w.x, w.y, c), fd = midpoint_violation(f, w.x, w.y, d);
    for (int k = 0; k < iterations; ++k) {
        if (fc > fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = midpoint_violation(f, w.x, w.y, c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = midpoint_violation(f, w.x, w.y, d);
        }
    }
    const double alpha = fc > fd ? c : d;
    const double v = midpoint_violation(f, w.x, w.y, alpha);
    if (v > w.violation) {
        w.alpha = alpha;
        w.violation = v;
    }
    return w;
}

/// Midpoint check over n sampled triples with tol = tol_rel (1 + max |w| seen).
inline ConvexityReport midpoint_scan(const FieldFn& w, const TripleSampler& sampler, long n, double tol_rel = 1e-9,
                                     int workers = 1) {
    if (n < 1) throw DomainError("midpoint_scan: n must be >= 1");
    struct Out {
        double violation, scale;
    };
    auto outs = parallel_map<Out>(n, workers, [&](std::size_t i) {
        const Triple t = sampler(i);
        Point z(t.x.size());
        for (std::size_t k = 0; k < z.size(); ++k) z[k] = t.alpha * t.x[k] + (1.0 - t.alpha) * t.y[k];
        const double wx = w(t.x), wy = w(t.y), wz = w(z);
        return Out{wz - t.alpha * wx - (1.0 - t.alpha) * wy,
                   std::max({std::fabs(wx), std::fabs(wy), std::fabs(wz)})};
    });
    double scale = 0.0;
    std::size_t worst = 0;
    for (std::size_t i = 0; i < outs.size(); ++i) {
        scale = std::max(scale, outs[i].scale);
        if (outs[i].violation > outs[worst].violation) worst = i;
    }
    ConvexityReport rep;
    rep.tolerance = tol_rel * (1.0 + scale);
    if (outs[worst].violation > rep.tolerance) {
        const Triple t = sampler(worst);
        Witness wit{t.x, t.y, t.alpha, outs[worst].violation};
        wit = refine_witness(w, wit);
        rep.verdict = Verdict::nonconvex_witness_found;
        rep.midpoint_violated = true;
        rep.witness = std::move(wit);
    }
    return rep;
}

/// Probe and sampling parameters of a convexity check.
struct ProbeConfig {
    double r_min = 0.05;         ///< Hessian probes stay outside this ball around the origin
    double r_max = 4.0;
    int n_radii = 10;
    int n_dirs = 24;
    double h_fd = 1e-3;          ///< relative FD step
    double eig_tol = 1e-4;       ///< threshold on lambda_min / (1 + |H|)
    long n_triples = 100000;
    double sample_radius = 2.0;  ///< midpoint triples are drawn from this ball
    double tol_rel = 1e-9;
    std::uint64_t seed = 7;
    int workers = 1;

    void validate() const {
        if (!(r_min > 0.0 && r_max > r_min)) throw ConfigError("probe: need 0 < r_min < r_max");
        if (n_radii < 1 || n_dirs < 1) throw ConfigError("probe: n_radii and n_dirs must be >= 1");
        if (!(h_fd > 0.0)) throw ConfigError("probe: h_fd must be positive");
        if (!(eig_tol > 0.0)) throw ConfigError("probe: eig_tol must be positive");
        if (n_triples < 1) throw ConfigError("probe: n_triples must be >= 1");
        if (!(sample_radius > 0.0)) throw ConfigError("probe: sample_radius must be positive");
        if (workers < 0) throw ConfigError("probe: workers must be >= 0");
    }
};

/// Hessian scan plus midpoint scan. A negative Hessian direction without a
/// sampled midpoint violation is turned into an explicit local witness.
inline ConvexityReport check_convexity(const FieldFn& w, int d, const ProbeConfig& cfg) {
    cfg.validate();
    const auto probes = log_radial_samples(d, cfg.r_min, cfg.r_max, cfg.n_radii, cfg.n_dirs);
    const HessianScan hs = hessian_min_eig(w, probes, cfg.h_fd, cfg.workers);
    ConvexityReport rep = midpoint_scan(w, ball_sampler(d, cfg.sample_radius, cfg.seed), cfg.n_triples, cfg.tol_rel,
                                        cfg.workers);
    rep.min_hessian_eigenvalue = hs.min_eig;
    rep.min_normalized_eigenvalue = hs.min_normalized;
    rep.hessian_negative = hs.min_normalized < -cfg.eig_tol;
    if (hs.ill_conditioned > 0) {
        rep.warnings.push_back(std::to_string(hs.ill_conditioned) + " probes with FD variation below 100 eps");
    }
    if (rep.hessian_negative && !rep.witness) {
        const double s = 1e-2 * detail::norm2(hs.argmin);
        Witness wit;
        wit.x = wit.y = hs.argmin;
        for (int i = 0; i < d; ++i) {
            wit.x[i] += s * hs.eigvec[i];
            wit.y[i] -= s * hs.eigvec[i];
        }
        wit.alpha = 0.5;
        wit.violation = midpoint_violation(w, wit.x, wit.y, 0.5);
        if (wit.violation > rep.tolerance) {
            rep.witness = std::move(wit);
            rep.verdict = Verdict::nonconvex_witness_found;
        } else {
            rep.warnings.push_back("negative Hessian eigenvalue without a midpoint violation above tolerance");
        }
    }
    if (rep.hessian_negative != rep.midpoint_violated) {
        rep.warnings.push_back(std::string("Hessian and midpoint scans disagree (Hessian ") +
                               (rep.hessian_negative ? "negative" : "nonnegative") + ", midpoint " +
                               (rep.midpoint_violated ? "violated" : "clean") + ")");
    }
    return rep;
}

struct EquivalenceResult {
    ConvexityReport u_report;
    ConvexityReport v_report;
    bool agree = false;
    int truncation = 0;
};

/// Convexity verdicts for u (series solution at truncation L; L < 0 picks the
/// tail-bound default on the probe radius) and for the cone function v.
inline EquivalenceResult equivalence_harness(const BoundarySpec& g, int L, const ProbeConfig& cfg) {
    cfg.validate();
    const int d = g.dim();
    const EllipticSolution u =
        L < 0 ? solve(g, default_truncation(g, std::max(cfg.r_max, cfg.sample_radius))) : solve(g, L);
    const FieldFn uf = [&u](std::span<const double> x) { return u.value(x); };
    EquivalenceResult res;
    res.truncation = u.truncation();
    res.u_report = check_convexity(uf, d, cfg);
    res.v_report = check_convexity(cone_function(g), d, cfg);
    res.agree = res.u_report.verdict == res.v_report.verdict;
    return res;
}

}  // namespace gou
