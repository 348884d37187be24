#pragma once

// Series solution u(r theta) = sum_l f_l(r) g_l(theta) of
//   (1/2) sum_ij (delta_ij + x_i x_j) d_ij u = c,  u(r theta)/r -> g(theta),
// with c = gamma_d * mean(g), plus a certified truncation bound and the
// residual / boundary-gap diagnostics.

#include "gou/harmonics.hpp"
#include "gou/radial.hpp"
#include "gou/rng.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <span>
#include <vector>

namespace gou {

/// Degree up to which the tail bound uses projected block norms.
inline constexpr int kTailDegree = 256;
/// Largest truncation chosen automatically.
inline constexpr int kMaxTruncation = 128;

/// Value of u together with a majorant of the truncated tail.
struct SolutionValue {
    double value = 0.0;
    double tail_bound = 0.0;
};

namespace detail {

inline double norm2(std::span<const double> x) {
    double s = 0.0;
    for (double v : x) s += v * v;
    return std::sqrt(s);
}

// sup_{r <= R} f_l(r) = f_l(R) (f_l is increasing), falling back to the
// Euler-integral majorant if the direct evaluation fails.
inline double mode_sup(int d, int l, double R) {
    try {
        return f_l(RadialMode(d, l), R);
    } catch (const ConvergenceError&) {
        return mode_bound(l, R);
    }
}

}  // namespace detail

/// Truncated series solution.
class EllipticSolution {
public:
    EllipticSolution(HarmonicSpectrum spectrum, int L)
        : spectrum_(std::move(spectrum)), L_(L), d_(spectrum_.d) {
        if (L_ < 0 || L_ > spectrum_.L) throw DomainError("EllipticSolution: truncation outside the projected range");
        c_ = gamma_d(d_) * spectrum_.blocks[0].a;
        for (int l = 1; l <= L_; ++l) modes_.emplace_back(d_, l);
        rho_ = std::sqrt(spectrum_.residual_norm_sq());
        if (spectrum_.blocks[0].a != 0.0) f0_ = &inhomogeneous_mode(d_);
    }

    int dim() const noexcept { return d_; }
    int truncation() const noexcept { return L_; }
    double constant() const noexcept { return c_; }
    const HarmonicSpectrum& spectrum() const noexcept { return spectrum_; }

    /// Partial sum through degree L at x.
    double value(std::span<const double> x) const {
        if (static_cast<int>(x.size()) != d_) throw DomainError("evaluate: dimension mismatch");
        const double r = detail::norm2(x);
        if (r == 0.0) return 0.0;
        std::vector<double> theta(x.begin(), x.end());
        for (double& v : theta) v /= r;
        double sum = 0.0;
        if (f0_) sum += f0_->f0(r) * spectrum_.blocks[0].a;
        for (int l = 1; l <= L_; ++l) {
            const auto& blk = spectrum_.blocks[l];
            if (blk.a == 0.0 && blk.b == 0.0) continue;
            sum += f_l(modes_[l - 1], r) * evaluate_block(spectrum_, l, theta);
        }
        return sum;
    }

    /// (value, tail bound at R = |x|).
    SolutionValue evaluate(std::span<const double> x) const {
        const double r = detail::norm2(x);
        return {value(x), tail_bound(r)};
    }

    /// Majorant of sum_{l > L} sup_{r <= R} f_l(r) * sup|g_l|.
    ///
    /// Degrees up to kTailDegree use the projected sup norms; beyond that the
    /// unprojected energy rho bounds sup|g_l| <= rho sqrt(N(d,l)). The value
    /// is computed on a log grid of radii (rounding R up), which keeps it
    /// rigorous because each f_l is increasing.
    double tail_bound(double R) const {
        if (R <= 0.0) return 0.0;
        const double grid = std::exp(std::ceil(std::log(R) * 64.0) / 64.0);
        std::lock_guard<std::mutex> lock(*cache_mutex_);
        auto it = tail_cache_->find(grid);
        if (it != tail_cache_->end()) return it->second;
        const double v = compute_tail(std::max(grid, R));
        tail_cache_->emplace(grid, v);
        return v;
    }

    /// Tail bound when truncating at L2 instead (L2 <= projected range).
    double tail_bound_at(double R, int L2) const { return tail_for(R, L2); }

    /// Tail bounds at R for every truncation 0..L_max, sharing the mode evaluations.
    std::vector<double> tail_profile(double R, int L_max) const {
        const int projected = spectrum_.L;
        if (L_max < 0 || L_max > projected) throw DomainError("tail_profile: degree out of range");
        std::vector<double> out(L_max + 1, 0.0);
        double running = tail_for(R, std::max(L_max, 0));
        out[L_max] = running;
        for (int L = L_max - 1; L >= 0; --L) {
            const int l = L + 1;
            if (spectrum_.sup_norm[l] != 0.0) running += detail::mode_sup(d_, l, R) * spectrum_.sup_norm[l];
            out[L] = running;
        }
        return out;
    }

private:
    double compute_tail(double R) const { return tail_for(R, L_); }

    double tail_for(double R, int Lt) const {
        if (R <= 0.0) return 0.0;
        const auto band = spectrum_.band_limit;
        double tail = 0.0;
        const int projected = spectrum_.L;
        for (int l = std::max(Lt + 1, 1); l <= projected; ++l) {
            if (spectrum_.sup_norm[l] == 0.0) continue;
            tail += detail::mode_sup(d_, l, R) * spectrum_.sup_norm[l];
        }
        if (band && *band <= projected) return tail;
        if (rho_ == 0.0) return tail;
        // Beyond the projection: sup|g_l| <= rho sqrt(N(d,l)); f_l(R) decays
        // like exp(-l/R), so the sum stops once terms are negligible.
        for (int l = std::max(projected + 1, Lt + 1); l < projected + 1000000; ++l) {
            const double term = detail::mode_sup(d_, l, R) * rho_ * std::sqrt(harmonic_dimension(d_, l));
            tail += term;
            if (term <= 1e-17 * tail) break;
        }
        return tail;
    }

    HarmonicSpectrum spectrum_;
    int L_;
    int d_;
    double c_ = 0.0;
    double rho_ = 0.0;
    std::vector<RadialMode> modes_;
    const InhomogeneousMode* f0_ = nullptr;
    std::shared_ptr<std::mutex> cache_mutex_ = std::make_shared<std::mutex>();
    std::shared_ptr<std::map<double, double>> tail_cache_ = std::make_shared<std::map<double, double>>();
};

/// c = gamma_d * mean(g).
inline double constant_c(const BoundarySpec& g) { return gamma_d(g.dim()) * mean(g); }

/// Solve with truncation L; blocks up to max(L, kTailDegree) feed the tail bound.
inline EllipticSolution solve(const BoundarySpec& g, int L) {
    if (L < 0) throw DomainError("solve: L must be >= 0");
    if (L > kTailDegree) throw DomainError("solve: L above the supported range");
    const auto band = g.band_limit();
    const int projected = band ? std::max(L, std::min(*band, kTailDegree)) : kTailDegree;
    return EllipticSolution(project(g, projected), L);
}

/// Smallest L <= kMaxTruncation whose tail bound at R is <= tol (kMaxTruncation if none).
inline int default_truncation(const BoundarySpec& g, double R, double tol = 1e-8) {
    const auto band = g.band_limit();
    const EllipticSolution full = solve(g, 0);
    const std::vector<double> tails = full.tail_profile(R, band ? std::min(*band, kMaxTruncation) : kMaxTruncation);
    for (std::size_t L = 0; L < tails.size(); ++L) {
        if (tails[L] <= tol) return static_cast<int>(L);
    }
    return static_cast<int>(tails.size()) - 1;
}

/// Solve with the default truncation for radii up to R.
inline EllipticSolution solve_auto(const BoundarySpec& g, double R, double tol = 1e-8) {
    return solve(g, default_truncation(g, R, tol));
}

/// Central-difference Hessian of w at x with per-axis step h.
template <class W>
std::vector<double> fd_hessian(const W& w, std::span<const double> x, double h) {
    const int d = static_cast<int>(x.size());
    std::vector<double> H(d * d, 0.0);
    std::vector<double> p(x.begin(), x.end());
    const double w0 = w(std::span<const double>(p));
    for (int i = 0; i < d; ++i) {
        p[i] = x[i] + h;
        const double wp = w(std::span<const double>(p));
        p[i] = x[i] - h;
        const double wm = w(std::span<const double>(p));
        p[i] = x[i];
        H[i * d + i] = (wp - 2.0 * w0 + wm) / (h * h);
        for (int j = i + 1; j < d; ++j) {
            auto at = [&](double si, double sj) {
                p[i] = x[i] + si * h;
                p[j] = x[j] + sj * h;
                const double v = w(std::span<const double>(p));
                p[i] = x[i];
                p[j] = x[j];
                return v;
            };
            const double hij = (at(1, 1) - at(1, -1) - at(-1, 1) + at(-1, -1)) / (4.0 * h * h);
            H[i * d + j] = H[j * d + i] = hij;
        }
    }
    return H;
}

/// Default relative step of the residual stencil.
inline constexpr double kResidualStep = 2.5e-4;

/// |(1/2) sum_ij (delta_ij + x_i x_j) H_ij - c| with the FD Hessian of u.
inline double residual(const EllipticSolution& u, std::span<const double> x, double h_fd = kResidualStep) {
    if (!(h_fd > 0.0)) throw DomainError("residual: h_fd must be positive");
    const double r = detail::norm2(x);
    const double h = h_fd * std::max(1.0, r);
    if (!(r > h)) throw DomainError("residual: |x| must exceed the stencil width");
    const auto H = fd_hessian([&](std::span<const double> p) { return u.value(p); }, x, h);
    const int d = u.dim();
    double op = 0.0;
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) op += ((i == j ? 1.0 : 0.0) + x[i] * x[j]) * H[i * d + j];
    }
    return std::fabs(0.5 * op - u.constant());
}

/// Quasi-uniform directions on S^{d-1}: equispaced angles for d = 2, a
/// Fibonacci lattice for d = 3, and normalized seeded Gaussians otherwise.
inline std::vector<Point> sphere_directions(int d, int n) {
    if (d < 2 || n < 1) throw DomainError("sphere_directions: need d >= 2 and n >= 1");
    std::vector<Point> out;
    out.reserve(n);
    if (d == 2) {
        for (int j = 0; j < n; ++j) {
            const double phi = 2.0 * std::numbers::pi * (j + 0.5) / n;
            out.push_back({std::cos(phi), std::sin(phi)});
        }
        return out;
    }
    if (d == 3) {
        const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
        for (int j = 0; j < n; ++j) {
            const double z = 1.0 - 2.0 * (j + 0.5) / n;
            const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
            out.push_back({rho * std::cos(golden * j), rho * std::sin(golden * j), z});
        }
        return out;
    }
    for (int j = 0; j < n; ++j) {
        Philox stream(0x5eed'd1ec'7105ULL, static_cast<std::uint64_t>(j));
        Point x(d);
        double n2 = 0.0;
        for (double& v : x) {
            v = stream.normal();
            n2 += v * v;
        }
        for (double& v : x) v /= std::sqrt(n2);
        out.push_back(std::move(x));
    }
    return out;
}


/// max over n_dirs directions of |u(r theta)/r - g(theta)|.
inline double boundary_gap(const EllipticSolution& u, const BoundarySpec& g, double r, int n_dirs = 64) {
    if (!(r > 0.0)) throw DomainError("boundary_gap: r must be positive");
    if (n_dirs < 8) throw DomainError("boundary_gap: need at least 8 directions");
    double worst = 0.0;
    for (const Point& theta : sphere_directions(u.dim(), n_dirs)) {
        Point x = theta;
        for (double& v : x) v *= r;
        worst = std::max(worst, std::fabs(u.value(x) / r - g(theta)));
    }
    return worst;
}

/// max over samples of |u(x)| / ((1+|x|) sup|g|); requires mean(g) = 0.
inline double max_principle_ratio(const EllipticSolution& u, const BoundarySpec& g, const std::vector<Point>& samples) {
    if (samples.empty()) throw DomainError("max_principle_ratio: no samples");
    if (std::fabs(mean(g)) > 1e-10) throw DomainError("max_principle_ratio: boundary data must have mean 0");
    const double sup = sup_abs(g);
    if (sup == 0.0) return 0.0;
    double worst = 0.0;
    for (const Point& x : samples) {
        worst = std::max(worst, std::fabs(u.value(x)) / ((1.0 + detail::norm2(x)) * sup));
    }
    return worst;
}

/// Log-spaced radii in [r_min, r_max] times quasi-uniform directions.
inline std::vector<Point> log_radial_samples(int d, double r_min, double r_max, int n_radii, int n_dirs) {
    std::vector<Point> out;
    const auto dirs = sphere_directions(d, n_dirs);
    for (int i = 0; i < n_radii; ++i) {
        const double r = n_radii == 1 ? r_min : r_min * std::pow(r_max / r_min, static_cast<double>(i) / (n_radii - 1));
        for (const Point& th : dirs) {
            Point x = th;
            for (double& v : x) v *= r;
            out.push_back(std::move(x));
        }
    }
    return out;
}

}  // namespace gou
