#pragma once

// Radial building blocks of the series solution: the modes f_l (l >= 1), the
// inhomogeneous mode f_0 with its deviation r - f_0, the scale function h of
// the radius process, and the decay envelope used to truncate the series.

#include "gou/errors.hpp"
#include "gou/quadrature.hpp"
#include "gou/specfun.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <vector>

namespace gou {

/// Degree-l radial mode in dimension d with its precomputed log-prefactor
///   ln[Gamma((l+d+1)/2) Gamma(l/2)] - ln[Gamma(l+d/2) Gamma(1/2)].
class RadialMode {
public:
    RadialMode(int d, int l) : d_(d), l_(l) {
        if (d < 2) throw DomainError("RadialMode: dimension must be >= 2");
        if (l < 0) throw DomainError("RadialMode: degree must be >= 0");
        if (l >= 1) {
            log_prefactor_ = detail::log_gamma_ext((l + d + 1) / 2.0L) + detail::log_gamma_ext(l / 2.0L) -
                             detail::log_gamma_ext(l + d / 2.0L) - detail::log_gamma_ext(0.5L);
        }
    }

    int d() const noexcept { return d_; }
    int l() const noexcept { return l_; }
    double log_prefactor() const noexcept { return static_cast<double>(log_prefactor_); }
    ldouble log_prefactor_ext() const noexcept { return log_prefactor_; }
    double eigenvalue() const noexcept { return static_cast<double>(l_) * (l_ + d_ - 2); }

private:
    int d_;
    int l_;
    ldouble log_prefactor_ = 0.0L;
};

namespace detail {

// F(l-1, -d/2; l+d/2; zeta) for zeta in (-1, 0].
//
// For even d the series terminates after d/2 + 1 terms. For odd d the terms
// alternate in sign and decrease in magnitude once n > d/2, so the remainder
// is bounded by the first omitted term.
inline ldouble radial_quadratic_series(int d, int l, ldouble zeta) {
    const ldouble a = l - 1.0L, b = -0.5L * d, c = l + 0.5L * d;
    ldouble term = 1.0L, sum = 1.0L;
    if (a == 0.0L || zeta == 0.0L) return 1.0L;
    const ldouble eps = std::numeric_limits<ldouble>::epsilon();
    for (long n = 0; n < 2000000; ++n) {
        term *= (a + n) * (b + n) / ((c + n) * (n + 1.0L)) * zeta;
        sum += term;
        if (term == 0.0L) return sum;
        if (n + 1.0L > -b && std::fabs(term) <= 0.25L * eps * std::fabs(sum)) return sum;
    }
    throw ConvergenceError("f_l: quadratic-transformation series did not converge", static_cast<double>(std::fabs(term)));
}

// ln f_l(r) for l >= 2, r > 0, in extended precision.
//
// Since a - b = 1/2 for the radial family, the quadratic transformation
//   F(a', a'+1/2; c; x) = ((1+S)/2)^{-2a'} F(2a', 2a'-c+1; c; (1-S)/(1+S)),  S = sqrt(1-x),
// with a' = (l-1)/2 and x = -r^2 gives
//   f_l(r) = r P_l (2r/(1+S))^{l-1} F(l-1, -d/2; l+d/2; -r^2/(1+S)^2).
// Every factor is positive and the series argument stays in (-1, 0].
inline ldouble log_f_l_ext(const RadialMode& mode, ldouble r) {
    const ldouble S = std::sqrt(1.0L + r * r);
    const ldouble log_ratio = std::log(r) - std::log1p(r * r / (2.0L * (1.0L + S)));
    const ldouble zeta = -(r * r) / ((1.0L + S) * (1.0L + S));
    const ldouble F = radial_quadratic_series(mode.d(), mode.l(), zeta);
    if (!(F > 0.0L)) throw ConvergenceError("f_l: nonpositive hypergeometric factor", 0.0);
    return std::log(r) + mode.log_prefactor_ext() + (mode.l() - 1) * log_ratio + std::log(F);
}

// ln f_l(r) through Pfaff's transformation and the Gauss series in
// z = r^2/(1+r^2); an independent route used for cross-checks.
inline ldouble log_f_l_pfaff(const RadialMode& mode, ldouble r) {
    const ldouble inv_r2 = 1.0L / (r * r);
    const ldouble w = 1.0L / (1.0L + r * r);
    const ldouble z = 1.0L / (1.0L + inv_r2);
    const ldouble log_z = -std::log1p(inv_r2);
    const PfaffValue g = pfaff_reduced(HypParams::radial(mode.l(), mode.d()), z, w);
    if (!(g.value > 0.0L)) throw ConvergenceError("f_l: nonpositive hypergeometric factor", 0.0);
    return std::log(r) + 0.5L * (mode.l() - 1) * log_z + mode.log_prefactor_ext() + std::log(g.value);
}

}  // namespace detail

/// ln f_l(r); -infinity at r = 0.
inline double log_f_l(const RadialMode& mode, double r) {
    if (mode.l() < 1) throw DomainError("log_f_l: degree must be >= 1");
    if (!(r >= 0.0)) throw DomainError("log_f_l: radius must be >= 0");
    if (r == 0.0) return -std::numeric_limits<double>::infinity();
    if (mode.l() == 1) return std::log(r);
    return static_cast<double>(detail::log_f_l_ext(mode, r));
}

/// f_l(r) = r^l P_l 2F1(l/2, (l-1)/2; l+d/2; -r^2), evaluated in log space.
///
/// Satisfies 0 <= f_l(r) <= r; values below the double range underflow to 0
/// (use log_f_l to compare them).
inline double f_l(const RadialMode& mode, double r) {
    if (mode.l() < 1) throw DomainError("f_l: degree must be >= 1");
    if (!(r >= 0.0)) throw DomainError("f_l: radius must be >= 0");
    if (r == 0.0) return 0.0;
    if (mode.l() == 1) return r;
    if (std::isinf(r)) return r;
    const ldouble lf = detail::log_f_l_ext(mode, r);
    const double v = static_cast<double>(std::exp(lf));
    if (std::isinf(v)) throw OverflowError("f_l: value exceeds the double range");
    return std::min(v, r);
}

/// Cheap rigorous majorant of sup_{r <= R} f_l(r) = f_l(R).
///
/// From Euler's integral f_l(R) = G_l R^l int t^{(l-3)/2} (1-t)^{(l+d-1)/2} (1+R^2 t)^{-l/2} dt
/// with G_l = Gamma(l/2)/(Gamma((l-1)/2) sqrt(pi)): bounding t(1-t)/(1+R^2 t) by its
/// maximum m gives f_l(R) <= 2 G_l (R sqrt(m))^{l-3} R (1 - 1/sqrt(1+R^2)) for l >= 3.
inline double mode_bound(int l, double R) {
    if (l < 1) throw DomainError("mode_bound: degree must be >= 1");
    if (!(R >= 0.0)) throw DomainError("mode_bound: radius must be >= 0");
    if (R == 0.0) return 0.0;
    if (l <= 2) return R;
    const ldouble R2 = static_cast<ldouble>(R) * R;
    const ldouble s = std::sqrt(1.0L + R2);
    const ldouble t = (s - 1.0L) / R2;  // argmax of t(1-t)/(1+R^2 t)
    const ldouble m = t * (1.0L - t) / (1.0L + R2 * t);
    const ldouble log_g = detail::log_gamma_ext(l / 2.0L) - detail::log_gamma_ext((l - 1) / 2.0L) -
                          0.5L * std::log(std::numbers::pi_v<ldouble>);
    const ldouble log_bound = std::log(2.0L) + log_g + (l - 3) * 0.5L * std::log(R2 * m) + std::log(R) +
                              std::log(1.0L - 1.0L / s);
    return std::min(R, static_cast<double>(std::exp(log_bound)));
}

namespace detail {

// x^{k/2} for integer k, x > 0, without calling pow.
inline ldouble pow_half(ldouble x, int k) {
    const bool neg = k < 0;
    int n = neg ? -k : k;
    ldouble out = (n % 2 == 1) ? std::sqrt(x) : 1.0L;
    n /= 2;
    ldouble base = x;
    while (n > 0) {
        if (n & 1) out *= base;
        base *= base;
        n >>= 1;
    }
    return neg ? 1.0L / out : out;
}

}  // namespace detail

/// The inhomogeneous mode f_0 of one dimension with cached panel anchors.
///
/// f_0(r) = 2 gamma_d int_0^r ((1+u^2)/u^2)^{(d-1)/2} I(u) du,
/// I(u) = int_0^u v^{d-1} (1+v^2)^{-(d+1)/2} dv.
/// Below r = 1 the outer integral is one Gauss-Legendre panel on [0, r] (the
/// integrand is analytic there, F(u) ~ 2 gamma_d u / d). Above r = 1 the
/// deviation r - f_0 is accumulated over geometric panels [2^k, 2^{k+1}] of
/// 1 - F, which decays like 2 gamma_d / u; anchors at the powers of two are
/// precomputed so an evaluation costs one partial panel.
class InhomogeneousMode {
public:
    explicit InhomogeneousMode(int d, QuadratureRule rule = gauss_legendre(20))
        : d_(d), rule_(std::move(rule)) {
        if (d < 2) throw DomainError("InhomogeneousMode: dimension must be >= 2");
        gamma_ = detail::log_gamma_ext((d + 1) / 2.0L) - detail::log_gamma_ext(d / 2.0L);
        gamma_ = std::exp(gamma_) / std::sqrt(std::numbers::pi_v<ldouble>);
        // Anchors: hat(1), hat(2), ..., hat(2^kAnchors).
        const ldouble f1 = outer_small(1.0L, rule_);
        const QuadratureRule fine = gauss_legendre(2 * static_cast<int>(rule_.size()));
        error_ = std::fabs(static_cast<double>(f1 - outer_small(1.0L, fine)));
        ldouble hat = 1.0L - f1;
        anchors_.push_back(hat);
        for (int k = 0; k < kAnchors; ++k) {
            const ldouble lo = std::ldexp(1.0L, k);
            const ldouble coarse = panel(lo, 2.0L * lo, rule_);
            const ldouble refined = panel(lo, 1.5L * lo, rule_) + panel(1.5L * lo, 2.0L * lo, rule_);
            error_ = std::max(error_, static_cast<double>(std::fabs(coarse - refined)));
            hat += refined;
            anchors_.push_back(hat);
        }
    }

    int d() const noexcept { return d_; }
    double gamma() const noexcept { return static_cast<double>(gamma_); }
    /// Largest panel discrepancy seen while building the anchors.
    double error_estimate() const noexcept { return error_; }

    /// f_0(r).
    double f0(double r) const { return static_cast<double>(f0_ext(r)); }

    /// r - f_0(r).
    double f0_hat(double r) const {
        check_radius(r);
        if (r < 1.0) return static_cast<double>(r - outer_small(r, rule_));
        return static_cast<double>(hat_large(r));
    }

    ldouble f0_ext(ldouble r) const {
        check_radius(static_cast<double>(r));
        if (r == 0.0L) return 0.0L;
        if (r < 1.0L) return outer_small(r, rule_);
        return r - hat_large(r);
    }

    /// f_0'(u) = 2 gamma_d ((1+u^2)/u^2)^{(d-1)/2} I(u).
    double derivative(double u) const {
        check_radius(u);
        if (u < 1.0) return static_cast<double>(slope_small(u));
        return static_cast<double>(1.0L - one_minus_slope(u));
    }

    /// 2 gamma_d I(u), which tends to 1 as u -> infinity.
    double inner_normalized(double u) const {
        check_radius(u);
        if (u == 0.0) return 0.0;
        if (u <= 1.0) {
            const ldouble uu = u;
            return static_cast<double>(2.0L * gamma_ * detail::pow_half(uu, 2 * d_) * inner_scaled(uu));
        }
        return static_cast<double>(1.0L - 2.0L * gamma_ * complement(u));
    }

private:
    static constexpr int kAnchors = 48;

    static void check_radius(double r) {
        if (!(r >= 0.0)) throw DomainError("f_0: radius must be >= 0");
        if (std::isinf(r)) throw DomainError("f_0: radius must be finite");
    }

    // int_0^1 s^{d-1} (1+u^2 s^2)^{-(d+1)/2} ds, so that I(u) = u^d * this.
    ldouble inner_scaled(ldouble u) const {
        const ldouble u2 = u * u;
        ldouble sum = 0.0L;
        for (std::size_t i = 0; i < rule_.size(); ++i) {
            const ldouble s = 0.5L * (1.0L + rule_.nodes[i]);
            const ldouble s2 = s * s;
            sum += rule_.weights[i] * detail::pow_half(s2, d_ - 1) * detail::pow_half(1.0L + u2 * s2, -(d_ + 1));
        }
        return 0.5L * sum;
    }

    // J(u) = int_0^{1/u} (1+w^2)^{-(d+1)/2} dw = I(inf) - I(u), u >= 1.
    ldouble complement(ldouble u) const {
        const ldouble top = 1.0L / u;
        ldouble sum = 0.0L;
        for (std::size_t i = 0; i < rule_.size(); ++i) {
            const ldouble w = 0.5L * top * (1.0L + rule_.nodes[i]);
            sum += rule_.weights[i] * detail::pow_half(1.0L + w * w, -(d_ + 1));
        }
        return 0.5L * top * sum;
    }

    // F(u) for u <= 1 in the form 2 gamma_d (1+u^2)^{(d-1)/2} u int_0^1 ..., free of 0/0.
    ldouble slope_small(ldouble u) const {
        return 2.0L * gamma_ * detail::pow_half(1.0L + u * u, d_ - 1) * u * inner_scaled(u);
    }

    // 1 - F(u) for u >= 1 without the cancellation of 1 - F.
    ldouble one_minus_slope(ldouble u) const {
        const ldouble e = 0.5L * (d_ - 1) * std::log1p(1.0L / (u * u));
        const ldouble q = std::exp(e);
        return -std::expm1(e) + 2.0L * gamma_ * q * complement(u);
    }

    ldouble outer_small(ldouble r, const QuadratureRule& rule) const {
        ldouble sum = 0.0L;
        for (std::size_t i = 0; i < rule.size(); ++i) {
            sum += rule.weights[i] * slope_small(0.5L * r * (1.0L + rule.nodes[i]));
        }
        return 0.5L * r * sum;
    }

    ldouble panel(ldouble a, ldouble b, const QuadratureRule& rule) const {
        const ldouble half = 0.5L * (b - a);
        const ldouble mid = 0.5L * (a + b);
        ldouble sum = 0.0L;
        for (std::size_t i = 0; i < rule.size(); ++i) sum += rule.weights[i] * one_minus_slope(mid + half * rule.nodes[i]);
        return half * sum;
    }

    ldouble hat_large(ldouble r) const {
        int k = std::ilogb(r);  // 2^k <= r < 2^{k+1}
        ldouble lo;
        ldouble hat;
        if (k < kAnchors) {
            lo = std::ldexp(1.0L, k);
            hat = anchors_[k];
        } else {
            lo = std::ldexp(1.0L, kAnchors);
            hat = anchors_[kAnchors];
            while (2.0L * lo <= r) {
                hat += panel(lo, 2.0L * lo, rule_);
                lo *= 2.0L;
            }
        }
        if (r > lo) hat += panel(lo, r, rule_);
        return hat;
    }

    int d_;
    QuadratureRule rule_;
    ldouble gamma_ = 0.0L;
    std::vector<ldouble> anchors_;
    double error_ = 0.0;
};

/// Shared read-only InhomogeneousMode for dimension d with the default rule.
inline const InhomogeneousMode& inhomogeneous_mode(int d) {
    static std::mutex mutex;
    static std::map<int, std::unique_ptr<InhomogeneousMode>> cache;
    std::lock_guard<std::mutex> lock(mutex);
    auto& slot = cache[d];
    if (!slot) slot = std::make_unique<InhomogeneousMode>(d);
    return *slot;
}

/// f_0(r) with a caller-chosen rule. Throws QuadratureError when the panel
/// discrepancies exceed 1e-9.
inline double f_0(int d, double r, const QuadratureRule& rule) {
    const InhomogeneousMode mode(d, rule);
    if (mode.error_estimate() > 1e-9) {
        throw QuadratureError("f_0: quadrature discrepancy above 1e-9", mode.error_estimate());
    }
    return mode.f0(r);
}

/// f_0(r) with the default cached rule.
inline double f_0(int d, double r) { return inhomogeneous_mode(d).f0(r); }

/// r - f_0(r), which grows only logarithmically.
inline double f0_hat(int d, double r) { return inhomogeneous_mode(d).f0_hat(r); }

/// Default floor below which scale_h reports divergence.
inline constexpr double kScaleFloor = 1e-8;

/// h(r) = int_1^r ((1+u^2)/u^2)^{(d-1)/2} du; -infinity below `floor`.
inline double scale_h(int d, double r, double floor = kScaleFloor) {
    if (d < 2) throw DomainError("scale_h: dimension must be >= 2");
    if (!(r > 0.0)) throw DomainError("scale_h: radius must be positive");
    if (r < floor) return -std::numeric_limits<double>::infinity();
    if (r == 1.0) return 0.0;
    static const QuadratureRule rule = gauss_legendre(20);
    if (r > 1.0) {
        // (r - 1) + int (q - 1), q - 1 ~ (d-1)/(2u^2).
        auto excess = [d](double u) {
            return static_cast<double>(std::expm1(0.5L * (d - 1) * std::log1p(1.0L / (static_cast<ldouble>(u) * u))));
        };
        return (r - 1.0) + integrate_geometric(rule, excess, 1.0, r).value;
    }
    auto integrand = [d](double u) {
        const ldouble uu = u;
        return static_cast<double>(detail::pow_half((1.0L + uu * uu) / (uu * uu), d - 1));
    };
    return integrate_geometric(rule, integrand, 1.0, r).value;
}

/// delta = (R/sqrt(1+R^2) + 1)/2, the midpoint between the lower bound and 1.
inline double decay_delta(double R) {
    if (!(R > 0.0)) throw DomainError("decay_delta: R must be positive");
    return 0.5 * (R / std::sqrt(1.0 + R * R) + 1.0);
}

/// delta^l with the midpoint delta.
inline double decay_envelope(int d, double R, int l) {
    if (d < 2) throw DomainError("decay_envelope: dimension must be >= 2");
    if (l < 1) throw DomainError("decay_envelope: degree must be >= 1");
    return std::pow(decay_delta(R), l);
}

/// Measured onset of the decay bound.
struct DecayOnset {
    int onset;      ///< smallest L0 with sup_{r<=R} f_l <= delta^l for all l in [L0, lmax]; lmax+1 if none
    int lmax;
    std::vector<double> log_sup;  ///< ln sup_{r<=R} f_l(r) over the grid, index l-1
};

/// Grid sweep of sup_{r <= R} f_l(r) against delta^l for l = 1..lmax, in log space.
inline DecayOnset decay_onset(int d, double R, int lmax = 60, int n_grid = 200) {
    if (lmax < 1 || n_grid < 2) throw DomainError("decay_onset: need lmax >= 1 and n_grid >= 2");
    DecayOnset out{lmax + 1, lmax, {}};
    const double log_delta = std::log(decay_delta(R));
    std::vector<bool> holds(lmax + 1, false);
    for (int l = 1; l <= lmax; ++l) {
        const RadialMode mode(d, l);
        double sup = -std::numeric_limits<double>::infinity();
        for (int i = 1; i <= n_grid; ++i) sup = std::max(sup, log_f_l(mode, R * i / n_grid));
        out.log_sup.push_back(sup);
        holds[l] = sup <= l * log_delta;
    }
    for (int l = lmax; l >= 1 && holds[l]; --l) out.onset = l;
    return out;
}

/// Central-difference residual of A_R f - (l(l+d-2)/(2r^2)) f - rhs at r,
/// with A_R = (1/2)(1+r^2) d^2/dr^2 + ((d-1)/(2r)) d/dr and step h_rel*max(1,r).
template <class F>
double radial_residual(F&& f, int d, int l, double rhs, double r, double h_rel = 1e-4) {
    const double h = h_rel * std::max(1.0, r);
    const double fm = f(r - h), f0v = f(r), fp = f(r + h);
    const double d2 = (fp - 2.0 * f0v + fm) / (h * h);
    const double d1 = (fp - fm) / (2.0 * h);
    const double lap = 0.5 * (1.0 + r * r) * d2 + (d - 1) / (2.0 * r) * d1;
    return lap - static_cast<double>(l) * (l + d - 2) / (2.0 * r * r) * f0v - rhs;
}

}  // namespace gou
