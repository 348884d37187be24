#pragma once

// Special functions used by the radial and angular parts of the solver:
// log-gamma, the sphere constant gamma_d, the Gauss hypergeometric function
// on the negative real axis, and Gegenbauer / Chebyshev polynomials.
//
// Internals run in long double (80-bit on x86-64) and round once on return;
// the finite-difference residual checks downstream amplify any evaluation
// noise by ~1/h^2, so smooth and correctly rounded values matter more than
// raw speed here.

#include "gou/errors.hpp"
#include "gou/quadrature.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace gou {

using ldouble = long double;

namespace detail {

inline constexpr ldouble kEulerGamma = 0.5772156649015328606065121L;

// zeta(2) ... zeta(30)
inline constexpr std::array<ldouble, 29> kZeta = {
    1.644934066848226436472415L, 1.202056903159594285399738L, 1.082323233711138191516004L,
    1.036927755143369926331365L, 1.017343061984449139714518L, 1.008349277381922826839798L,
    1.004077356197944339378685L, 1.002008392826082214417853L, 1.000994575127818085337146L,
    1.000494188604119464558702L, 1.000246086553308048298638L, 1.000122713347578489146752L,
    1.000061248135058704829259L, 1.000030588236307020493552L, 1.000015282259408651871733L,
    1.000007637197637899762274L, 1.000003817293264999839856L, 1.000001908212716553938926L,
    1.000000953962033872796113L, 1.000000476932986787806463L, 1.00000023845050272773299L,
    1.000000119219925965311073L, 1.00000005960818905125948L,  1.00000002980350351465228L,
    1.000000014901554828365041L, 1.000000007450711789835429L, 1.000000003725334024788457L,
    1.000000001862659723513049L, 1.000000000931327432419668L};

// B_{2k} / (2k (2k-1)) for k = 1..10 (Stirling series coefficients).
inline constexpr std::array<ldouble, 10> kStirling = {
    1.0L / 12.0L,         -1.0L / 360.0L,          1.0L / 1260.0L,
    -1.0L / 1680.0L,      1.0L / 1188.0L,          -691.0L / 360360.0L,
    1.0L / 156.0L,        -3617.0L / 122400.0L,    43867.0L / 244188.0L,
    -174611.0L / 125400.0L};

// ln Gamma(1 + z) for |z| <= 0.2 by its Taylor series around 1.
inline ldouble lgamma1p_taylor(ldouble z) {
    ldouble sum = -kEulerGamma * z;
    ldouble zk = -z;
    for (std::size_t k = 0; k < kZeta.size(); ++k) {
        zk *= -z;
        sum += kZeta[k] * zk / static_cast<ldouble>(k + 2);
    }
    return sum;
}

inline ldouble lgamma_stirling(ldouble x) {
    const ldouble inv = 1.0L / x;
    const ldouble inv2 = inv * inv;
    ldouble series = 0.0L;
    ldouble p = inv;
    for (ldouble c : kStirling) {
        series += c * p;
        p *= inv2;
    }
    return (x - 0.5L) * std::log(x) - x + 0.5L * std::log(2.0L * std::numbers::pi_v<ldouble>) + series;
}

inline ldouble log_gamma_ext(ldouble x) {
    if (x == 1.0L || x == 2.0L) return 0.0L;
    if (std::fabs(x - 1.0L) <= 0.2L) return lgamma1p_taylor(x - 1.0L);
    if (std::fabs(x - 2.0L) <= 0.2L) return std::log1p(x - 2.0L) + lgamma1p_taylor(x - 2.0L);
    if (x >= 12.0L) return lgamma_stirling(x);
    // Shift upward into the Stirling range; the product stays far from overflow.
    ldouble prod = 1.0L;
    ldouble y = x;
    while (y < 12.0L) {
        prod *= y;
        y += 1.0L;
    }
    return lgamma_stirling(y) - std::log(prod);
}

}  // namespace detail

/// ln Gamma(x) for x > 0.
inline double log_gamma(double x) {
    if (!(x > 0.0)) throw DomainError("log_gamma: argument must be positive, got " + std::to_string(x));
    if (std::isinf(x)) return x;
    return static_cast<double>(detail::log_gamma_ext(x));
}

/// Sign and ln|Gamma(x)| for real x that is not a nonpositive integer.
struct SignedLogGamma {
    int sign;
    ldouble log_abs;
};

inline SignedLogGamma signed_log_gamma(ldouble x) {
    if (x > 0.0L) return {1, detail::log_gamma_ext(x)};
    if (x == std::floor(x)) throw DomainError("signed_log_gamma: pole at nonpositive integer");
    // Reflection: Gamma(x) Gamma(1-x) = pi / sin(pi x).
    const ldouble s = std::sin(std::numbers::pi_v<ldouble> * x);
    const int sign = s > 0.0L ? 1 : -1;
    return {sign, std::log(std::numbers::pi_v<ldouble> / std::fabs(s)) - detail::log_gamma_ext(1.0L - x)};
}

/// The sphere constant (1/sqrt(pi)) Gamma((d+1)/2) / Gamma(d/2).
///
/// With the probability-normalized surface measure, gamma_d * mean(g) is the
/// right-hand constant c paired with boundary data g.
inline double gamma_d(int d) {
    if (d < 2) throw DomainError("gamma_d: dimension must be >= 2");
    const ldouble v = std::exp(detail::log_gamma_ext((d + 1) / 2.0L) - detail::log_gamma_ext(d / 2.0L)) /
                      std::sqrt(std::numbers::pi_v<ldouble>);
    return static_cast<double>(v);
}

/// Hypergeometric parameters (a, b; c).
struct HypParams {
    double a = 0.0;
    double b = 0.0;
    double c = 1.0;

    /// The family a = l/2, b = (l-1)/2, c = l + d/2 of the radial modes.
    static HypParams radial(int l, int d) { return {l / 2.0, (l - 1) / 2.0, l + d / 2.0}; }
};

/// Outcome of a Gauss series summation.
struct SeriesSum {
    ldouble value = 0.0L;
    ldouble abs_sum = 0.0L;  ///< sum of |terms|, for conditioning checks
    long terms = 0;
    bool converged = false;
};

/// Gauss series sum_n (A)_n (B)_n / ((C)_n n!) z^n for 0 <= z < 1.
///
/// Stops once a rigorous bound on the remaining tail is below rel_tol times
/// the partial sum. For positive A, B, C the ratio of consecutive
/// coefficients beyond index n is at most
///   max(1, (A+n)/(C+n)) * max(1, (B+n)/(n+1)),
/// since each factor moves monotonically toward 1; the tail is then
/// dominated by a geometric series.
inline SeriesSum gauss_series(ldouble A, ldouble B, ldouble C, ldouble z, long max_terms = 50000,
                              ldouble rel_tol = std::numeric_limits<ldouble>::epsilon()) {
    SeriesSum out;
    ldouble term = 1.0L;
    out.value = 1.0L;
    out.abs_sum = 1.0L;
    out.terms = 1;
    if (z == 0.0L || A == 0.0L || B == 0.0L) {
        out.converged = true;
        return out;
    }
    const bool positive = A > 0.0L && B > 0.0L && C > 0.0L;
    for (long n = 0; n < max_terms; ++n) {
        const ldouble ratio = (A + n) * (B + n) / ((C + n) * (n + 1.0L)) * z;
        term *= ratio;
        out.value += term;
        out.abs_sum += std::fabs(term);
        out.terms = n + 2;
        if (term == 0.0L) {
            out.converged = true;
            break;
        }
        ldouble rho;
        const ldouble m = n + 1.0L;
        if (positive) {
            rho = z * std::max(1.0L, (A + m) / (C + m)) * std::max(1.0L, (B + m) / (m + 1.0L));
        } else {
            // Past the sign changes of (A)_n, (B)_n the ratio tends to z; use the
            // observed next ratio as a heuristic majorant.
            rho = std::max(z, std::fabs((A + m) * (B + m) / ((C + m) * (m + 1.0L)) * z));
        }
        if (rho >= 1.0L) continue;
        if (std::fabs(term) * rho / (1.0L - rho) <= rel_tol * std::fabs(out.value)) {
            out.converged = true;
            break;
        }
    }
    return out;
}

namespace detail {

// Euler integral for 2F1(a,b;c;x), x <= 0, after t = s^2:
//   Gamma(c)/(Gamma(b)Gamma(c-b)) * 2 * int_0^1 s^{2b-1} (1-s^2)^{c-b-1} (1-x s^2)^{-a} ds.
inline double hyp2f1_euler_impl(const HypParams& p, double x, double rel_tol) {
    if (!(p.b > 0.0) || !(p.c > p.b)) {
        throw DomainError("hyp2f1_euler: requires c > b > 0");
    }
    const double log_front = static_cast<double>(detail::log_gamma_ext(p.c) - detail::log_gamma_ext(p.b) -
                                                 detail::log_gamma_ext(p.c - p.b));
    auto integrand = [&](double s) {
        if (s <= 0.0) return (2.0 * p.b - 1.0 == 0.0) ? 2.0 * std::exp(log_front) : 0.0;
        if (s >= 1.0) return 0.0;
        const double s2 = s * s;
        const double lg = (2.0 * p.b - 1.0) * std::log(s) + (p.c - p.b - 1.0) * std::log1p(-s2) -
                          p.a * std::log1p(-x * s2) + log_front;
        return 2.0 * std::exp(lg);
    };
    // Break points near the peak, which sits around s ~ 1/sqrt(|x|) for large |x|.
    double value = 0.0;
    double prev = 0.0;
    const double scale = 1.0 / std::sqrt(1.0 - x);
    for (double cut : {0.25 * scale, scale, 4.0 * scale, 1.0}) {
        if (cut <= prev) continue;
        cut = std::min(cut, 1.0);
        value += integrate_adaptive(integrand, prev, cut, rel_tol, 0.0, 20000).value;
        prev = cut;
        if (prev >= 1.0) break;
    }
    return value;
}

}  // namespace detail

/// 2F1(a,b;c;x) for x <= 0 by adaptive quadrature of Euler's integral.
///
/// Independent of the series routes; requires c > b > 0.
inline double hyp2f1_euler(const HypParams& p, double x, double rel_tol = 1e-13) {
    if (x > 0.0) throw DomainError("hyp2f1_euler: x must be <= 0");
    return detail::hyp2f1_euler_impl(p, x, rel_tol);
}

/// Which evaluation route produced a hypergeometric value.
enum class HypRoute { trivial, gauss_series, connection, euler_quadrature };

/// F(c-a, b; c; z) at z = x/(x-1), i.e. 2F1(a,b;c;x) * (1-x)^b.
struct PfaffValue {
    ldouble value;
    HypRoute route;
};

namespace detail {

// Connection formula around z = 1 for F(A,B;C;z) with s = C - A - B not an integer:
//   F = G(C)G(s)/(G(C-A)G(C-B)) F(A,B;1-s;w) + w^s G(C)G(-s)/(G(A)G(B)) F(C-A,C-B;1+s;w),
// w = 1 - z. Returns false when the two halves cancel too strongly.
inline bool connection_formula(ldouble A, ldouble B, ldouble C, ldouble w, ldouble& out) {
    const ldouble s = C - A - B;
    if (std::fabs(s - std::round(s)) < 1e-6L) return false;
    if (A <= 0.0L || B <= 0.0L || C <= 0.0L) return false;
    if (w > 0.5L) return false;
    const SeriesSum first = gauss_series(A, B, 1.0L - s, w, 4000);
    const SeriesSum second = gauss_series(C - A, C - B, 1.0L + s, w, 4000);
    if (!first.converged || !second.converged) return false;
    const auto gc = signed_log_gamma(C);
    const auto gs = signed_log_gamma(s);
    const auto gms = signed_log_gamma(-s);
    const auto gca = signed_log_gamma(C - A);
    const auto gcb = signed_log_gamma(C - B);
    const auto ga = signed_log_gamma(A);
    const auto gb = signed_log_gamma(B);
    const ldouble k1 = gc.sign * gs.sign * gca.sign * gcb.sign *
                       std::exp(gc.log_abs + gs.log_abs - gca.log_abs - gcb.log_abs);
    const ldouble k2 = gc.sign * gms.sign * ga.sign * gb.sign *
                       std::exp(gc.log_abs + gms.log_abs - ga.log_abs - gb.log_abs) * std::pow(w, s);
    const ldouble t1 = k1 * first.value;
    const ldouble t2 = k2 * second.value;
    const ldouble total = t1 + t2;
    const ldouble magnitude = std::fabs(k1) * first.abs_sum + std::fabs(k2) * second.abs_sum;
    // Accept at most ~6 bits of cancellation; extended precision absorbs it.
    if (!(std::fabs(total) * 64.0L >= magnitude)) return false;
    out = total;
    return true;
}

}  // namespace detail

/// F(c-a, b; c; z) with z = r^2/(1+r^2) given via (z, w = 1 - z).
///
/// Route selection: z <= 1/2 uses the Gauss series directly; otherwise the
/// z -> 1-z connection formula is tried first and accepted only when well
/// conditioned, then the Gauss series (capped at 50,000 terms), and finally
/// the Euler integral.
inline PfaffValue pfaff_reduced(const HypParams& p, ldouble z, ldouble w) {
    const ldouble A = static_cast<ldouble>(p.c) - p.a;
    const ldouble B = p.b;
    const ldouble C = p.c;
    if (B == 0.0L || z == 0.0L || A == 0.0L) return {1.0L, HypRoute::trivial};
    if (z > 0.5L) {
        ldouble conn;
        if (detail::connection_formula(A, B, C, w, conn)) return {conn, HypRoute::connection};
    }
    const SeriesSum series = gauss_series(A, B, C, z);
    if (series.converged) return {series.value, HypRoute::gauss_series};
    // x = -z/w; undo the Pfaff factor w^b.
    const double x = static_cast<double>(-z / w);
    const double direct = detail::hyp2f1_euler_impl(p, x, 1e-14);
    return {static_cast<ldouble>(direct) / std::pow(w, B), HypRoute::euler_quadrature};
}

/// 2F1(a,b;c;x) for x <= 0.
///
/// Evaluated through Pfaff's transformation
///   2F1(a,b;c;x) = (1-x)^{-b} 2F1(c-a, b; c; x/(x-1)),
/// which maps the negative axis into [0,1) where all series terms are
/// positive for the radial-mode family.
inline double hyp2f1_negaxis(const HypParams& p, double x) {
    if (x > 0.0) throw DomainError("hyp2f1_negaxis: x must be <= 0");
    if (p.c <= 0.0 && p.c == std::floor(p.c)) throw DomainError("hyp2f1_negaxis: c is a nonpositive integer");
    if (x == 0.0 || p.b == 0.0 || p.a == 0.0) return 1.0;
    const ldouble one_minus_x = 1.0L - static_cast<ldouble>(x);
    const ldouble w = 1.0L / one_minus_x;
    const ldouble z = -static_cast<ldouble>(x) * w;
    const PfaffValue reduced = pfaff_reduced(p, z, w);
    return static_cast<double>(std::pow(w, static_cast<ldouble>(p.b)) * reduced.value);
}

/// lim_{x -> -inf} (1-x)^b 2F1(a,b;c;x) = Gamma(c)Gamma(a-b) / (Gamma(c-b)Gamma(a)), for a > b.
inline double hyp2f1_tail_limit(const HypParams& p) {
    if (!(p.a - p.b > 0.0)) throw DomainError("hyp2f1_tail_limit: requires a > b");
    if (p.b == 0.0) return 1.0;
    for (double arg : {p.c, p.a - p.b, p.c - p.b, p.a}) {
        if (arg <= 0.0 && arg == std::floor(arg)) throw DomainError("hyp2f1_tail_limit: gamma pole");
    }
    const auto gc = signed_log_gamma(p.c);
    const auto gab = signed_log_gamma(static_cast<ldouble>(p.a) - p.b);
    const auto gcb = signed_log_gamma(static_cast<ldouble>(p.c) - p.b);
    const auto ga = signed_log_gamma(p.a);
    const int sign = gc.sign * gab.sign * gcb.sign * ga.sign;
    return sign * static_cast<double>(std::exp(gc.log_abs + gab.log_abs - gcb.log_abs - ga.log_abs));
}

/// Chebyshev polynomial T_l(t) = cos(l arccos t) by recurrence.
inline double chebyshev_t(int l, double t) {
    if (l < 0) throw DomainError("chebyshev_t: negative degree");
    if (l == 0) return 1.0;
    double p0 = 1.0, p1 = t;
    for (int k = 2; k <= l; ++k) {
        const double p2 = 2.0 * t * p1 - p0;
        p0 = p1;
        p1 = p2;
    }
    return p1;
}

/// Gegenbauer polynomial C_l^alpha(t) by the three-term recurrence.
///
/// alpha = 0 (the circle, d = 2) dispatches to the Chebyshev limit T_l,
/// which is the zonal harmonic of degree l on S^1.
inline double gegenbauer(int l, double alpha, double t) {
    if (l < 0) throw DomainError("gegenbauer: negative degree");
    if (!(alpha > -0.5)) throw DomainError("gegenbauer: alpha must exceed -1/2");
    if (alpha == 0.0) return chebyshev_t(l, t);
    if (l == 0) return 1.0;
    double p0 = 1.0, p1 = 2.0 * alpha * t;
    for (int k = 2; k <= l; ++k) {
        const double p2 = (2.0 * (k + alpha - 1.0) * t * p1 - (k + 2.0 * alpha - 2.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    return p1;
}

/// C_l^alpha(1) = (2 alpha)_l / l!, the maximum of |C_l^alpha| on [-1,1] for alpha > 0.
inline double gegenbauer_at_one(int l, double alpha) {
    if (alpha == 0.0) return 1.0;
    return std::exp(log_gamma(l + 2.0 * alpha) - log_gamma(2.0 * alpha) - log_gamma(l + 1.0));
}

}  // namespace gou
