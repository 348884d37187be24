#pragma once

#include "gou/errors.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <queue>
#include <vector>

namespace gou {

enum class RuleKind { gauss_legendre, tanh_sinh };

/// Fixed interpolatory rule on the reference interval [-1, 1].
struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;
    RuleKind kind = RuleKind::gauss_legendre;

    std::size_t size() const noexcept { return nodes.size(); }
};

struct QuadResult {
    double value = 0.0;
    double error = 0.0;
};

/// n-point Gauss-Legendre rule, exact for polynomials of degree 2n-1.
///
/// Nodes are found by Newton iteration on P_n carried out in extended
/// precision, so nodes and weights are correctly rounded for n up to a few
/// thousand.
inline QuadratureRule gauss_legendre(int n) {
    if (n < 1) throw DomainError("gauss_legendre: need at least one node");
    QuadratureRule rule;
    rule.kind = RuleKind::gauss_legendre;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    const long double pi = std::numbers::pi_v<long double>;
    for (int i = 0; i < (n + 1) / 2; ++i) {
        long double x = std::cos(pi * (i + 0.75L) / (n + 0.5L));
        long double dp = 0.0L;
        for (int iter = 0; iter < 100; ++iter) {
            long double p0 = 1.0L, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const long double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            if (n == 1) { p1 = x; p0 = 1.0L; }
            dp = n * (x * p1 - p0) / (x * x - 1.0L);
            const long double dx = p1 / dp;
            x -= dx;
            if (std::fabs(dx) < 1e-21L) break;
        }
        // Recompute the derivative at the converged node.
        long double p0 = 1.0L, p1 = x;
        for (int k = 2; k <= n; ++k) {
            const long double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        dp = (n == 1) ? 1.0L : n * (x * p1 - p0) / (x * x - 1.0L);
        const long double w = 2.0L / ((1.0L - x * x) * dp * dp);
        rule.nodes[i] = static_cast<double>(-x);
        rule.nodes[n - 1 - i] = static_cast<double>(x);
        rule.weights[i] = rule.weights[n - 1 - i] = static_cast<double>(w);
    }
    if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
    return rule;
}

/// Truncated tanh-sinh (double exponential) rule with 2m+1 nodes and step h.
///
/// Suited to integrands with algebraic endpoint singularities.
inline QuadratureRule tanh_sinh(int m, double h = 0.0) {
    if (m < 4) throw DomainError("tanh_sinh: need m >= 4");
    if (h <= 0.0) h = 3.2 / m;
    QuadratureRule rule;
    rule.kind = RuleKind::tanh_sinh;
    const double half_pi = std::numbers::pi / 2.0;
    for (int k = -m; k <= m; ++k) {
        const double t = k * h;
        const double u = half_pi * std::sinh(t);
        const double x = std::tanh(u);
        const double ch = std::cosh(u);
        const double w = h * half_pi * std::cosh(t) / (ch * ch);
        if (std::fabs(x) >= 1.0 || w == 0.0) continue;
        rule.nodes.push_back(x);
        rule.weights.push_back(w);
    }
    return rule;
}

/// Apply a fixed rule on [a, b].
template <class F>
double integrate(const QuadratureRule& rule, F&& f, double a, double b) {
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (a + b);
    double sum = 0.0;
    for (std::size_t i = 0; i < rule.size(); ++i) sum += rule.weights[i] * f(mid + half * rule.nodes[i]);
    return half * sum;
}

namespace detail {

// Kronrod 15-point extension of the 7-point Gauss rule (QUADPACK constants).
inline constexpr std::array<double, 8> kKronrodNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kGauss7Weights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
    double a, b, value, error;
    bool operator<(const Segment& o) const { return error < o.error; }
};

template <class F>
Segment gauss_kronrod15(F& f, double a, double b) {
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (a + b);
    const double fc = f(mid);
    double kronrod = fc * kKronrodWeights[7];
    double gauss = fc * kGauss7Weights[3];
    for (int j = 0; j < 7; ++j) {
        const double dx = half * kKronrodNodes[j];
        const double fs = f(mid - dx) + f(mid + dx);
        kronrod += kKronrodWeights[j] * fs;
        if (j % 2 == 1) gauss += kGauss7Weights[j / 2] * fs;
    }
    return {a, b, kronrod * half, std::fabs((kronrod - gauss) * half)};
}

}  // namespace detail

/// Globally adaptive Gauss-Kronrod (7/15) integration on a finite interval.
///
/// The segment with the largest error estimate is bisected until the summed
/// estimate is below max(abs_tol, rel_tol*|I|). Throws QuadratureError with
/// the achieved estimate when `max_segments` is exhausted.
template <class F>
QuadResult integrate_adaptive(F&& f, double a, double b, double rel_tol = 1e-12,
                              double abs_tol = 0.0, int max_segments = 4000) {
    std::priority_queue<detail::Segment> heap;
    detail::Segment first = detail::gauss_kronrod15(f, a, b);
    double total = first.value;
    double err = first.error;
    heap.push(first);
    int segments = 1;
    while (err > std::max(abs_tol, rel_tol * std::fabs(total))) {
        if (segments >= max_segments) {
            throw QuadratureError("integrate_adaptive: tolerance not reached", err);
        }
        const detail::Segment worst = heap.top();
        heap.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        const detail::Segment left = detail::gauss_kronrod15(f, worst.a, mid);
        const detail::Segment right = detail::gauss_kronrod15(f, mid, worst.b);
        total += left.value + right.value - worst.value;
        err += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        ++segments;
    }
    // Re-sum to shed the drift of the incremental updates.
    double value = 0.0, error = 0.0;
    while (!heap.empty()) {
        value += heap.top().value;
        error += heap.top().error;
        heap.pop();
    }
    return {value, error};
}

/// Integrate from `a` to `b` (both > 0) over geometric panels anchored at `a`.
///
/// Panels are [a*2^k, a*2^(k+1)] (or halving when b < a) followed by one
/// partial panel ending at b. Each panel is integrated with `rule` and with
/// `rule` on its two halves; the halved value is kept and the difference is
/// accumulated as the error estimate. Because the panel layout depends on b
/// only through the last partial panel, the result is a smooth function of b.
template <class F>
QuadResult integrate_geometric(const QuadratureRule& rule, F&& f, double a, double b) {
    QuadResult out;
    if (a == b) return out;
    const double sign = b > a ? 1.0 : -1.0;
    double x = a;
    while (true) {
        const double next = b > a ? 2.0 * x : 0.5 * x;
        const bool last = b > a ? next >= b : next <= b;
        const double end = last ? b : next;
        const double lo = std::min(x, end), hi = std::max(x, end);
        const double coarse = integrate(rule, f, lo, hi);
        const double m = 0.5 * (lo + hi);
        const double fine = integrate(rule, f, lo, m) + integrate(rule, f, m, hi);
        out.value += fine;
        out.error += std::fabs(fine - coarse);
        if (last) break;
        x = next;
    }
    out.value *= sign;
    return out;
}

}  // namespace gou
