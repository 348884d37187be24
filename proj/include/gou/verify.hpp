#pragma once

// Deterministic checks of the exact formulas, shared by the CLI `verify`
// command and the acceptance suite. Each returns the measured worst value and
// the threshold it was held to.

#include "gou/harmonics.hpp"
#include "gou/quadrature.hpp"
#include "gou/radial.hpp"
#include "gou/solver.hpp"
#include "gou/specfun.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>
#include <vector>

namespace gou {

struct CheckResult {
    std::string name;
    bool passed = false;
    double value = 0.0;      ///< measured worst case
    double threshold = 0.0;
    std::string detail;
};

inline std::string fmt_g(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

inline CheckResult make_check(std::string name, double value, double threshold, std::string detail = {}) {
    return CheckResult{std::move(name), value < threshold, value, threshold, std::move(detail)};
}

/// max |f_1(r) - r| / max(r, tiny) over r in [0, 100].
inline CheckResult check_radial_identity(const std::vector<int>& dims, double tol = 1e-10, int n_grid = 1001) {
    double worst = 0.0;
    for (int d : dims) {
        const RadialMode mode(d, 1);
        for (int i = 0; i < n_grid; ++i) {
            const double r = 100.0 * i / (n_grid - 1);
            const double err = std::fabs(f_l(mode, r) - r);
            worst = std::max(worst, r > 0.0 ? err / r : err);
        }
    }
    return make_check("radial_identity", worst, tol, "max |f_1(r) - r| / r on [0, 100]");
}

/// Worst FD residual of the homogeneous mode equation for 1 <= l <= lmax,
/// relative to 1 + f_l, and of the f_0 equation, on a log grid of [r_min, r_max].
inline CheckResult check_ode_residuals(const std::vector<int>& dims, int lmax = 20, double r_min = 0.1,
                                       double r_max = 50.0, int n_grid = 60, double tol = 1e-5) {
    double worst_l = 0.0, worst_0 = 0.0;
    for (int d : dims) {
        const InhomogeneousMode& f0 = inhomogeneous_mode(d);
        for (int i = 0; i < n_grid; ++i) {
            const double r = r_min * std::pow(r_max / r_min, static_cast<double>(i) / (n_grid - 1));
            for (int l = 1; l <= lmax; ++l) {
                const RadialMode mode(d, l);
                auto f = [&](double s) { return f_l(mode, s); };
                worst_l = std::max(worst_l, std::fabs(radial_residual(f, d, l, 0.0, r)) / (1.0 + f(r)));
            }
            auto g = [&](double s) { return f0.f0(s); };
            worst_0 = std::max(worst_0, std::fabs(radial_residual(g, d, 0, f0.gamma(), r)));
        }
    }
    return make_check("ode_residuals", std::max(worst_l, worst_0), tol,
                      "f_l: " + fmt_g(worst_l) + ", f_0: " + fmt_g(worst_0));
}

/// |int_0^inf v^{d-1} (1+v^2)^{-(d+1)/2} dv - 1/(2 gamma_d)| via v = s/(1-s).
inline CheckResult check_integral_identity(const std::vector<int>& dims, double tol = 1e-10) {
    double worst = 0.0;
    for (int d : dims) {
        auto f = [d](double s) {
            if (s >= 1.0) return 0.0;
            const double v = s / (1.0 - s);
            const double jac = 1.0 / ((1.0 - s) * (1.0 - s));
            return std::pow(v, d - 1) * std::pow(1.0 + v * v, -0.5 * (d + 1)) * jac;
        };
        const QuadResult q = integrate_adaptive(f, 0.0, 1.0, 1e-14);
        worst = std::max(worst, std::fabs(q.value - 0.5 / gamma_d(d)));
    }
    return make_check("integral_identity", worst, tol, "int v^{d-1}(1+v^2)^{-(d+1)/2} dv vs 1/(2 gamma_d)");
}

/// d = 3: |h(r) - (r - 1/r)| on a log grid of [0.1, 100].
inline CheckResult check_scale_function(double tol = 1e-10, int n_grid = 200) {
    double worst = 0.0;
    for (int i = 0; i < n_grid; ++i) {
        const double r = 0.1 * std::pow(1000.0, static_cast<double>(i) / (n_grid - 1));
        worst = std::max(worst, std::fabs(scale_h(3, r) - (r - 1.0 / r)));
    }
    return make_check("scale_function", worst, tol, "d = 3, |h(r) - (r - 1/r)|");
}

/// Decay bound: measured onset L0 for each (d, R); passes when every L0 <= max_onset.
inline CheckResult check_decay_bound(const std::vector<int>& dims, const std::vector<double>& radii, int max_onset = 30,
                                     int lmax = 60) {
    int worst = 0;
    std::string detail;
    for (int d : dims) {
        for (double R : radii) {
            const DecayOnset on = decay_onset(d, R, lmax);
            worst = std::max(worst, on.onset);
            detail += "d=" + std::to_string(d) + " R=" + fmt_g(R) + " L0=" +
                      std::to_string(on.onset) + "; ";
        }
    }
    CheckResult c = make_check("decay_bound", worst, max_onset + 0.5, detail);
    return c;
}

/// Short label such as "cos_2theta d=2".
inline std::string boundary_label(const BoundarySpec& g) {
    std::string kind;
    switch (g.form()) {
        case BoundaryForm::builtin: kind = builtin_name(*g.builtin_kind()); break;
        case BoundaryForm::zonal_profile: kind = "zonal"; break;
        case BoundaryForm::spectrum: kind = "spectrum"; break;
    }
    return kind + " d=" + std::to_string(g.dim());
}

/// Boundary gaps of one builtin at the given radii.
struct GapSeries {
    std::string label;
    std::vector<double> radii;
    std::vector<double> gaps;
    double sup_g = 0.0;
    bool strictly_decreasing = false;
    bool exact = false;  ///< every gap at rounding level (u = v exactly, linear g)
};

inline GapSeries boundary_gap_series(const BoundarySpec& g, const std::vector<double>& radii, int n_dirs = 64) {
    GapSeries s;
    s.label = boundary_label(g);
    s.radii = radii;
    const EllipticSolution u = solve(g, std::min(kMaxTruncation, g.band_limit().value_or(kMaxTruncation)));
    for (double r : radii) s.gaps.push_back(boundary_gap(u, g, r, n_dirs));
    s.sup_g = sup_abs(g);
    s.strictly_decreasing = true;
    for (std::size_t i = 1; i < s.gaps.size(); ++i) s.strictly_decreasing &= s.gaps[i] < s.gaps[i - 1];
    s.exact = std::all_of(s.gaps.begin(), s.gaps.end(), [&](double v) { return v <= 1e-13 * (1.0 + s.sup_g); });
    return s;
}

/// The builtin catalog in d = 2 and d = 3.
inline std::vector<BoundarySpec> builtin_catalog() {
    std::vector<BoundarySpec> out;
    for (Builtin b : {Builtin::constant, Builtin::cos_theta, Builtin::cos_2theta, Builtin::abs_cos_theta,
                      Builtin::axis_coord}) {
        out.push_back(BoundarySpec::builtin(2, b));
    }
    for (Builtin b : {Builtin::constant, Builtin::axis_coord, Builtin::axis_coord_squared}) {
        out.push_back(BoundarySpec::builtin(3, b));
    }
    return out;
}

/// Boundary convergence: strictly decreasing gaps (or exact agreement) and
/// the last gap below frac * sup|g|.
inline CheckResult check_boundary_convergence(const std::vector<double>& radii = {1.0, 5.0, 50.0}, double frac = 0.02,
                                              bool require_final = true) {
    bool monotone = true;
    double worst_final = 0.0;
    std::string detail;
    for (const BoundarySpec& g : builtin_catalog()) {
        const GapSeries s = boundary_gap_series(g, radii);
        monotone &= s.strictly_decreasing || s.exact;
        worst_final = std::max(worst_final, s.gaps.back() / s.sup_g);
        detail += s.label + ":";
        for (double v : s.gaps) detail += " " + fmt_g(v);
        detail += "; ";
    }
    CheckResult c = make_check(require_final ? "boundary_convergence" : "boundary_gap_decreasing", worst_final,
                               require_final ? frac : std::numeric_limits<double>::infinity(), detail);
    c.passed = monotone && (!require_final || worst_final < frac);
    if (!monotone) c.detail = "gaps not strictly decreasing; " + c.detail;
    return c;
}

/// Worst |A u - c| on the standard grid (|x| in [0.2, 20], 12 log radii, 64 directions).
inline double max_elliptic_residual(const BoundarySpec& g) {
    const EllipticSolution u = solve_auto(g, 20.0);
    double worst = 0.0;
    for (const Point& x : log_radial_samples(g.dim(), 0.2, 20.0, 12, 64)) worst = std::max(worst, residual(u, x));
    return worst;
}

inline CheckResult check_elliptic_residual(double tol = 1e-5) {
    double worst = 0.0;
    std::string detail;
    for (const BoundarySpec& g : builtin_catalog()) {
        const double r = max_elliptic_residual(g);
        worst = std::max(worst, r);
        detail += boundary_label(g) + ": " + fmt_g(r) + "; ";
    }
    return make_check("elliptic_residual", worst, tol, detail);
}

}  // namespace gou
