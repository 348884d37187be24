#pragma once

// Boundary data on S^{d-1} and its spherical-harmonic projection.
//
// d = 2 uses the full Fourier basis cos(l phi), sin(l phi). d >= 3 is zonal:
// g depends on t = <theta, e> only and degree l is spanned by
// Z_l(t) = C_l^alpha(t) / C_l^alpha(1), alpha = (d-2)/2. All inner products use
// the probability-normalized sphere measure.

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
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace gou {

using Point = std::vector<double>;

/// Unit vector in R^d.
class Direction {
public:
    explicit Direction(std::vector<double> components) : x_(std::move(components)) {
        double n2 = 0.0;
        for (double v : x_) n2 += v * v;
        if (x_.empty() || std::fabs(std::sqrt(n2) - 1.0) > 1e-12) {
            throw DomainError("Direction: components must have unit norm");
        }
    }

    /// Normalizes a nonzero vector.
    static Direction from_vector(std::span<const double> v) {
        double n2 = 0.0;
        for (double c : v) n2 += c * c;
        if (!(n2 > 0.0)) throw DomainError("Direction: zero vector");
        const double n = std::sqrt(n2);
        std::vector<double> out(v.begin(), v.end());
        for (double& c : out) c /= n;
        return Direction(std::move(out));
    }

    static Direction axis(int d, int k = 0) {
        std::vector<double> e(d, 0.0);
        e.at(k) = 1.0;
        return Direction(std::move(e));
    }

    int dim() const noexcept { return static_cast<int>(x_.size()); }
    double operator[](int i) const { return x_[i]; }
    const std::vector<double>& components() const noexcept { return x_; }

private:
    std::vector<double> x_;
};

enum class BoundaryForm { spectrum, zonal_profile, builtin };

enum class Builtin { constant, cos_theta, cos_2theta, abs_cos_theta, axis_coord, axis_coord_squared };

inline const char* builtin_name(Builtin b) {
    switch (b) {
        case Builtin::constant: return "constant";
        case Builtin::cos_theta: return "cos_theta";
        case Builtin::cos_2theta: return "cos_2theta";
        case Builtin::abs_cos_theta: return "abs_cos_theta";
        case Builtin::axis_coord: return "axis_coord";
        case Builtin::axis_coord_squared: return "axis_coord_squared";
    }
    return "?";
}

inline Builtin parse_builtin(const std::string& name) {
    for (Builtin b : {Builtin::constant, Builtin::cos_theta, Builtin::cos_2theta, Builtin::abs_cos_theta,
                      Builtin::axis_coord, Builtin::axis_coord_squared}) {
        if (name == builtin_name(b)) return b;
    }
    throw ConfigError("unknown builtin boundary '" + name + "'");
}

enum class TermKind { cos, sin, zonal };

/// One term of a spectrum payload: coef * cos(l phi), coef * sin(l phi) (d = 2)
/// or coef * Z_l(<theta, axis>) (any d).
struct SpectrumTerm {
    int l = 0;
    TermKind kind = TermKind::cos;
    double coef = 0.0;
};

/// Boundary data g on S^{d-1}.
class BoundarySpec {
public:
    static BoundarySpec builtin(int d, Builtin name, double scale = 1.0,
                                std::optional<Direction> axis = std::nullopt) {
        BoundarySpec g(d, BoundaryForm::builtin, std::move(axis));
        g.builtin_ = name;
        g.scale_ = scale;
        const bool circle_only = name == Builtin::cos_theta || name == Builtin::cos_2theta ||
                                 name == Builtin::abs_cos_theta;
        if (circle_only && d != 2) {
            throw DomainError(std::string("form mismatch: builtin '") + builtin_name(name) +
                              "' is not zonal and needs d = 2");
        }
        if (name == Builtin::axis_coord_squared && d < 3) {
            throw DomainError("builtin 'axis_coord_squared' needs d >= 3");
        }
        return g;
    }

    static BoundarySpec zonal(int d, std::vector<double> profile_coeffs, std::optional<Direction> axis = std::nullopt) {
        if (profile_coeffs.empty()) throw DomainError("zonal profile needs at least one coefficient");
        BoundarySpec g(d, BoundaryForm::zonal_profile, std::move(axis));
        g.profile_ = std::move(profile_coeffs);
        return g;
    }

    static BoundarySpec spectrum(int d, std::vector<SpectrumTerm> terms, std::optional<Direction> axis = std::nullopt) {
        BoundarySpec g(d, BoundaryForm::spectrum, std::move(axis));
        for (const auto& t : terms) {
            if (t.l < 0) throw DomainError("spectrum term with negative degree");
            if (t.kind != TermKind::zonal && d != 2) {
                throw DomainError("form mismatch: cos/sin spectrum terms need d = 2; use kind 'zonal'");
            }
            if (t.kind == TermKind::sin && t.l == 0) throw DomainError("spectrum term sin with l = 0");
        }
        g.terms_ = std::move(terms);
        return g;
    }

    int dim() const noexcept { return d_; }
    BoundaryForm form() const noexcept { return form_; }
    const Direction& axis() const noexcept { return axis_; }
    std::optional<Builtin> builtin_kind() const {
        return form_ == BoundaryForm::builtin ? std::optional<Builtin>(builtin_) : std::nullopt;
    }
    double scale() const noexcept { return scale_; }
    const std::vector<double>& profile() const noexcept { return profile_; }
    const std::vector<SpectrumTerm>& terms() const noexcept { return terms_; }

    /// g depends only on <theta, axis>.
    bool is_zonal() const {
        if (form_ == BoundaryForm::zonal_profile) return true;
        if (form_ == BoundaryForm::spectrum) {
            return std::all_of(terms_.begin(), terms_.end(),
                               [](const SpectrumTerm& t) { return t.kind == TermKind::zonal || t.l == 0; });
        }
        return builtin_ == Builtin::constant || builtin_ == Builtin::axis_coord ||
               builtin_ == Builtin::axis_coord_squared || d_ == 2;
    }

    /// Largest degree with a nonzero projection, when finite.
    std::optional<int> band_limit() const {
        switch (form_) {
            case BoundaryForm::spectrum: {
                int l = 0;
                for (const auto& t : terms_) if (t.coef != 0.0) l = std::max(l, t.l);
                return l;
            }
            case BoundaryForm::zonal_profile: {
                int l = static_cast<int>(profile_.size()) - 1;
                while (l > 0 && profile_[l] == 0.0) --l;
                return l;
            }
            case BoundaryForm::builtin:
                switch (builtin_) {
                    case Builtin::constant: return 0;
                    case Builtin::cos_theta:
                    case Builtin::axis_coord: return 1;
                    case Builtin::cos_2theta:
                    case Builtin::axis_coord_squared: return 2;
                    case Builtin::abs_cos_theta: return std::nullopt;
                }
        }
        return std::nullopt;
    }

    /// Angles in (-pi, pi] where g fails to be smooth (d = 2 only).
    std::vector<double> kinks() const {
        if (form_ == BoundaryForm::builtin && builtin_ == Builtin::abs_cos_theta) {
            const double a = std::atan2(axis_[1], axis_[0]);
            return {std::remainder(a - std::numbers::pi / 2, 2 * std::numbers::pi),
                    std::remainder(a + std::numbers::pi / 2, 2 * std::numbers::pi)};
        }
        return {};
    }

    /// g(theta) for a unit vector theta.
    double operator()(std::span<const double> theta) const {
        if (static_cast<int>(theta.size()) != d_) throw DomainError("boundary: dimension mismatch");
        double t = 0.0;
        for (int i = 0; i < d_; ++i) t += theta[i] * axis_[i];
        t = std::clamp(t, -1.0, 1.0);
        if (d_ == 2 && !is_zonal_only()) {
            // Angle measured from the axis.
            const double phi = std::atan2(axis_[0] * theta[1] - axis_[1] * theta[0], t);
            return eval_angle(phi);
        }
        return eval_zonal(t);
    }

    /// g at angle phi (d = 2), measured counterclockwise from the axis.
    double at_angle(double phi) const {
        if (d_ != 2) throw DomainError("at_angle: only for d = 2");
        if (!is_zonal_only()) return eval_angle(phi);
        return eval_zonal(std::cos(phi));
    }

    /// g as a function of t = <theta, axis> (zonal data).
    double at_t(double t) const {
        if (!is_zonal()) throw DomainError("at_t: boundary data is not zonal");
        if (d_ == 2 && !is_zonal_only()) return eval_angle(std::acos(std::clamp(t, -1.0, 1.0)));
        return eval_zonal(t);
    }

private:
    BoundarySpec(int d, BoundaryForm form, std::optional<Direction> axis)
        : d_(d), form_(form), axis_(axis ? *axis : Direction::axis(std::max(d, 1))) {
        if (d < 2) throw DomainError("boundary: dimension must be >= 2");
        if (axis_.dim() != d) throw DomainError("boundary: axis dimension mismatch");
    }

    // True when evaluation goes through t alone.
    bool is_zonal_only() const {
        if (form_ == BoundaryForm::zonal_profile) return true;
        if (form_ == BoundaryForm::spectrum) {
            return std::none_of(terms_.begin(), terms_.end(),
                                [](const SpectrumTerm& t) { return t.kind == TermKind::sin; });
        }
        return builtin_ != Builtin::cos_2theta && builtin_ != Builtin::abs_cos_theta && builtin_ != Builtin::cos_theta;
    }

    double eval_angle(double phi) const {
        if (form_ == BoundaryForm::spectrum) {
            double s = 0.0;
            for (const auto& term : terms_) {
                if (term.kind == TermKind::sin) s += term.coef * std::sin(term.l * phi);
                else s += term.coef * std::cos(term.l * phi);
            }
            return s;
        }
        switch (builtin_) {
            case Builtin::cos_theta: return scale_ * std::cos(phi);
            case Builtin::cos_2theta: return scale_ * std::cos(2.0 * phi);
            case Builtin::abs_cos_theta: return scale_ * std::fabs(std::cos(phi));
            default: return eval_zonal(std::cos(phi));
        }
    }

    double eval_zonal(double t) const {
        switch (form_) {
            case BoundaryForm::zonal_profile: {
                double s = 0.0;
                for (std::size_t k = profile_.size(); k-- > 0;) s = s * t + profile_[k];
                return s;
            }
            case BoundaryForm::spectrum: {
                const double alpha = 0.5 * (d_ - 2);
                double s = 0.0;
                for (const auto& term : terms_) {
                    s += term.coef * gegenbauer(term.l, alpha, t) / gegenbauer_at_one(term.l, alpha);
                }
                return s;
            }
            case BoundaryForm::builtin:
                switch (builtin_) {
                    case Builtin::constant: return scale_;
                    case Builtin::axis_coord:
                    case Builtin::cos_theta: return scale_ * t;
                    case Builtin::axis_coord_squared: return scale_ * t * t;
                    case Builtin::cos_2theta: return scale_ * (2.0 * t * t - 1.0);
                    case Builtin::abs_cos_theta: return scale_ * std::fabs(t);
                }
        }
        return 0.0;
    }

    int d_;
    BoundaryForm form_;
    Direction axis_;
    Builtin builtin_ = Builtin::constant;
    double scale_ = 1.0;
    std::vector<double> profile_;
    std::vector<SpectrumTerm> terms_;
};

/// Projection of g onto degrees 0..L.
///
/// d = 2: block l holds (a_l, b_l) with g_l = a_l cos(l phi) + b_l sin(l phi).
/// d >= 3: block l holds (c_l, 0) with g_l = c_l Z_l(<theta, axis>).
struct HarmonicSpectrum {
    struct Block {
        double a = 0.0;
        double b = 0.0;
    };

    int d = 2;
    int L = 0;
    Direction axis = Direction::axis(2);
    std::vector<Block> blocks;       ///< l = 0..L
    std::vector<double> sup_norm;    ///< sup over the sphere of |g_l|
    std::vector<double> l2_norm;     ///< ||g_l|| under the normalized measure
    double norm_sq = 0.0;            ///< ||g||^2 of the projected data
    std::optional<int> band_limit;   ///< known band limit of the source data

    /// ||g||^2 - sum_{l<=L} ||g_l||^2, clipped at 0 (0 when band-limited within L).
    double residual_norm_sq() const {
        if (band_limit && *band_limit <= L) return 0.0;
        double s = 0.0;
        for (double n : l2_norm) s += n * n;
        return std::max(0.0, norm_sq - s);
    }

    /// Restriction to degrees 0..L2 (L2 <= L).
    HarmonicSpectrum truncated(int L2) const {
        if (L2 < 0 || L2 > L) throw DomainError("truncated: degree out of range");
        HarmonicSpectrum s = *this;
        s.L = L2;
        s.blocks.resize(L2 + 1);
        s.sup_norm.resize(L2 + 1);
        s.l2_norm.resize(L2 + 1);
        return s;
    }
};

namespace detail {

inline const QuadratureRule& cached_gauss_legendre(int n) {
    static std::mutex mutex;
    static std::map<int, std::unique_ptr<QuadratureRule>> cache;
    std::lock_guard<std::mutex> lock(mutex);
    auto& slot = cache[n];
    if (!slot) slot = std::make_unique<QuadratureRule>(gauss_legendre(n));
    return *slot;
}

// Nodes phi_j and weights (summing to 1) of the normalized measure on the circle.
struct CircleRule {
    std::vector<double> phi, weight;
};

inline CircleRule circle_rule(const BoundarySpec& g, int L) {
    CircleRule out;
    std::vector<double> cuts = g.kinks();
    if (cuts.empty()) {
        // Trapezoid rule: spectrally accurate for smooth periodic data.
        const int n = 4 * L + 16;
        for (int j = 0; j < n; ++j) {
            out.phi.push_back(2.0 * std::numbers::pi * j / n);
            out.weight.push_back(1.0 / n);
        }
        return out;
    }
    // Piecewise Gauss-Legendre between kinks.
    std::sort(cuts.begin(), cuts.end());
    cuts.push_back(cuts.front() + 2.0 * std::numbers::pi);
    const QuadratureRule& rule = cached_gauss_legendre(2 * L + 32);
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
        const double a = cuts[k], b = cuts[k + 1];
        for (std::size_t i = 0; i < rule.size(); ++i) {
            out.phi.push_back(0.5 * (a + b) + 0.5 * (b - a) * rule.nodes[i]);
            out.weight.push_back(0.5 * (b - a) * rule.weights[i] / (2.0 * std::numbers::pi));
        }
    }
    return out;
}

// Nodes t_j and weights of the normalized zonal measure c_d (1-t^2)^{(d-3)/2} dt.
struct ZonalRule {
    std::vector<double> t, weight;
};

inline ZonalRule zonal_rule(int d, int L) {
    ZonalRule out;
    if (d % 2 == 1) {
        // Polynomial weight: fold it into Gauss-Legendre in t.
        const QuadratureRule& rule = cached_gauss_legendre(2 * L + 16);
        for (std::size_t i = 0; i < rule.size(); ++i) {
            const double t = rule.nodes[i];
            out.t.push_back(t);
            out.weight.push_back(rule.weights[i] * std::pow(1.0 - t * t, 0.5 * (d - 3)));
        }
    } else {
        // t = cos(psi): weight sin(psi)^{d-2} dpsi is smooth on [0, pi].
        const QuadratureRule& rule = cached_gauss_legendre(2 * L + 32);
        for (std::size_t i = 0; i < rule.size(); ++i) {
            const double psi = 0.5 * std::numbers::pi * (1.0 + rule.nodes[i]);
            out.t.push_back(std::cos(psi));
            out.weight.push_back(0.5 * std::numbers::pi * rule.weights[i] * std::pow(std::sin(psi), d - 2));
        }
    }
    // Normalize numerically so the sphere has measure 1.
    double total = 0.0;
    for (double w : out.weight) total += w;
    for (double& w : out.weight) w /= total;
    return out;
}

}  // namespace detail

/// Z_l(t) = C_l^alpha(t) / C_l^alpha(1) with alpha = (d-2)/2.
inline double zonal_basis(int d, int l, double t) {
    const double alpha = 0.5 * (d - 2);
    return gegenbauer(l, alpha, t) / gegenbauer_at_one(l, alpha);
}

/// Dimension of the space of degree-l spherical harmonics on S^{d-1}.
inline double harmonic_dimension(int d, int l) {
    if (l == 0) return 1.0;
    if (d == 2) return 2.0;
    return (2.0 * l + d - 2) / (l + d - 2) *
           std::exp(log_gamma(l + d - 1.0) - log_gamma(l + 1.0) - log_gamma(d - 1.0));
}

/// Project g onto degrees 0..L.
///
/// Coefficients below 64 eps ||g|| are quadrature noise and are set to zero,
/// so band-limited data yields an exactly band-limited spectrum.
inline HarmonicSpectrum project(const BoundarySpec& g, int L) {
    if (L < 0) throw DomainError("project: L must be >= 0");
    HarmonicSpectrum s;
    s.d = g.dim();
    s.L = L;
    s.axis = g.axis();
    s.band_limit = g.band_limit();
    s.blocks.assign(L + 1, {});
    s.sup_norm.assign(L + 1, 0.0);
    s.l2_norm.assign(L + 1, 0.0);
    const double eps = std::numeric_limits<double>::epsilon();

    if (g.dim() == 2) {
        const detail::CircleRule rule = detail::circle_rule(g, L);
        std::vector<double> vals(rule.phi.size());
        for (std::size_t j = 0; j < vals.size(); ++j) {
            vals[j] = g.at_angle(rule.phi[j]);
            s.norm_sq += rule.weight[j] * vals[j] * vals[j];
        }
        const double floor = 64.0 * eps * std::sqrt(s.norm_sq);
        for (int l = 0; l <= L; ++l) {
            long double a = 0.0L, b = 0.0L;
            for (std::size_t j = 0; j < vals.size(); ++j) {
                a += rule.weight[j] * vals[j] * std::cos(l * rule.phi[j]);
                b += rule.weight[j] * vals[j] * std::sin(l * rule.phi[j]);
            }
            double ad = static_cast<double>(a), bd = static_cast<double>(b);
            if (l > 0) {
                ad *= 2.0;
                bd *= 2.0;
            }
            if (std::fabs(ad) < floor) ad = 0.0;
            if (std::fabs(bd) < floor) bd = 0.0;
            s.blocks[l] = {ad, bd};
            s.sup_norm[l] = std::hypot(ad, bd);
            s.l2_norm[l] = l == 0 ? std::fabs(ad) : s.sup_norm[l] / std::sqrt(2.0);
        }
        return s;
    }

    if (!g.is_zonal()) throw DomainError("form mismatch: non-zonal boundary data in d >= 3");
    const detail::ZonalRule rule = detail::zonal_rule(g.dim(), L);
    std::vector<double> vals(rule.t.size());
    for (std::size_t j = 0; j < vals.size(); ++j) {
        vals[j] = g.at_t(rule.t[j]);
        s.norm_sq += rule.weight[j] * vals[j] * vals[j];
    }
    const double floor = 64.0 * eps * std::sqrt(s.norm_sq);
    for (int l = 0; l <= L; ++l) {
        long double num = 0.0L, den = 0.0L;
        for (std::size_t j = 0; j < vals.size(); ++j) {
            const double z = zonal_basis(g.dim(), l, rule.t[j]);
            num += rule.weight[j] * vals[j] * z;
            den += rule.weight[j] * z * z;
        }
        double c = static_cast<double>(num / den);
        if (std::fabs(c) < floor) c = 0.0;
        s.blocks[l] = {c, 0.0};
        s.sup_norm[l] = std::fabs(c);
        s.l2_norm[l] = std::fabs(c) * std::sqrt(static_cast<double>(den));
    }
    return s;
}

/// Mean of g under the normalized measure; equals the degree-0 block.
inline double mean(const BoundarySpec& g) { return project(g, 0).blocks[0].a; }

/// Value of the single degree-l block at theta.
inline double evaluate_block(const HarmonicSpectrum& s, int l, std::span<const double> theta) {
    if (static_cast<int>(theta.size()) != s.d) throw DomainError("evaluate_spectrum: dimension mismatch");
    double t = 0.0;
    for (int i = 0; i < s.d; ++i) t += theta[i] * s.axis[i];
    t = std::clamp(t, -1.0, 1.0);
    const auto& blk = s.blocks.at(l);
    if (s.d == 2) {
        const double phi = std::atan2(s.axis[0] * theta[1] - s.axis[1] * theta[0], t);
        return blk.a * std::cos(l * phi) + blk.b * std::sin(l * phi);
    }
    return blk.a * zonal_basis(s.d, l, t);
}

/// Sum of all stored blocks at theta.
inline double evaluate_spectrum(const HarmonicSpectrum& s, std::span<const double> theta) {
    double sum = 0.0;
    for (int l = 0; l <= s.L; ++l) {
        if (s.blocks[l].a == 0.0 && s.blocks[l].b == 0.0) continue;
        sum += evaluate_block(s, l, theta);
    }
    return sum;
}

inline double evaluate_spectrum(const HarmonicSpectrum& s, const Direction& theta) {
    return evaluate_spectrum(s, std::span<const double>(theta.components()));
}

/// Finite-difference residual of the eigenrelation Delta g_l = -l(l+d-2) g_l.
///
/// d = 2: max over a phi-grid of |g_l'' + l^2 g_l|. d >= 3: max over a t-grid
/// of |(1-t^2) G'' - (d-1) t G' + l(l+d-2) G|.
inline double eigenrelation_residual(const HarmonicSpectrum& s, int l, int n_grid = 64, double h = 1e-4) {
    if (l < 0 || l > s.L) throw DomainError("eigenrelation_residual: degree not present");
    const auto& blk = s.blocks[l];
    double worst = 0.0;
    if (s.d == 2) {
        auto G = [&](double phi) { return blk.a * std::cos(l * phi) + blk.b * std::sin(l * phi); };
        for (int j = 0; j < n_grid; ++j) {
            const double phi = 2.0 * std::numbers::pi * j / n_grid;
            const double d2 = (G(phi + h) - 2.0 * G(phi) + G(phi - h)) / (h * h);
            worst = std::max(worst, std::fabs(d2 + static_cast<double>(l) * l * G(phi)));
        }
        return worst;
    }
    auto G = [&](double t) { return blk.a * zonal_basis(s.d, l, t); };
    const double lam = static_cast<double>(l) * (l + s.d - 2);
    for (int j = 0; j <= n_grid; ++j) {
        const double t = -0.95 + 1.9 * j / n_grid;
        const double d2 = (G(t + h) - 2.0 * G(t) + G(t - h)) / (h * h);
        const double d1 = (G(t + h) - G(t - h)) / (2.0 * h);
        worst = std::max(worst, std::fabs((1.0 - t * t) * d2 - (s.d - 1) * t * d1 + lam * G(t)));
    }
    return worst;
}

/// sup over the sphere of |g|, sampled (exact for the builtin catalog).
inline double sup_abs(const BoundarySpec& g, int n = 2048) {
    double best = 0.0;
    if (g.dim() == 2) {
        for (int j = 0; j < n; ++j) best = std::max(best, std::fabs(g.at_angle(2.0 * std::numbers::pi * j / n)));
        return best;
    }
    for (int j = 0; j <= n; ++j) best = std::max(best, std::fabs(g.at_t(-1.0 + 2.0 * j / n)));
    return best;
}

}  // namespace gou
