#pragma once

// Pipelines behind the CLI commands. Each returns the emitted document, in
// the requested format, and whether every configured assertion held.

#include "gou/config.hpp"
#include "gou/convexity.hpp"
#include "gou/diffusion.hpp"
#include "gou/solver.hpp"
#include "gou/verify.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

namespace gou {

struct RunOutput {
    std::string text;  ///< file contents (JSON or CSV)
    bool ok = true;
};

namespace detail {

inline std::string num(double v) {
    if (std::isnan(v)) return "";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

/// Strictly parsed experiment parameters.
class Params {
public:
    Params(const Json& p, std::string experiment, std::initializer_list<const char*> allowed)
        : p_(p), where_("experiment.params") {
        require_known(p_, where_, allowed);
        (void)experiment;
    }

    template <class T>
    T get(const char* key, T fallback) const {
        return p_.contains(key) ? get_field<T>(p_, where_, key) : fallback;
    }

    template <class T>
    T need(const char* key) const {
        if (!p_.contains(key)) throw ConfigError(where_ + "." + key + ": required");
        return get_field<T>(p_, where_, key);
    }

    Point point(const char* key, int d) const {
        Point x = need<std::vector<double>>(key);
        if (static_cast<int>(x.size()) != d) {
            throw ConfigError(where_ + "." + key + ": expected " + std::to_string(d) + " components");
        }
        return x;
    }

private:
    const Json& p_;
    std::string where_;
};

inline Json estimate_record(const std::string& experiment, const Json& params, const McEstimate& e,
                            std::optional<double> reference, const RunConfig& cfg, const std::string& hash) {
    Json r{{"experiment", experiment},
           {"params", params},
           {"estimate", e.mean},
           {"std_error", e.std_error},
           {"n", e.n},
           {"rejected", e.rejected},
           {"seed", cfg.mc.seed},
           {"config_hash", hash},
           {"warnings", e.warnings}};
    if (reference) {
        r["reference_value"] = *reference;
        r["z_score"] = e.std_error > 0.0 ? (e.mean - *reference) / e.std_error : 0.0;
    }
    return r;
}

inline FieldFn named_field(const std::string& name) {
    if (name == "norm") return [](std::span<const double> x) { return detail::norm2(x); };
    if (name == "neg_norm") return [](std::span<const double> x) { return -detail::norm2(x); };
    if (name == "x1") return [](std::span<const double> x) { return x[0]; };
    if (name == "x1_squared") return [](std::span<const double> x) { return x[0] * x[0]; };
    if (name == "norm_squared") {
        return [](std::span<const double> x) { return detail::norm2(x) * detail::norm2(x); };
    }
    throw ConfigError("experiment.params.w: expected norm, neg_norm, x1, x1_squared or norm_squared");
}

inline std::string finish(const RunConfig& cfg, const Json& header, const Json& records,
                          const std::vector<std::string>& csv_header, const std::vector<std::vector<std::string>>& rows) {
    if (cfg.format == Format::json) {
        Json doc = header;
        doc["records"] = records;
        return doc.dump(2) + "\n";
    }
    std::ostringstream out;
    for (std::size_t i = 0; i < csv_header.size(); ++i) out << (i ? "," : "") << csv_header[i];
    out << "\n";
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
        out << "\n";
    }
    return out.str();
}

inline int solve_truncation(const RunConfig& cfg, const BoundarySpec& g) {
    if (cfg.lmax >= 0) return cfg.lmax;
    double R = 1.0;
    for (double r : cfg.grid.radii) R = std::max(R, r);
    return default_truncation(g, R);
}

}  // namespace detail

inline RunOutput run_solve(const RunConfig& cfg) {
    const Json resolved = resolved_config(cfg);
    const std::string hash = config_hash(resolved);
    const BoundarySpec g = parse_boundary(cfg.boundary, cfg.dim);
    const int L = detail::solve_truncation(cfg, g);
    const EllipticSolution u = solve(g, L);
    const double tol = cfg.tolerances.at("residual");
    RunOutput out;
    Json records = Json::array();
    std::vector<std::string> head;
    for (int i = 1; i <= cfg.dim; ++i) head.push_back("x_" + std::to_string(i));
    head.insert(head.end(), {"radius", "value", "tail_bound"});
    if (cfg.grid.residual) head.push_back("residual");
    std::vector<std::vector<std::string>> rows;
    const auto dirs = sphere_directions(cfg.dim, cfg.grid.n_dirs);
    for (double r : cfg.grid.radii) {
        for (const Point& th : dirs) {
            Point x = th;
            for (double& v : x) v *= r;
            const SolutionValue sv = u.evaluate(x);
            double res = std::numeric_limits<double>::quiet_NaN();
            if (cfg.grid.residual && r > kResidualStep * std::max(1.0, r)) {
                res = residual(u, x);
                if (res > tol) out.ok = false;
            }
            std::vector<std::string> row;
            for (double v : x) row.push_back(detail::num(v));
            row.insert(row.end(), {detail::num(r), detail::num(sv.value), detail::num(sv.tail_bound)});
            if (cfg.grid.residual) row.push_back(detail::num(res));
            rows.push_back(std::move(row));
            Json rec{{"x", x}, {"radius", r}, {"value", sv.value}, {"tail_bound", sv.tail_bound}};
            if (cfg.grid.residual && !std::isnan(res)) rec["residual"] = res;
            records.push_back(std::move(rec));
        }
    }
    const Json header{{"command", "solve"}, {"config", resolved}, {"config_hash", hash}, {"truncation", L},
                      {"constant_c", u.constant()}, {"passed", out.ok}};
    out.text = detail::finish(cfg, header, records, head, rows);
    return out;
}

/// Deterministic suite plus the exact coupling identity and the convexity equivalence catalog.
inline std::vector<CheckResult> verify_suite(const RunConfig& cfg) {
    std::vector<CheckResult> checks;
    checks.push_back(check_radial_identity({2, 3, 5}));
    checks.push_back(check_ode_residuals({2, 3, 5}));
    checks.push_back(check_integral_identity({2, 3, 5, 10}));
    checks.push_back(check_scale_function());
    checks.push_back(check_decay_bound({2, 3}, {1.0, 2.0}));
    checks.push_back(check_boundary_convergence({1.0, 5.0, 50.0}, 0.02, false));
    checks.push_back(check_elliptic_residual(cfg.tolerances.at("residual")));
    {
        McConfig mc = cfg.mc;
        mc.n_paths = std::min<long>(mc.n_paths, 10000);
        const Point x{0.3, -1.2}, y{2.0, 0.5};
        const CouplingReport a = convexity_coupling_check(detail::named_field("norm"), x, y, 0.3, 1.0, mc);
        const CouplingReport b = convexity_coupling_check(detail::named_field("x1_squared"), x, y, 0.3, 1.0, mc);
        CheckResult c = make_check("pathwise_affinity", std::max(a.max_affine_defect, b.max_affine_defect), 1e-14,
                                   "violations: " + std::to_string(a.violations + b.violations));
        c.passed = c.passed && a.violations == 0 && b.violations == 0;
        checks.push_back(std::move(c));
    }
    {
        std::string detail;
        bool all = true;
        for (Builtin b : {Builtin::constant, Builtin::cos_theta, Builtin::abs_cos_theta, Builtin::cos_2theta}) {
            const EquivalenceResult r = equivalence_harness(BoundarySpec::builtin(2, b), -1, cfg.probe);
            all &= r.agree;
            detail += std::string(builtin_name(b)) + ": u " + verdict_name(r.u_report.verdict) + ", v " +
                      verdict_name(r.v_report.verdict) + "; ";
        }
        checks.push_back(CheckResult{"convexity_equivalence", all, all ? 0.0 : 1.0, 0.5, detail});
    }
    return checks;
}

inline RunOutput run_verify(const RunConfig& cfg) {
    const Json resolved = resolved_config(cfg);
    const std::string hash = config_hash(resolved);
    RunOutput out;
    Json records = Json::array();
    std::vector<std::vector<std::string>> rows;
    for (const CheckResult& c : verify_suite(cfg)) {
        out.ok &= c.passed;
        records.push_back({{"name", c.name},
                           {"passed", c.passed},
                           {"value", c.value},
                           {"threshold", std::isinf(c.threshold) ? Json(nullptr) : Json(c.threshold)},
                           {"detail", c.detail},
                           {"config_hash", hash}});
        rows.push_back({c.name, c.passed ? "true" : "false", detail::num(c.value), detail::num(c.threshold)});
    }
    const Json header{{"command", "verify"}, {"config", resolved}, {"config_hash", hash}, {"passed", out.ok}};
    out.text = detail::finish(cfg, header, records, {"name", "passed", "value", "threshold"}, rows);
    return out;
}

inline RunOutput run_simulate(const RunConfig& cfg) {
    const Json resolved = resolved_config(cfg);
    const std::string hash = config_hash(resolved);
    const std::string& name = cfg.experiment.name;
    const Json& P = cfg.experiment.params;
    const McConfig& mc = cfg.mc;
    const int d = cfg.dim;
    const double z_tol = cfg.tolerances.at("z_score");
    RunOutput out;
    Json records = Json::array();
    std::vector<std::vector<std::string>> rows;
    auto add = [&](const Json& params, const McEstimate& e, std::optional<double> ref, bool assert_z, std::string label) {
        Json rec = detail::estimate_record(name, params, e, ref, cfg, hash);
        if (assert_z && ref && std::fabs(rec["z_score"].get<double>()) >= z_tol) out.ok = false;
        records.push_back(rec);
        rows.push_back({name, std::move(label), detail::num(e.mean), detail::num(e.std_error), std::to_string(e.n),
                        ref ? detail::num(*ref) : ""});
    };
    if (name == "second_moment") {
        detail::Params p(P, name, {"x", "t"});
        const Point x = p.point("x", d);
        const double t = p.get<double>("t", mc.t_max);
        add(P, second_moment(d, x, t, mc), second_moment_reference(d, x, t), true, "t=" + detail::num(t));
    } else if (name == "exit_probability") {
        detail::Params p(P, name, {"x", "r", "R"});
        const Point x = p.point("x", d);
        const double r = p.need<double>("r"), R = p.need<double>("R");
        const McEstimate e = exit_probability(d, x, r, R, mc);
        add(P, e, exit_probability_reference(d, detail::norm2(x), r, R), true, "");
    } else if (name == "flow_mean") {
        detail::Params p(P, name, {"times"});
        const auto times = p.need<std::vector<double>>("times");
        const auto est = flow_mean_m(d, mc, times);
        for (std::size_t j = 0; j < times.size(); ++j) add({{"t", times[j]}}, est[j], 1.0, true, "t=" + detail::num(times[j]));
    } else if (name == "semigroup") {
        detail::Params p(P, name, {"w", "x", "t"});
        const std::string w = p.need<std::string>("w");
        const Point x = p.point("x", d);
        const double t = p.get<double>("t", mc.t_max);
        std::optional<double> ref;
        if (w == "x1") ref = x[0];
        if (w == "norm_squared") ref = second_moment_reference(d, x, t);
        add(P, semigroup_apply(detail::named_field(w), x, t, mc), ref, true, "t=" + detail::num(t));
    } else if (name == "invariant_ks") {
        detail::Params p(P, name, {});
        const InvariantDraws a = sample_invariant(d, mc, InvariantMethod::path_integral);
        const InvariantDraws b = sample_invariant(d, mc, InvariantMethod::closed_form);
        std::vector<double> va, vb;
        for (const auto& s : a.samples) va.push_back(s.A);
        for (const auto& s : b.samples) vb.push_back(s.A);
        const double ks = ks_statistic(va, vb), crit = ks_critical_value(va.size(), vb.size());
        if (!(ks < crit)) out.ok = false;
        records.push_back({{"experiment", name}, {"params", P}, {"estimate", ks}, {"critical_value_1pct", crit},
                           {"n", static_cast<long>(va.size())}, {"seed", mc.seed}, {"config_hash", hash},
                           {"warnings", a.warnings}});
        rows.push_back({name, "ks", detail::num(ks), "", std::to_string(va.size()), detail::num(crit)});
    } else if (name == "invariant_tail") {
        detail::Params p(P, name, {"x_values"});
        const auto xs = p.get<std::vector<double>>("x_values", {10.0, 100.0, 1000.0});
        const InvariantDraws b = sample_invariant(d, mc, InvariantMethod::closed_form);
        for (double x : xs) {
            long hit = 0;
            for (const auto& s : b.samples) hit += s.A > x ? 1 : 0;
            McEstimate e;
            e.n = static_cast<long>(b.samples.size());
            e.mean = static_cast<double>(hit) / e.n;
            e.std_error = std::sqrt(e.mean * (1.0 - e.mean) / e.n);
            Json rec = detail::estimate_record(name, {{"x", x}}, e, invariant_tail_asymptotic(x), cfg, hash);
            rec["exact_tail"] = invariant_tail_exact(x);
            records.push_back(rec);
            rows.push_back({name, "x=" + detail::num(x), detail::num(e.mean), detail::num(e.std_error),
                            std::to_string(e.n), detail::num(invariant_tail_asymptotic(x))});
        }
    } else if (name == "moment_dichotomy") {
        detail::Params p(P, name, {"checkpoints", "replicas", "powers"});
        const auto cps = p.get<std::vector<long>>("checkpoints", {1000, 10000, 100000, 1000000});
        const int reps = p.get<int>("replicas", 16);
        const auto powers = p.get<std::vector<double>>("powers", {1.0, 0.5});
        for (double pw : powers) {
            const auto med = median_running_moment(invariant_running_moment(d, pw, mc, cps, reps));
            for (std::size_t j = 0; j < cps.size(); ++j) {
                records.push_back({{"experiment", name}, {"params", {{"p", pw}, {"n", cps[j]}, {"replicas", reps}}},
                                   {"estimate", med[j]}, {"seed", mc.seed}, {"config_hash", hash}});
                rows.push_back({name, "p=" + detail::num(pw) + " n=" + std::to_string(cps[j]), detail::num(med[j]), "",
                                std::to_string(cps[j]), ""});
            }
        }
    } else if (name == "feynman_kac") {
        detail::Params p(P, name, {"l", "r", "times"});
        const int l = p.need<int>("l");
        const double r = p.need<double>("r");
        const auto times = p.get<std::vector<double>>("times", {0.25, 0.5, 1.0, 2.0, 4.0});
        const double ref = f_l(RadialMode(d, l), r);
        const auto est = feynman_kac_mode(d, l, r, times, mc);
        for (std::size_t j = 0; j < times.size(); ++j) {
            const double s3 = 3.0 * est[j].std_error;
            if (est[j].mean < ref - s3 || est[j].mean > r + s3) out.ok = false;
            add({{"l", l}, {"r", r}, {"t", times[j]}}, est[j], ref, false, "t=" + detail::num(times[j]));
        }
    } else if (name == "lambda") {
        detail::Params p(P, name, {"radii", "t"});
        const auto radii = p.get<std::vector<double>>("radii", {0.5, 1.0, 2.0});
        const double t = p.get<double>("t", 6.0);
        const McEstimate lam = estimate_lambda(d, mc);
        add({{"estimator", "invariant"}}, lam, std::nullopt, false, "lambda");
        const LambdaAtTime lt = lambda_at_time(d, radii, t, mc);
        for (std::size_t j = 0; j < radii.size(); ++j) {
            const McEstimate& e = lt.raw[j];
            if (std::fabs(e.mean - lam.mean) >= z_tol * std::hypot(e.std_error, lam.std_error)) out.ok = false;
            for (std::size_t k = 0; k < j; ++k) {
                const McEstimate& o = lt.raw[k];
                if (std::fabs(e.mean - o.mean) >= z_tol * std::hypot(e.std_error, o.std_error)) out.ok = false;
            }
            add({{"estimator", "raw"}, {"r", radii[j]}, {"t", t}}, e, std::nullopt, false, "raw r=" + detail::num(radii[j]));
            add({{"estimator", "controlled"}, {"r", radii[j]}, {"t", t}}, lt.controlled[j], std::nullopt, false,
                "controlled r=" + detail::num(radii[j]));
        }
    } else if (name == "semigroup_gap") {
        detail::Params p(P, name, {"r", "times", "n_dirs", "lambda_paths"});
        const double r = p.get<double>("r", 1.0);
        const auto times = p.get<std::vector<double>>("times", {0.25, 1.0, 4.0});
        const int n_dirs = p.get<int>("n_dirs", 32);
        const BoundarySpec g = parse_boundary(cfg.boundary, d);
        double lam = 0.0;
        if (mean(g) != 0.0) {
            McConfig lc = mc;
            lc.n_paths = p.get<long>("lambda_paths", 1000000);
            lam = estimate_lambda(d, lc).mean;
        }
        const EllipticSolution u = solve(g, detail::solve_truncation(cfg, g));
        for (const SemigroupGap& gap : semigroup_gap(g, u, r, times, lam, mc, n_dirs)) {
            records.push_back({{"experiment", name}, {"params", {{"r", r}, {"t", gap.t}, {"lambda", lam}}},
                               {"estimate", gap.gap}, {"noise_floor", gap.noise_floor}, {"n", mc.n_paths},
                               {"seed", mc.seed}, {"config_hash", hash}});
            rows.push_back({name, "t=" + detail::num(gap.t), detail::num(gap.gap), detail::num(gap.noise_floor),
                            std::to_string(mc.n_paths), ""});
        }
    } else if (name == "coupling") {
        detail::Params p(P, name, {"w", "x", "y", "alpha", "t"});
        const std::string w = p.need<std::string>("w");
        const Point x = p.point("x", d), y = p.point("y", d);
        const double alpha = p.get<double>("alpha", 0.5), t = p.get<double>("t", mc.t_max);
        const CouplingReport rep = convexity_coupling_check(detail::named_field(w), x, y, alpha, t, mc);
        if (w != "neg_norm" && (rep.violations != 0 || rep.max_affine_defect > 1e-14)) out.ok = false;
        records.push_back({{"experiment", name}, {"params", P}, {"violations", rep.violations}, {"n", rep.paths},
                           {"max_affine_defect", rep.max_affine_defect}, {"seed", mc.seed}, {"config_hash", hash}});
        rows.push_back({name, w, std::to_string(rep.violations), detail::num(rep.max_affine_defect),
                        std::to_string(rep.paths), ""});
    } else {
        throw ConfigError("experiment.name: unknown experiment '" + name +
                          "' (second_moment, exit_probability, flow_mean, semigroup, invariant_ks, invariant_tail, "
                          "moment_dichotomy, feynman_kac, lambda, semigroup_gap, coupling)");
    }
    const Json header{{"command", "simulate"}, {"experiment", name}, {"config", resolved}, {"config_hash", hash},
                      {"passed", out.ok}};
    out.text = detail::finish(cfg, header, records,
                              {"experiment", "label", "estimate", "std_error", "n", "reference_value"}, rows);
    return out;
}

inline Json convexity_report_json(const ConvexityReport& r) {
    Json j{{"verdict", verdict_name(r.verdict)},
           {"min_hessian_eigenvalue", r.min_hessian_eigenvalue},
           {"min_normalized_eigenvalue", r.min_normalized_eigenvalue},
           {"tolerance", r.tolerance},
           {"hessian_negative", r.hessian_negative},
           {"midpoint_violated", r.midpoint_violated},
           {"warnings", r.warnings}};
    if (r.witness) {
        j["witness"] = {{"x", r.witness->x}, {"y", r.witness->y}, {"alpha", r.witness->alpha},
                        {"violation", r.witness->violation}};
    }
    return j;
}

inline RunOutput run_convexity(const RunConfig& cfg) {
    const Json resolved = resolved_config(cfg);
    const std::string hash = config_hash(resolved);
    const BoundarySpec g = parse_boundary(cfg.boundary, cfg.dim);
    const EquivalenceResult res = equivalence_harness(g, cfg.lmax, cfg.probe);
    RunOutput out;
    out.ok = res.agree;
    Json records = Json::array({{{"function", "u"}, {"report", convexity_report_json(res.u_report)}},
                                {{"function", "v"}, {"report", convexity_report_json(res.v_report)}}});
    std::vector<std::vector<std::string>> rows;
    for (const auto& [fn, rep] : {std::pair<const char*, const ConvexityReport*>{"u", &res.u_report},
                                  std::pair<const char*, const ConvexityReport*>{"v", &res.v_report}}) {
        rows.push_back({fn, verdict_name(rep->verdict), detail::num(rep->min_hessian_eigenvalue),
                        detail::num(rep->witness ? rep->witness->violation : 0.0)});
    }
    const Json header{{"command", "convexity"}, {"config", resolved}, {"config_hash", hash},
                      {"truncation", res.truncation}, {"agree", res.agree}, {"passed", out.ok},
                      {"probe_exclusion_radius", cfg.probe.r_min}};
    out.text = detail::finish(cfg, header, records, {"function", "verdict", "min_hessian_eigenvalue", "violation"}, rows);
    return out;
}

inline RunOutput run(const RunConfig& cfg) {
    switch (cfg.command) {
        case Command::solve: return run_solve(cfg);
        case Command::verify: return run_verify(cfg);
        case Command::simulate: return run_simulate(cfg);
        case Command::convexity: return run_convexity(cfg);
    }
    throw ConfigError("command: unsupported");
}

/// Human-readable plan; parses and validates but runs nothing expensive.
inline std::string describe(const RunConfig& cfg) {
    std::ostringstream o;
    const Json resolved = resolved_config(cfg);
    o << "command: " << command_name(cfg.command) << "\n";
    o << "config hash: " << config_hash(resolved) << "\n";
    o << "dimension: " << cfg.dim << "\n";
    const BoundarySpec g = parse_boundary(cfg.boundary, cfg.dim);
    o << "boundary: " << boundary_label(g) << " (" << cfg.boundary.dump() << ")\n";
    switch (cfg.command) {
        case Command::solve: {
            const int L = detail::solve_truncation(cfg, g);
            double R = 1.0;
            for (double r : cfg.grid.radii) R = std::max(R, r);
            o << "truncation L: " << L << (cfg.lmax < 0 ? " (tail-bound rule at R = " + detail::num(R) + ")" : " (fixed)")
              << "\n";
            o << "modes: degrees 0.." << L << ", constant c = " << detail::num(constant_c(g)) << "\n";
            if (cfg.dim == 2) {
                o << "projection nodes: " << gou::detail::circle_rule(g, L).phi.size() << " (circle)\n";
            } else {
                o << "projection nodes: " << gou::detail::zonal_rule(cfg.dim, L).t.size() << " (zonal)\n";
            }
            o << "grid: " << cfg.grid.radii.size() << " radii x " << cfg.grid.n_dirs << " directions"
              << (cfg.grid.residual ? ", with residual column" : "") << "\n";
            break;
        }
        case Command::verify:
            o << "checks: radial_identity, ode_residuals, integral_identity, scale_function, decay_bound, "
                 "boundary_gap_decreasing, elliptic_residual, pathwise_affinity, convexity_equivalence\n";
            break;
        case Command::simulate: {
            const long steps = steps_for(cfg.mc.t_max, cfg.mc.dt);
            o << "experiment: " << cfg.experiment.name << " " << cfg.experiment.params.dump() << "\n";
            o << "paths: " << cfg.mc.n_paths << ", dt: " << detail::num(cfg.mc.dt) << ", t_max: " << detail::num(cfg.mc.t_max)
              << " (" << steps << " steps)\n";
            o << "seed: " << cfg.mc.seed << ", streams: (tag << 48) + path index, path index in [0, " << cfg.mc.n_paths
              << ")\n";
            o << "workers: " << resolve_workers(cfg.mc.workers) << " (results do not depend on this)\n";
            o << "exit bridge correction: " << (cfg.mc.exit_bridge ? "on" : "off") << ", exit cap: "
              << detail::num(cfg.mc.max_exit_time) << "\n";
            break;
        }
        case Command::convexity: {
            const auto& p = cfg.probe;
            o << "truncation L: " << (cfg.lmax >= 0 ? std::to_string(cfg.lmax) : "tail-bound rule") << "\n";
            o << "Hessian probes: " << p.n_radii * p.n_dirs << " (|x| in [" << detail::num(p.r_min) << ", "
              << detail::num(p.r_max) << "], h_fd = " << detail::num(p.h_fd) << " relative, origin ball of radius "
              << detail::num(p.r_min) << " excluded)\n";
            o << "midpoint triples: " << p.n_triples << " in the ball of radius " << detail::num(p.sample_radius)
              << ", seed " << p.seed << "\n";
            break;
        }
    }
    return o.str();
}

}  // namespace gou
