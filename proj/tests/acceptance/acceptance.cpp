// Acceptance checks. Usage: acceptance <n>, n in 1..16.
// Prints one PASS/FAIL line and exits 0 on PASS, 1 on FAIL, 2 on bad usage.

#include "gou/config.hpp"
#include "gou/convexity.hpp"
#include "gou/diffusion.hpp"
#include "gou/runner.hpp"
#include "gou/verify.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

using namespace gou;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

// Pinned tolerances.
constexpr double kZ = 3.0;                  // z-score bound for Monte Carlo comparisons
constexpr double kRadialTol = 1e-10;        // 1
constexpr double kOdeTol = 1e-5;            // 2
constexpr double kIntegralTol = 1e-10;      // 3
constexpr double kScaleTol = 1e-10;         // 4
constexpr int kMaxOnset = 30;               // 5
constexpr double kGapFraction = 0.02;       // 6
constexpr double kEllipticTol = 1e-5;       // 7
constexpr double kFkLimitSlack = 1e-3;      // 11
constexpr double kGapFloorFactor = 10.0;      // 13
constexpr double kAffineDefect = 1.5e-14;   // 14, about 64 eps
constexpr double kMomentGrowth = 1.25;      // 10: median(1e6)/median(1e3) for p = 1
constexpr double kMomentDrift = 0.05;       // 10: |m(n)/m(1e6) - 1| for p = 1/2
constexpr double kMomentExact = 0.01;       // 10: |m(1e6)/E - 1| for p = 1/2

// E|X(inf)|^{1/2} from the closed form.
const std::map<int, double> kHalfMoment = {{2, 1.8540746773013719184}, {3, 2.1213203435596425732}};

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

std::string est_str(const McEstimate& e) { return fmt("%.5g", e.mean) + "+-" + fmt("%.2g", e.std_error); }

McConfig mc(long n, double dt, double t_max, std::uint64_t seed = 42) {
    McConfig c;
    c.n_paths = n;
    c.dt = dt;
    c.t_max = t_max;
    c.seed = seed;
    return c;
}

Outcome from_check(const CheckResult& c) {
    return {c.passed, c.name + " = " + fmt_g(c.value) + " (threshold " + fmt_g(c.threshold) + "); " + c.detail};
}

Outcome c1() { return from_check(check_radial_identity({2, 3, 5}, kRadialTol, 1001)); }
Outcome c2() { return from_check(check_ode_residuals({2, 3, 5}, 20, 0.1, 50.0, 60, kOdeTol)); }
Outcome c3() { return from_check(check_integral_identity({2, 3, 5, 10}, kIntegralTol)); }
Outcome c4() { return from_check(check_scale_function(kScaleTol, 400)); }
Outcome c5() { return from_check(check_decay_bound({2, 3}, {1.0, 2.0}, kMaxOnset, 60)); }
Outcome c6() { return from_check(check_boundary_convergence({1.0, 5.0, 50.0}, kGapFraction, true)); }
Outcome c7() { return from_check(check_elliptic_residual(kEllipticTol)); }

Outcome c8() {
    const Point x{1.0, 0.0, 0.0};
    const double ref = exit_probability_reference(3, 1.0, 0.5, 2.0);
    const McEstimate a = exit_probability(3, x, 0.5, 2.0, mc(100000, 1e-3, 1.0));
    const McEstimate b = exit_probability(3, x, 0.5, 2.0, mc(100000, 5e-4, 1.0));
    const double z = (a.mean - ref) / a.std_error;
    const double shift = std::fabs(a.mean - b.mean) / std::hypot(a.std_error, b.std_error);
    Outcome o;
    o.pass = std::fabs(z) < kZ && shift < kZ && a.rejected == 0 && b.rejected == 0;
    o.detail = "ref " + fmt("%.6f", ref) + ", dt=1e-3: " + est_str(a) + " (z " + fmt("%.2f", z) + "), dt=5e-4: " +
               est_str(b) + ", shift " + fmt("%.2f", shift) + " sigma, rejected " + std::to_string(a.rejected + b.rejected);
    return o;
}

Outcome c9() {
    struct Case {
        int d;
        Point x;
        double t;
    };
    Outcome o{true, ""};
    for (const Case& c : {Case{2, {0.0, 0.0}, 1.0}, Case{3, {1.0, 0.0, 0.0}, 0.5}}) {
        const McEstimate e = second_moment(c.d, c.x, c.t, mc(100000, 1e-3, c.t));
        const double ref = second_moment_reference(c.d, c.x, c.t);
        const double z = (e.mean - ref) / e.std_error;
        o.pass &= std::fabs(z) < kZ;
        o.detail += "d=" + std::to_string(c.d) + " |x|=" + fmt("%g", detail::norm2(c.x)) + " t=" + fmt("%g", c.t) +
                    ": " + est_str(e) + " vs " + fmt("%.6f", ref) + " (z " + fmt("%.2f", z) + "); ";
    }
    return o;
}

Outcome c10() {
    Outcome o{true, ""};
    // KS between the two samplers of A.
    const InvariantDraws path = sample_invariant(2, mc(10000, 2e-3, 30.0), InvariantMethod::path_integral);
    const InvariantDraws closed = sample_invariant(2, mc(10000, 2e-3, 30.0), InvariantMethod::closed_form);
    std::vector<double> a, b;
    for (const auto& s : path.samples) a.push_back(s.A);
    for (const auto& s : closed.samples) b.push_back(s.A);
    const double ks = ks_statistic(a, b), crit = ks_critical_value(a.size(), b.size());
    o.pass &= ks < crit;
    o.detail += "KS " + fmt("%.4f", ks) + " < " + fmt("%.4f", crit) + "; ";
    // Tail against the asymptotic law.
    const InvariantDraws tail = sample_invariant(2, mc(10000, 1e-3, 1.0, 43), InvariantMethod::closed_form);
    for (double x : {10.0, 100.0}) {
        long hit = 0;
        for (const auto& s : tail.samples) hit += s.A > x ? 1 : 0;
        const double p = static_cast<double>(hit) / tail.samples.size();
        const double se = std::sqrt(p * (1 - p) / tail.samples.size());
        const double z = (p - invariant_tail_asymptotic(x)) / se;
        o.pass &= std::fabs(z) < kZ;
        o.detail += "P(A>" + fmt("%g", x) + ") " + fmt("%.4f", p) + " vs " + fmt("%.4f", invariant_tail_asymptotic(x)) +
                    " (z " + fmt("%.2f", z) + "); ";
    }
    // Moment dichotomy: medians over 16 replicas of running means.
    const std::vector<long> cps{1000, 10000, 100000, 1000000};
    for (int d : {2, 3}) {
        const auto m1 = median_running_moment(invariant_running_moment(d, 1.0, mc(1, 1e-3, 1.0), cps, 16));
        const auto mh = median_running_moment(invariant_running_moment(d, 0.5, mc(1, 1e-3, 1.0, 44), cps, 16));
        const double growth = m1.back() / m1.front();
        double drift = 0.0;
        for (double m : mh) drift = std::max(drift, std::fabs(m / mh.back() - 1.0));
        const double exact_err = std::fabs(mh.back() / kHalfMoment.at(d) - 1.0);
        o.pass &= growth >= kMomentGrowth && drift <= kMomentDrift && exact_err <= kMomentExact;
        o.detail += "d=" + std::to_string(d) + " p=1 medians";
        for (double m : m1) o.detail += " " + fmt("%.3f", m);
        o.detail += " (growth " + fmt("%.2f", growth) + "), p=1/2 medians";
        for (double m : mh) o.detail += " " + fmt("%.4f", m);
        o.detail += " (drift " + fmt("%.3f", drift) + ", vs exact " + fmt("%.4f", kHalfMoment.at(d)) + "); ";
    }
    if (path.truncated_paths > 0) o.detail += "note: " + path.warnings.front();
    return o;
}

Outcome c11() {
    struct Case {
        int d, l;
        double r;
    };
    const std::vector<double> times{0.25, 0.5, 1.0, 2.0, 4.0};
    Outcome o{true, ""};
    for (const Case& c : {Case{2, 1, 1.0}, Case{3, 2, 1.0}}) {
        const double ref = f_l(RadialMode(c.d, c.l), c.r);
        const auto est = feynman_kac_mode(c.d, c.l, c.r, times, mc(100000, 1e-3, 4.0));
        bool sandwich = true, monotone = true;
        for (std::size_t j = 0; j < est.size(); ++j) {
            const double s3 = kZ * est[j].std_error;
            sandwich &= est[j].mean >= ref - s3 && est[j].mean <= c.r + s3;
            for (std::size_t k = j + 1; k < est.size(); ++k) {
                monotone &= est[k].mean <= est[j].mean + kZ * std::hypot(est[j].std_error, est[k].std_error);
            }
        }
        const McEstimate& last = est.back();
        const bool limit = std::fabs(last.mean - ref) < kZ * last.std_error + kFkLimitSlack;
        o.pass &= sandwich && monotone && limit;
        o.detail += "(d,l,r)=(" + std::to_string(c.d) + "," + std::to_string(c.l) + "," + fmt("%g", c.r) + ") f_l=" +
                    fmt("%.6f", ref) + ":";
        for (const auto& e : est) o.detail += " " + est_str(e);
        o.detail += std::string(" [sandwich ") + (sandwich ? "ok" : "FAIL") + ", monotone " + (monotone ? "ok" : "FAIL") +
                    ", limit " + (limit ? "ok" : "FAIL") + "]; ";
    }
    return o;
}

Outcome c12() {
    const int d = 3;
    const McEstimate lam = estimate_lambda(d, mc(1000000, 1e-3, 1.0));
    const std::vector<double> radii{0.5, 1.0, 2.0};
    const LambdaAtTime lt = lambda_at_time(d, radii, 6.0, mc(50000, 1e-3, 6.0));
    std::vector<McEstimate> all = lt.raw;
    all.push_back(lam);
    Outcome o{true, "lambda_3 (invariant law) " + est_str(lam) + "; t=6 raw:"};
    for (std::size_t i = 0; i < all.size(); ++i) {
        for (std::size_t j = 0; j < i; ++j) {
            o.pass &= std::fabs(all[i].mean - all[j].mean) < kZ * std::hypot(all[i].std_error, all[j].std_error);
        }
    }
    for (std::size_t j = 0; j < radii.size(); ++j) o.detail += " r=" + fmt("%g", radii[j]) + " " + est_str(lt.raw[j]);
    o.detail += "; controlled:";
    for (std::size_t j = 0; j < radii.size(); ++j) o.detail += " " + est_str(lt.controlled[j]);
    return o;
}

Outcome c13() {
    const std::vector<double> times{0.25, 1.0, 4.0};
    Outcome o{true, ""};
    const double lam3 = estimate_lambda(3, mc(1000000, 1e-3, 1.0)).mean;
    for (const BoundarySpec& g : {BoundarySpec::builtin(3, Builtin::constant), BoundarySpec::builtin(2, Builtin::cos_2theta)}) {
        const EllipticSolution u = solve(g, *g.band_limit());
        const double lam = g.dim() == 3 ? lam3 : 0.0;
        const auto gaps = semigroup_gap(g, u, 1.0, times, lam, mc(20000, 1e-3, 4.0));
        bool decreasing = true;
        for (std::size_t j = 1; j < gaps.size(); ++j) decreasing &= gaps[j].gap < gaps[j - 1].gap;
        const bool floor = gaps.back().gap < kGapFloorFactor * gaps.back().noise_floor;
        o.pass &= decreasing && floor;
        o.detail += boundary_label(g) + ":";
        for (const auto& gp : gaps) o.detail += " t=" + fmt("%g", gp.t) + " " + fmt("%.4g", gp.gap);
        o.detail += " floor(t=4) " + fmt("%.3g", gaps.back().noise_floor) + " ratio " +
                    fmt("%.2f", gaps.back().gap / gaps.back().noise_floor) + "; ";
    }
    return o;
}

Outcome c14() {
    Outcome o{true, ""};
    const Point x{1.0, 0.0, -0.5}, y{-0.5, 2.0, 0.3};
    const std::vector<std::pair<std::string, FieldFn>> fields{
        {"|x|", [](std::span<const double> p) { return detail::norm2(p); }},
        {"x1^2", [](std::span<const double> p) { return p[0] * p[0]; }},
    };
    for (const auto& [name, w] : fields) {
        for (double alpha : {0.3, 0.5}) {
            const CouplingReport r = convexity_coupling_check(w, x, y, alpha, 1.0, mc(10000, 1e-3, 1.0));
            o.pass &= r.violations == 0 && r.max_affine_defect <= kAffineDefect;
            o.detail += name + " alpha=" + fmt("%g", alpha) + ": " + std::to_string(r.violations) + "/" +
                        std::to_string(r.paths) + " violations, affine defect " + fmt("%.2g", r.max_affine_defect) + "; ";
        }
    }
    return o;
}

Outcome c15() {
    struct Case {
        BoundarySpec g;
        Verdict expected;
    };
    const std::vector<Case> catalog{
        {BoundarySpec::builtin(2, Builtin::constant), Verdict::convex_within_tolerance},
        {BoundarySpec::builtin(3, Builtin::constant), Verdict::convex_within_tolerance},
        {BoundarySpec::builtin(2, Builtin::cos_theta), Verdict::convex_within_tolerance},
        {BoundarySpec::builtin(2, Builtin::abs_cos_theta), Verdict::convex_within_tolerance},
        {BoundarySpec::builtin(2, Builtin::cos_2theta), Verdict::nonconvex_witness_found},
    };
    ProbeConfig base;
    ProbeConfig half_h = base;
    half_h.h_fd *= 0.5;
    ProbeConfig more = base;
    more.n_triples *= 2;
    Outcome o{true, ""};
    for (const Case& c : catalog) {
        o.detail += boundary_label(c.g) + ":";
        for (const auto& [tag, cfg] : {std::pair<const char*, ProbeConfig>{"base", base}, {"h/2", half_h}, {"2n", more}}) {
            const EquivalenceResult r = equivalence_harness(c.g, -1, cfg);
            bool ok = r.agree && r.u_report.verdict == c.expected && r.v_report.verdict == c.expected;
            if (c.expected == Verdict::nonconvex_witness_found) {
                for (const ConvexityReport* rep : {&r.u_report, &r.v_report}) {
                    ok &= rep->witness.has_value() && rep->witness->violation > rep->tolerance;
                }
            }
            o.pass &= ok;
            o.detail += std::string(" ") + tag + " u=" + verdict_name(r.u_report.verdict) + " v=" +
                        verdict_name(r.v_report.verdict) + (ok ? "" : " (MISMATCH)");
        }
        o.detail += "; ";
    }
    return o;
}

// Reduced reruns of criteria 8, 9, 11, 12, 13, 14 and 15 through the result-file
// writer, with worker counts 1, 3 and 4.
Outcome c16() {
    const std::vector<std::pair<std::string, std::string>> docs{
        {"exit", R"({"command":"simulate","dim":3,"mc":{"n_paths":4000,"dt":1e-3},
                     "experiment":{"name":"exit_probability","params":{"x":[1,0,0],"r":0.5,"R":2}}})"},
        {"moment", R"({"command":"simulate","dim":3,"mc":{"n_paths":4000,"dt":1e-3,"t_max":0.5},
                       "experiment":{"name":"second_moment","params":{"x":[1,0,0]}}})"},
        {"fk", R"({"command":"simulate","dim":3,"mc":{"n_paths":3000,"dt":2e-3,"t_max":1},
                   "experiment":{"name":"feynman_kac","params":{"l":2,"r":1,"times":[0.5,1]}}})"},
        {"lambda", R"({"command":"simulate","dim":3,"mc":{"n_paths":2000,"dt":2e-3,"t_max":1},
                       "experiment":{"name":"lambda","params":{"t":1}}})"},
        {"semigroup_gap", R"({"command":"simulate","dim":2,"boundary":{"type":"builtin","name":"cos_2theta"},
                       "mc":{"n_paths":2000,"dt":2e-3,"t_max":1},
                       "experiment":{"name":"semigroup_gap","params":{"times":[0.25,1]}}})"},
        {"coupling", R"({"command":"simulate","dim":2,"mc":{"n_paths":3000,"dt":1e-3,"t_max":0.5},
                         "experiment":{"name":"coupling","params":{"w":"norm","x":[1,0],"y":[-1,2]}}})"},
        {"convexity", R"({"command":"convexity","dim":2,"boundary":{"type":"builtin","name":"cos_2theta"},
                          "probe":{"n_triples":20000}})"},
    };
    Outcome o{true, ""};
    for (const auto& [tag, text] : docs) {
        std::vector<std::string> outputs;
        for (int w : {1, 3, 4}) {
            RunConfig cfg = parse_run_config(Json::parse(text));
            cfg.mc.workers = w;
            cfg.probe.workers = w;
            outputs.push_back(run(cfg).text);
            std::ofstream("determinism_" + tag + "_w" + std::to_string(w) + ".json") << outputs.back();
        }
        const bool same = outputs[0] == outputs[1] && outputs[0] == outputs[2];
        o.pass &= same;
        o.detail += tag + (same ? " identical" : " DIFFERENT") + " (" + std::to_string(outputs[0].size()) + " bytes); ";
    }
    return o;
}

const std::map<int, std::pair<const char*, std::function<Outcome()>>> kCriteria{
    {1, {"radial identity", c1}},         {2, {"ODE residuals", c2}},
    {3, {"integral identity", c3}},       {4, {"scale function closed form", c4}},
    {5, {"decay bound", c5}},             {6, {"boundary convergence", c6}},
    {7, {"elliptic residual", c7}},       {8, {"exit probability", c8}},
    {9, {"second moment", c9}},           {10, {"invariant law", c10}},
    {11, {"Feynman-Kac sandwich and limit", c11}},
    {12, {"lambda consistency", c12}},    {13, {"semigroup convergence", c13}},
    {14, {"pathwise affinity", c14}},     {15, {"convexity equivalence harness", c15}},
    {16, {"determinism across worker counts", c16}},
};

}  // namespace

int main(int argc, char** argv) {
    if (argc != 2) {
        std::fprintf(stderr, "usage: acceptance <criterion 1-16>\n");
        return 2;
    }
    const int n = std::atoi(argv[1]);
    const auto it = kCriteria.find(n);
    if (it == kCriteria.end()) {
        std::fprintf(stderr, "unknown criterion '%s'\n", argv[1]);
        return 2;
    }
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
        o = it->second.second();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("criterion %d: %s  %s  [%.1f s]  %s\n", n, o.pass ? "PASS" : "FAIL", it->second.first, secs,
                o.detail.c_str());
    return o.pass ? 0 : 1;
}
