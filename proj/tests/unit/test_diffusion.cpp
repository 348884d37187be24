#include "gou/diffusion.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace gou;

namespace {

McConfig small(long n, double dt = 1e-2, double t_max = 1.0) {
    McConfig c;
    c.n_paths = n;
    c.dt = dt;
    c.t_max = t_max;
    return c;
}

}  // namespace

TEST(McConfig, Validation) {
    McConfig c;
    c.n_paths = 0;
    EXPECT_THROW(c.validate(), ConfigError);
    c = McConfig{};
    c.dt = 2.0;
    EXPECT_THROW(c.validate(), ConfigError);
    c = McConfig{};
    c.dt = -1e-3;
    EXPECT_THROW(c.validate(), ConfigError);
    EXPECT_NO_THROW(McConfig{}.validate());
}

TEST(Summarize, RejectsNaNEntries) {
    const McEstimate e = summarize({1.0, 3.0, std::nan(""), 5.0});
    EXPECT_EQ(e.n, 3);
    EXPECT_EQ(e.rejected, 1);
    EXPECT_DOUBLE_EQ(e.mean, 3.0);
    EXPECT_DOUBLE_EQ(e.std_error, 2.0 / std::sqrt(3.0));
}

TEST(Flow, StartsAtIdentityAndIsAffine) {
    const FlowSample f = sample_flow(3, small(1, 1e-2, 0.5), 4);
    EXPECT_EQ(f.M[0], 1.0);
    EXPECT_EQ(f.at(0, Point{1.0, -2.0, 0.5}), (Point{1.0, -2.0, 0.5}));
    const Point x{0.3, 1.0, -2.0}, y{-1.0, 4.0, 0.2};
    const std::size_t k = f.t_grid.size() - 1;
    const Point fx = f.at(k, x), fy = f.at(k, y);
    Point mid(3);
    for (int i = 0; i < 3; ++i) mid[i] = 0.25 * x[i] + 0.75 * y[i];
    const Point fm = f.at(k, mid);
    for (int i = 0; i < 3; ++i) EXPECT_NEAR(fm[i], 0.25 * fx[i] + 0.75 * fy[i], 1e-14);
}

TEST(Flow, MultiplierIsAMartingale) {
    const auto est = flow_mean_m(2, small(20000, 1e-2, 1.0), {0.5, 1.0});
    for (const auto& e : est) EXPECT_LT(std::fabs(e.mean - 1.0), 4.0 * e.std_error);
}

TEST(Flow, ReproducibleAcrossWorkerCounts) {
    McConfig a = small(3000), b = a;
    b.workers = 4;
    const Point x{1.0, 0.5};
    const McEstimate ea = second_moment(2, x, 0.5, a), eb = second_moment(2, x, 0.5, b);
    EXPECT_EQ(ea.mean, eb.mean);
    EXPECT_EQ(ea.std_error, eb.std_error);
}

TEST(SecondMoment, AgreesWithTheClosedForm) {
    const Point x{1.0, 0.0};
    const McEstimate e = second_moment(2, x, 0.5, small(20000, 5e-3, 0.5));
    EXPECT_LT(std::fabs(e.mean - second_moment_reference(2, x, 0.5)), 4.0 * e.std_error);
    EXPECT_DOUBLE_EQ(second_moment_reference(3, Point{0.0, 0.0, 0.0}, 0.0), 0.0);
    EXPECT_THROW(second_moment(2, x, 2.0, small(10)), DomainError);
}

TEST(ExitProbability, ReferenceEndpoints) {
    EXPECT_NEAR(exit_probability_reference(3, 0.5, 0.5, 2.0), 0.0, 1e-15);
    EXPECT_NEAR(exit_probability_reference(3, 2.0, 0.5, 2.0), 1.0, 1e-15);
    // d = 3: h(r) = r - 1/r.
    EXPECT_NEAR(exit_probability_reference(3, 1.0, 0.5, 2.0), 1.5 / 3.0, 1e-12);
}

TEST(ExitProbability, StartNearTheInnerRadiusRarelyEscapes) {
    const Point x{0.505, 0.0, 0.0};
    McConfig c = small(4000, 1e-3, 1.0);
    const McEstimate e = exit_probability(3, x, 0.5, 2.0, c);
    EXPECT_LT(e.mean, 0.05);
    EXPECT_EQ(e.rejected, 0);
    EXPECT_THROW(exit_probability(3, x, 0.6, 2.0, c), DomainError);
}

TEST(ExitProbability, CapRejectsPaths) {
    McConfig c = small(50, 1e-2, 1.0);
    c.max_exit_time = 0.02;
    const McEstimate e = exit_probability(2, Point{1.0, 0.0}, 0.1, 50.0, c);
    EXPECT_GT(e.rejected, 0);
    EXPECT_FALSE(e.warnings.empty());
}

TEST(Invariant, ClosedFormTailMatchesErf) {
    McConfig c = small(100000);
    const InvariantDraws draws = sample_invariant(2, c, InvariantMethod::closed_form);
    long above = 0;
    for (const auto& s : draws.samples) above += s.A > 10.0 ? 1 : 0;
    const double p = invariant_tail_exact(10.0), se = std::sqrt(p * (1 - p) / c.n_paths);
    EXPECT_NEAR(p, 0.24817036595415071751, 1e-15);
    EXPECT_LT(std::fabs(static_cast<double>(above) / c.n_paths - p), 4.0 * se);
    EXPECT_NEAR(invariant_tail_exact(1000.0), 0.025227120630039611458, 1e-15);
}

TEST(Invariant, KsStatistic) {
    EXPECT_EQ(ks_statistic({1, 2, 3}, {1, 2, 3}), 0.0);
    EXPECT_EQ(ks_statistic({1, 2}, {3, 4}), 1.0);
    EXPECT_NEAR(ks_critical_value(100, 100), 1.628 * std::sqrt(0.02), 1e-15);
}

TEST(Invariant, MedianOfRunningMeans) {
    const auto med = median_running_moment({{1.0, 5.0}, {3.0, 2.0}, {2.0, 9.0}});
    EXPECT_EQ(med, (std::vector<double>{2.0, 5.0}));
    const auto runs = invariant_running_moment(3, 0.5, small(1), {100, 1000}, 3);
    EXPECT_EQ(runs.size(), 3u);
    EXPECT_EQ(runs[0].size(), 2u);
}

TEST(Invariant, HalfMomentMatchesTheExactValue) {
    const auto runs = invariant_running_moment(3, 0.5, small(1), {200000});
    EXPECT_NEAR(runs[0][0] / 2.1213203435596425732, 1.0, 0.03);
}

TEST(FeynmanKac, DegreeOneIsTheRadiusAtTimeZeroAndBounded) {
    const auto est = feynman_kac_mode(3, 2, 1.0, {0.0, 0.5}, small(4000, 5e-3, 0.5));
    EXPECT_EQ(est[0].mean, 1.0);
    EXPECT_EQ(est[0].std_error, 0.0);
    EXPECT_LT(est[1].mean, 1.0 + 3.0 * est[1].std_error);
    EXPECT_GT(est[1].mean, 0.3023472736864497518 - 3.0 * est[1].std_error);
}

TEST(Semigroup, TimeZeroIsTheIdentity) {
    const FieldFn w = [](std::span<const double> x) { return x[0] * x[0] + std::sin(x[1]); };
    const Point x{0.7, -1.3};
    const McEstimate e = semigroup_apply(w, x, 0.0, small(10));
    EXPECT_EQ(e.mean, w(x));
    EXPECT_EQ(e.std_error, 0.0);
}

TEST(Semigroup, LinearFunctionsAreInvariant) {
    const FieldFn w = [](std::span<const double> x) { return 2.0 * x[0] - x[1]; };
    const McEstimate e = semigroup_apply(w, Point{1.0, 1.0}, 0.5, small(20000, 1e-2, 0.5));
    EXPECT_LT(std::fabs(e.mean - 1.0), 4.0 * e.std_error);
}

TEST(Coupling, ConvexFunctionNeverViolates) {
    const FieldFn norm = [](std::span<const double> x) { return std::hypot(x[0], x[1]); };
    const CouplingReport r = convexity_coupling_check(norm, Point{1.0, 0.0}, Point{-0.5, 2.0}, 0.3, 0.5, small(2000));
    EXPECT_EQ(r.violations, 0);
    EXPECT_EQ(r.paths, 2000);
    EXPECT_LT(r.max_affine_defect, 1e-14);
}

TEST(Coupling, ConcaveFunctionViolatesAlmostEverywhere) {
    const FieldFn neg = [](std::span<const double> x) { return -(x[0] * x[0] + x[1] * x[1]); };
    const CouplingReport r = convexity_coupling_check(neg, Point{1.0, 0.0}, Point{-1.0, 1.0}, 0.5, 0.5, small(2000));
    EXPECT_GT(r.violations, 0.9 * r.paths);
}

TEST(SemigroupGap, GapAtTimeZeroIsDeterministic) {
    const auto g = BoundarySpec::builtin(2, Builtin::cos_theta);
    const EllipticSolution u = solve(g, 1);
    const auto gaps = semigroup_gap(g, u, 1.0, {0.0}, 0.0, small(50), 8);
    // v = u for linear data and the mean is zero.
    EXPECT_NEAR(gaps[0].gap, 0.0, 1e-28);
    EXPECT_LT(gaps[0].noise_floor, 1e-28);
}
