#include "gou/convexity.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace gou;

namespace {

ProbeConfig quick() {
    ProbeConfig p;
    p.n_radii = 4;
    p.n_dirs = 8;
    p.n_triples = 5000;
    return p;
}

}  // namespace

TEST(ConeFunction, IsPositivelyHomogeneous) {
    const auto g = BoundarySpec::builtin(2, Builtin::cos_2theta);
    const FieldFn v = cone_function(g);
    for (const Point& x : {Point{0.3, 0.4}, Point{-2.0, 1.0}}) {
        for (double s : {0.1, 2.0, 37.0}) {
            const Point sx{s * x[0], s * x[1]};
            EXPECT_NEAR(v(sx), s * v(x), 1e-13 * s * (1.0 + std::fabs(v(x))));
        }
    }
    EXPECT_EQ(v(Point{0.0, 0.0}), 0.0);
}

TEST(Midpoint, ViolationSign) {
    const FieldFn sq = [](std::span<const double> x) { return x[0] * x[0]; };
    EXPECT_NEAR(midpoint_violation(sq, Point{1.0}, Point{-1.0}, 0.5), -1.0, 1e-15);
    const FieldFn neg = [](std::span<const double> x) { return -x[0] * x[0]; };
    EXPECT_NEAR(midpoint_violation(neg, Point{1.0}, Point{-1.0}, 0.5), 1.0, 1e-15);
}

TEST(Hessian, MinimumEigenvalueOfAQuadratic) {
    const FieldFn q = [](std::span<const double> x) { return x[0] * x[0] - 3.0 * x[1] * x[1]; };
    const HessianScan hs = hessian_min_eig(q, {Point{1.0, 1.0}, Point{0.5, -2.0}}, 1e-3);
    EXPECT_NEAR(hs.min_eig, -6.0, 1e-5);
    EXPECT_NEAR(std::fabs(hs.eigvec[1]), 1.0, 1e-8);
    EXPECT_THROW(hessian_min_eig(q, {Point{1.0, 1.0}}, 0.0), DomainError);
}

TEST(CheckConvexity, NormIsConvex) {
    const FieldFn n = [](std::span<const double> x) { return std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]); };
    const ConvexityReport r = check_convexity(n, 3, quick());
    EXPECT_EQ(r.verdict, Verdict::convex_within_tolerance);
    EXPECT_FALSE(r.witness);
}

TEST(CheckConvexity, SaddleHasAWitness) {
    const FieldFn s = [](std::span<const double> x) { return x[0] * x[1]; };
    const ConvexityReport r = check_convexity(s, 2, quick());
    ASSERT_EQ(r.verdict, Verdict::nonconvex_witness_found);
    ASSERT_TRUE(r.witness);
    EXPECT_NEAR(midpoint_violation(s, r.witness->x, r.witness->y, r.witness->alpha), r.witness->violation, 1e-12);
    EXPECT_GT(r.witness->violation, r.tolerance);
}

TEST(CheckConvexity, VerdictIsScaleInvariant) {
    const auto g1 = BoundarySpec::builtin(2, Builtin::abs_cos_theta);
    const auto g2 = BoundarySpec::builtin(2, Builtin::abs_cos_theta, 2.0);
    const Verdict a = check_convexity(cone_function(g1), 2, quick()).verdict;
    const Verdict b = check_convexity(cone_function(g2), 2, quick()).verdict;
    EXPECT_EQ(a, b);
    EXPECT_EQ(a, Verdict::convex_within_tolerance);
}

TEST(Equivalence, LinearAndQuadrupoleCases) {
    const EquivalenceResult lin = equivalence_harness(BoundarySpec::builtin(2, Builtin::cos_theta), -1, quick());
    EXPECT_TRUE(lin.agree);
    EXPECT_EQ(lin.u_report.verdict, Verdict::convex_within_tolerance);
    const EquivalenceResult quad = equivalence_harness(BoundarySpec::builtin(2, Builtin::cos_2theta), -1, quick());
    EXPECT_TRUE(quad.agree);
    EXPECT_EQ(quad.v_report.verdict, Verdict::nonconvex_witness_found);
    EXPECT_EQ(quad.truncation, 2);
}

TEST(ProbeConfig, Validation) {
    ProbeConfig p;
    p.r_min = 5.0;
    EXPECT_THROW(p.validate(), ConfigError);
    p = ProbeConfig{};
    p.n_triples = 0;
    EXPECT_THROW(p.validate(), ConfigError);
}
