#include "gou/solver.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace gou;

TEST(Solver, LinearDataGivesTheCoordinate) {
    const auto g = BoundarySpec::builtin(2, Builtin::cos_theta);
    const EllipticSolution u = solve(g, 1);
    EXPECT_EQ(u.constant(), 0.0);
    for (const Point& x : {Point{0.3, -1.2}, Point{5.0, 2.0}, Point{-40.0, 1.0}}) {
        EXPECT_NEAR(u.value(x), x[0], 1e-12 * (1.0 + std::fabs(x[0])));
    }
    EXPECT_EQ(u.tail_bound(10.0), 0.0);
}

TEST(Solver, ConstantDataGivesTheInhomogeneousMode) {
    for (int d : {2, 3}) {
        const auto g = BoundarySpec::builtin(d, Builtin::constant, 2.0);
        const EllipticSolution u = solve(g, 0);
        EXPECT_NEAR(u.constant(), 2.0 * gamma_d(d), 1e-14);
        Point x(d, 0.0);
        x[0] = 3.0;
        EXPECT_NEAR(u.value(x), 2.0 * f_0(d, 3.0), 1e-13);
    }
}

TEST(Solver, ValueAtOriginIsZero) {
    const EllipticSolution u = solve_auto(BoundarySpec::builtin(2, Builtin::abs_cos_theta), 5.0);
    EXPECT_EQ(u.value(Point{0.0, 0.0}), 0.0);
    EXPECT_THROW(u.value(Point{1.0, 0.0, 0.0}), DomainError);
}

TEST(Solver, ResidualIsSmallOnTheStandardGrid) {
    for (const auto& g : {BoundarySpec::builtin(2, Builtin::cos_2theta), BoundarySpec::builtin(3, Builtin::axis_coord_squared),
                          BoundarySpec::builtin(2, Builtin::abs_cos_theta)}) {
        const EllipticSolution u = solve_auto(g, 20.0);
        for (const Point& x : log_radial_samples(g.dim(), 0.2, 20.0, 6, 16)) EXPECT_LT(residual(u, x), 1e-5);
    }
}

TEST(Solver, TailBoundDecreasesWithTruncation) {
    const auto g = BoundarySpec::builtin(2, Builtin::abs_cos_theta);
    const EllipticSolution u = solve(g, 0);
    const auto tails = u.tail_profile(2.0, 40);
    for (std::size_t L = 1; L < tails.size(); ++L) EXPECT_LE(tails[L], tails[L - 1]);
    const int L = default_truncation(g, 2.0, 1e-6);
    EXPECT_LE(solve(g, L).tail_bound(2.0), 1e-6);
}

TEST(Solver, TailBoundDominatesTheTruncationError) {
    const auto g = BoundarySpec::builtin(2, Builtin::abs_cos_theta);
    const EllipticSolution ref = solve(g, 120), coarse = solve(g, 10);
    for (const Point& x : log_radial_samples(2, 0.3, 3.0, 5, 12)) {
        EXPECT_LE(std::fabs(ref.value(x) - coarse.value(x)), coarse.tail_bound(3.0) + 1e-12);
    }
}

TEST(Solver, RotatedAxisRotatesTheSolution) {
    const std::vector<double> ax{0.0, 1.0};
    const auto g = BoundarySpec::builtin(2, Builtin::cos_2theta, 1.0, Direction::from_vector(ax));
    const auto h = BoundarySpec::builtin(2, Builtin::cos_2theta);
    const EllipticSolution ug = solve(g, 2), uh = solve(h, 2);
    EXPECT_NEAR(ug.value(Point{0.4, 1.1}), uh.value(Point{1.1, -0.4}), 1e-13);
}

TEST(Solver, BoundaryGapShrinksWithRadius) {
    const auto g = BoundarySpec::builtin(3, Builtin::axis_coord_squared);
    const EllipticSolution u = solve(g, 2);
    const double g1 = boundary_gap(u, g, 1.0), g5 = boundary_gap(u, g, 5.0), g50 = boundary_gap(u, g, 50.0);
    EXPECT_GT(g1, g5);
    EXPECT_GT(g5, g50);
}

TEST(Solver, SphereDirectionsAreUnitVectors) {
    for (int d : {2, 3, 5}) {
        const auto dirs = sphere_directions(d, 40);
        EXPECT_EQ(dirs.size(), 40u);
        for (const Point& p : dirs) EXPECT_NEAR(detail::norm2(p), 1.0, 1e-14);
    }
}

TEST(Solver, RejectsBadTruncation) {
    const auto g = BoundarySpec::builtin(2, Builtin::cos_theta);
    EXPECT_THROW(solve(g, -1), DomainError);
    EXPECT_THROW(solve(g, kTailDegree + 1), DomainError);
}
