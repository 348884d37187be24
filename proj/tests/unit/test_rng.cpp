#include "gou/parallel.hpp"
#include "gou/rng.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

using namespace gou;

// Known-answer vectors of the Philox4x32-10 reference implementation.
TEST(Philox, KnownAnswerVectors) {
    EXPECT_EQ(philox4x32_10({0, 0, 0, 0}, {0, 0}),
              (Philox4x32{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u}));
    EXPECT_EQ(philox4x32_10({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, {0xffffffffu, 0xffffffffu}),
              (Philox4x32{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu}));
    EXPECT_EQ(philox4x32_10({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, {0xa4093822u, 0x299f31d0u}),
              (Philox4x32{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u}));
}

TEST(Philox, StreamsAreReproducibleAndDistinct) {
    Philox a(42, 7), b(42, 7), c(42, 8), e(43, 7);
    for (int i = 0; i < 100; ++i) {
        const double x = a.normal();
        EXPECT_EQ(x, b.normal());
        EXPECT_NE(x, c.normal());
        EXPECT_NE(x, e.normal());
    }
}

TEST(Philox, UniformsAreInsideTheOpenInterval) {
    Philox p(1, 0);
    double sum = 0.0;
    for (int i = 0; i < 100000; ++i) {
        const double u = p.uniform();
        ASSERT_GT(u, 0.0);
        ASSERT_LT(u, 1.0);
        sum += u;
    }
    EXPECT_NEAR(sum / 100000, 0.5, 5e-3);
}

TEST(Philox, NormalMoments) {
    Philox p(9, 3);
    const int n = 2000000;
    double m1 = 0.0, m2 = 0.0, m4 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double z = p.normal();
        m1 += z;
        m2 += z * z;
        m4 += z * z * z * z;
    }
    EXPECT_NEAR(m1 / n, 0.0, 0.01);
    EXPECT_NEAR(m2 / n, 1.0, 0.01);
    EXPECT_NEAR(m4 / n, 3.0, 0.03);
}

TEST(Parallel, MapIsIndependentOfWorkerCount) {
    auto fn = [](std::size_t i) {
        Philox p(5, i);
        return p.normal();
    };
    const auto one = parallel_map<double>(1001, 1, fn);
    for (int w : {2, 3, 8}) EXPECT_EQ(parallel_map<double>(1001, w, fn), one);
}

TEST(Parallel, ExceptionsPropagate) {
    auto fn = [](std::size_t i) -> double {
        if (i == 17) throw std::runtime_error("boom");
        return 0.0;
    };
    EXPECT_THROW(parallel_map<double>(100, 4, fn), std::runtime_error);
}

TEST(Parallel, PairwiseSumIsAccurate) {
    std::vector<double> v(100000, 0.1);
    EXPECT_NEAR(pairwise_sum(v), 10000.0, 1e-9);
    EXPECT_EQ(pairwise_sum(std::vector<double>{}), 0.0);
}
