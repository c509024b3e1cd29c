#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "lel/rd_solver.hpp"
#include "oracles.hpp"

using lel::DistortionMeasure;
using lel::Pmf;

namespace {

void expect_valid_point(const lel::RdPoint& p, const Pmf& source) {
    EXPECT_GE(p.rate, 0.0);
    EXPECT_LE(p.rate, lel::entropy(source) + 1e-9);
    for (std::size_t x = 0; x < p.channel.input_size(); ++x) {
        double s = 0.0;
        for (const double v : p.channel.row(x)) {
            EXPECT_GE(v, 0.0);
            s += v;
        }
        EXPECT_NEAR(s, 1.0, 1e-12);
    }
}

}  // namespace

TEST(DistortionMeasure, RecordsMaximum) {
    const DistortionMeasure d({{0, 2.5}, {1, 0}});
    EXPECT_EQ(d.d_max(), 2.5);
    EXPECT_EQ(DistortionMeasure::hamming(3).d_max(), 1.0);
    EXPECT_THROW(DistortionMeasure({{0, -1}, {1, 0}}), lel::ValidationError);
}

TEST(BlahutArimoto, ZeroSlopePicksMinimumExpectedDistortionOutput) {
    const Pmf src({0.5, 0.3, 0.2});
    // expected distortions per output: y0 = 0.3+0.2 = 0.5, y1 = 0.5+0.2 = 0.7, y2 = 0.8 -> y0
    const auto p = lel::blahut_arimoto(src, DistortionMeasure::hamming(3), 0.0);
    EXPECT_EQ(p.rate, 0.0);
    EXPECT_NEAR(p.distortion, 0.5, 1e-15);
    for (std::size_t x = 0; x < 3; ++x) EXPECT_EQ(p.channel(x, 0), 1.0);
    EXPECT_TRUE(p.converged);

    // tie between outputs 0 and 1: the lower index wins
    const auto tie = lel::blahut_arimoto(Pmf::uniform(2), DistortionMeasure::hamming(2), 0.0);
    EXPECT_EQ(tie.channel(0, 0), 1.0);
    EXPECT_EQ(tie.channel(1, 0), 1.0);
}

TEST(BlahutArimoto, BinaryHammingMatchesClosedForm) {
    // For the uniform binary source under Hamming distortion the optimal channel is a BSC
    // with crossover D = 1 / (1 + e^s).
    const double target = 0.11;
    const double slope = std::log((1.0 - target) / target);
    const auto p = lel::blahut_arimoto(Pmf::uniform(2), DistortionMeasure::hamming(2), slope);
    EXPECT_NEAR(p.distortion, 0.11, 1e-12);
    EXPECT_NEAR(p.rate, 1.0 - oracle::h2(0.11), 1e-9);
    EXPECT_NEAR(p.rate, 0.50009, 1e-5);
    EXPECT_TRUE(p.converged);
}

TEST(BlahutArimoto, LargeSlopeApproachesSourceEntropy) {
    const Pmf src({0.5, 0.25, 0.125, 0.125});
    const auto d = DistortionMeasure::hamming(4);
    const auto p = lel::blahut_arimoto(src, d, 60.0);
    EXPECT_LT(p.distortion, 1e-20);
    EXPECT_NEAR(p.rate, lel::entropy(src), 1e-9);
    const auto inf = lel::blahut_arimoto(src, d, std::numeric_limits<double>::infinity());
    EXPECT_EQ(inf.distortion, 0.0);
    EXPECT_NEAR(inf.rate, 1.75, 1e-9);
}

TEST(BlahutArimoto, RejectsNegativeSlopeAndShapeMismatch) {
    EXPECT_THROW(lel::blahut_arimoto(Pmf::uniform(2), DistortionMeasure::hamming(2), -1.0),
                 lel::ValidationError);
    EXPECT_THROW(lel::blahut_arimoto(Pmf::uniform(3), DistortionMeasure::hamming(2), 1.0),
                 lel::ValidationError);
}

TEST(BlahutArimoto, ReportsNonConvergence) {
    const Pmf src({0.7, 0.2, 0.1});
    const DistortionMeasure d({{0, 1, 3}, {2, 0, 1}, {1, 4, 0}});
    const auto p = lel::blahut_arimoto(src, d, 2.0, 1e-15, 3);
    EXPECT_FALSE(p.converged);
    EXPECT_EQ(p.iterations, 3u);
    expect_valid_point(p, src);
}

TEST(BlahutArimoto, LagrangianNonIncreasingPerIteration) {
    std::mt19937_64 g(5);
    for (int trial = 0; trial < 40; ++trial) {
        const std::size_t kx = 2 + g() % 4;
        const std::size_t ky = 2 + g() % 4;
        const Pmf src(oracle::random_pmf(g, kx));
        std::vector<double> table(kx * ky);
        for (auto& v : table) v = static_cast<double>(g() % 1000) / 250.0;
        const DistortionMeasure d(kx, ky, table);
        const double slope = 0.1 + static_cast<double>(g() % 100) / 10.0;

        std::vector<double> objective;
        lel::BlahutArimotoOptions opts;
        opts.observer = [&](std::size_t, double f) { objective.push_back(f); };
        const auto p = lel::blahut_arimoto(src, d, slope, opts);
        ASSERT_GE(objective.size(), 2u);
        for (std::size_t i = 1; i < objective.size(); ++i) {
            EXPECT_LE(objective[i], objective[i - 1] + 1e-12) << "iteration " << i;
        }
        expect_valid_point(p, src);
    }
}

TEST(BlahutArimoto, CurveMonotoneInSlope) {
    const Pmf src({0.6, 0.3, 0.1});
    const DistortionMeasure d({{0, 1, 2}, {1, 0, 1}, {2, 1, 0}});
    lel::RdPoint prev = lel::blahut_arimoto(src, d, 0.0);
    for (double s = 0.25; s < 20.0; s *= 1.5) {
        const auto p = lel::blahut_arimoto(src, d, s);
        EXPECT_LE(p.distortion, prev.distortion + 1e-9);
        EXPECT_GE(p.rate, prev.rate - 1e-9);
        prev = p;
    }
}

TEST(RdPointAtDistortion, BinaryHammingExamples) {
    const auto d = DistortionMeasure::hamming(2);
    const auto p = lel::rd_point_at_distortion(Pmf::uniform(2), d, 0.2);
    EXPECT_NEAR(p.rate, 1.0 - oracle::h2(0.2), 1e-5);
    EXPECT_NEAR(p.rate, 0.27807, 1e-5);
    EXPECT_LE(p.distortion, 0.2);
    EXPECT_LT(0.2 - p.distortion, 1e-6);

    const auto zero = lel::rd_point_at_distortion(Pmf::uniform(2), d, 0.6);
    EXPECT_EQ(zero.rate, 0.0);
    EXPECT_THROW(lel::rd_point_at_distortion(Pmf::uniform(2), d, -0.1), lel::ValidationError);
}

TEST(RdPointAtDistortion, LosslessLimitIsSourceEntropy) {
    const Pmf src({0.4, 0.35, 0.25});
    // zero in every row, not necessarily on the diagonal
    const DistortionMeasure d({{1, 0, 2}, {0, 3, 1}, {2, 2, 0}});
    const auto p = lel::rd_point_at_distortion(src, d, 0.0);
    EXPECT_EQ(p.distortion, 0.0);
    EXPECT_NEAR(p.rate, lel::entropy(src), 1e-9);
}

TEST(RdPointAtDistortion, MatchesBinaryGridSearch) {
    struct Case {
        std::vector<double> px;
        std::vector<std::vector<double>> d;
    };
    const std::vector<Case> cases{
        {{0.5, 0.5}, {{0, 1}, {1, 0}}},
        {{0.3, 0.7}, {{0, 1}, {1, 0}}},
        {{0.6, 0.4}, {{0, 2}, {1, 0}}},
        {{0.2, 0.8}, {{0.5, 1.5}, {1, 0.25}}},
    };
    for (const auto& c : cases) {
        const Pmf src(c.px);
        const DistortionMeasure d(c.d);
        const auto [lo, hi] = lel::distortion_range(src, d);
        for (int i = 1; i <= 4; ++i) {
            const double target = lo + (hi - lo) * i / 5.0;
            const auto p = lel::rd_point_at_distortion(src, d, target);
            EXPECT_NEAR(p.rate, oracle::binary_rd_grid(c.px, c.d, target), 1e-3)
                << "px0=" << c.px[0] << " target=" << target;
            EXPECT_LE(p.distortion, target);
            expect_valid_point(p, src);
        }
    }
}

TEST(RdPointAtDistortion, LinearSegmentUsesChannelMixture) {
    // Erasure-like reproduction: symbol 2 costs 0.5 and crossovers are prohibitively
    // expensive, so R(D) = 1 - 2D is linear and D(s) jumps at a single slope.
    const Pmf src({0.5, 0.5});
    const DistortionMeasure d({{0, 100, 0.5}, {100, 0, 0.5}});
    for (const double target : {0.1, 0.25, 0.4}) {
        const auto p = lel::rd_point_at_distortion(src, d, target);
        EXPECT_LE(p.distortion, target);
        EXPECT_NEAR(p.distortion, target, 1e-6);
        EXPECT_NEAR(p.rate, 1.0 - 2.0 * target, 1e-3);
        expect_valid_point(p, src);
    }
}
