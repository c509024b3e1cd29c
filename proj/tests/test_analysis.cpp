#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "lel/analysis.hpp"
#include "oracles.hpp"

using lel::Channel;
using lel::Codebook;
using lel::Pmf;

namespace {

constexpr double kSoftCoverAnchor = 0.2248231397692857;

Codebook explicit_codebook(std::size_t n, std::vector<lel::Symbol> words, std::size_t ky = 2) {
    Codebook cb;
    cb.n = n;
    cb.alphabet_size = ky;
    cb.words = std::move(words);
    cb.rate = std::log2(static_cast<double>(cb.size())) / static_cast<double>(n);
    return cb;
}

std::vector<std::vector<double>> rows_of(const Channel& ch) {
    std::vector<std::vector<double>> r(ch.input_size());
    for (std::size_t a = 0; a < ch.input_size(); ++a) r[a].assign(ch.row(a).begin(), ch.row(a).end());
    return r;
}

}  // namespace

TEST(InducedMarginal, Examples) {
    const auto cb = explicit_codebook(3, {1, 0, 1});
    const auto point = lel::induced_marginal(cb, Channel::identity(2));
    EXPECT_EQ(point.at(lel::Sequence{1, 0, 1}), 1.0);

    const Pmf q({0.3, 0.7});
    const auto random_cb = lel::generate_codebook(Pmf::uniform(2), 4, 0.5, 3);
    const auto flat = lel::induced_marginal(random_cb, Channel::constant(2, q));
    const auto prod = lel::product_extension(q, 4);
    for (std::size_t i = 0; i < prod.size(); ++i) EXPECT_NEAR(flat[i], prod[i], 1e-15);

    const auto half = lel::induced_marginal(explicit_codebook(1, {0, 1}), Channel::bsc(0.25));
    EXPECT_NEAR(half[0], 0.5, 1e-15);
    EXPECT_NEAR(half[1], 0.5, 1e-15);
}

TEST(InducedMarginal, MatchesDirectSummation) {
    std::mt19937_64 g(21);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t kx = 2 + g() % 2, ky = 2 + g() % 2;
        const Channel w(oracle::random_channel(g, ky, kx, 0.0));
        const auto cb = oracle::random_codebook(g, 1 + g() % 5, 1 + g() % 9, ky);
        const auto fast = lel::induced_marginal(cb, w);
        const auto slow = oracle::induced_by_summation(cb, rows_of(w));
        for (std::size_t i = 0; i < slow.size(); ++i) EXPECT_NEAR(fast[i], slow[i], 1e-15);
    }
}

TEST(InducedMarginal, CapExceededNamesTheShape) {
    ::setenv("LEL_ENUM_CAP", "1000", 1);
    try {
        lel::induced_marginal(explicit_codebook(10, std::vector<lel::Symbol>(10, 0)), Channel::bsc(0.1));
        ADD_FAILURE() << "expected CapExceeded";
    } catch (const lel::CapExceeded& e) {
        EXPECT_NE(std::string(e.what()).find("n=10, alphabet=2"), std::string::npos);
    }
    ::unsetenv("LEL_ENUM_CAP");
}

TEST(SoftCoverTv, Examples) {
    const Pmf px({0.35, 0.65});
    const auto cb = lel::generate_codebook(Pmf::uniform(3), 5, 0.8, 4);
    EXPECT_NEAR(lel::soft_cover_tv(cb, Channel::constant(3, px), px), 0.0, 1e-15);

    EXPECT_NEAR(lel::soft_cover_tv(explicit_codebook(1, {1}), Channel::identity(2), Pmf::uniform(2)),
                0.5, 1e-15);
}

TEST(SoftCoverTv, RegressionAnchor) {
    // n = 8, R = 0.9 (M = 148), uniform P_Y, BSC(0.11) test channel, seed 1. Frozen from the
    // direct-summation oracle below; the library must keep reproducing it.
    const auto cb = lel::generate_codebook(Pmf::uniform(2), 8, 0.9, 1);
    ASSERT_EQ(cb.size(), 148u);
    const auto slow = oracle::induced_by_summation(cb, rows_of(Channel::bsc(0.11)));
    double l1 = 0.0;
    for (const double v : slow) l1 += std::abs(v - 1.0 / 256.0);
    const double tv = lel::soft_cover_tv(cb, Channel::bsc(0.11), Pmf::uniform(2));
    EXPECT_NEAR(tv, 0.5 * l1, 1e-14);
    EXPECT_NEAR(tv, kSoftCoverAnchor, 1e-12);
}

TEST(ExpectedSoftCoverTv, Examples) {
    const Pmf px({0.4, 0.6});
    const auto flat = lel::expected_soft_cover_tv(Pmf::uniform(2), Channel::constant(2, px), px, 4,
                                                  0.5, 5, 10);
    EXPECT_NEAR(flat.tv_mean, 0.0, 1e-15);
    EXPECT_NEAR(flat.tv_stderr, 0.0, 1e-15);

    const auto point = lel::expected_soft_cover_tv(Pmf::uniform(2), Channel::identity(2),
                                                   Pmf::uniform(2), 1, 0.0, 7, 3);
    EXPECT_EQ(point.tv_mean, 0.5);
    EXPECT_EQ(point.tv_stderr, 0.0);

    const auto a = lel::expected_soft_cover_tv(Pmf::uniform(2), Channel::bsc(0.11), Pmf::uniform(2),
                                               6, 0.7, 6, 99);
    const auto b = lel::expected_soft_cover_tv(Pmf::uniform(2), Channel::bsc(0.11), Pmf::uniform(2),
                                               6, 0.7, 6, 99, 3);
    EXPECT_EQ(a.tv, b.tv);
    EXPECT_EQ(a.tv_mean, b.tv_mean);
    EXPECT_EQ(a.tv_stderr, b.tv_stderr);
    EXPECT_EQ(a.trial_seeds, b.trial_seeds);
    EXPECT_EQ(a.trial_seeds[2], lel::derive_seed(99, 2));

    EXPECT_THROW(lel::expected_soft_cover_tv(Pmf::uniform(2), Channel::bsc(0.1), Pmf::uniform(2), 2,
                                             0.5, 1, 0),
                 lel::ValidationError);
}

TEST(IdealJointQ, Examples) {
    const auto single = explicit_codebook(2, {1, 0});
    const auto q1 = lel::ideal_joint_q(single, Channel::bsc(0.2));
    EXPECT_NEAR(q1(0, 0), 0.2 * 0.8, 1e-15);  // x = 00
    EXPECT_NEAR(q1(2, 0), 0.8 * 0.8, 1e-15);  // x = 10

    const auto q = lel::ideal_joint_q(explicit_codebook(1, {0, 1}), Channel::bsc(0.25));
    EXPECT_NEAR(q(0, 0), 0.375, 1e-15);
    EXPECT_NEAR(q(0, 1), 0.125, 1e-15);
    EXPECT_NEAR(q(1, 0), 0.125, 1e-15);
    EXPECT_NEAR(q(1, 1), 0.375, 1e-15);

    std::mt19937_64 g(4);
    for (int trial = 0; trial < 10; ++trial) {
        const Channel w(oracle::random_channel(g, 3, 2));
        const auto cb = oracle::random_codebook(g, 1 + g() % 4, 1 + g() % 6, 3);
        const auto marg = lel::ideal_joint_q(cb, w).row_marginal();
        const auto ind = lel::induced_marginal(cb, w);
        for (std::size_t i = 0; i < ind.size(); ++i) EXPECT_NEAR(marg[i], ind[i], 1e-12);
    }
}

TEST(EncoderJointP, Examples) {
    const Pmf px({0.3, 0.7});
    std::mt19937_64 g(6);
    const auto cb = oracle::random_codebook(g, 3, 5, 2);
    const auto p = lel::encoder_joint_p(cb, Channel(oracle::random_channel(g, 2, 2)), px);
    const auto marg = p.row_marginal();
    const auto prod = lel::product_extension(px, 3);
    for (std::size_t i = 0; i < prod.size(); ++i) EXPECT_NEAR(marg[i], prod[i], 1e-12);

    const auto one = lel::encoder_joint_p(explicit_codebook(2, {0, 1}), Channel::bsc(0.1), px);
    const auto prod2 = lel::product_extension(px, 2);
    for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(one(i, 0), prod2[i], 1e-15);

    const auto sym = lel::encoder_joint_p(explicit_codebook(1, {0, 1}), Channel::bsc(0.25),
                                          Pmf::uniform(2));
    EXPECT_NEAR(sym(0, 0), 0.375, 1e-15);
    EXPECT_NEAR(sym(0, 1), 0.125, 1e-15);
    EXPECT_NEAR(sym(1, 0), 0.125, 1e-15);
    EXPECT_NEAR(sym(1, 1), 0.375, 1e-15);
}

TEST(EncoderJointP, AllZeroLikelihoodOnReachableInput) {
    EXPECT_THROW(lel::encoder_joint_p(explicit_codebook(2, {0, 0}), Channel::identity(2), Pmf::uniform(2)),
                 lel::AllZeroLikelihood);
    // unreachable inputs are skipped
    const auto p = lel::encoder_joint_p(explicit_codebook(2, {0, 0}), Channel::identity(2),
                                        Pmf::point_mass(2, 0));
    EXPECT_EQ(p(0, 0), 1.0);
}

TEST(ProofCheck, IdentitiesAndBoundOnRandomInstances) {
    std::mt19937_64 g(31);
    for (int trial = 0; trial < 60; ++trial) {
        const std::size_t kx = 2 + g() % 2, ky = 2 + g() % 2;
        const Pmf px(oracle::random_pmf(g, kx));
        const Channel w(oracle::random_channel(g, ky, kx));
        std::vector<double> table(kx * ky);
        for (auto& v : table) v = static_cast<double>(g() % 100) / 25.0;
        const lel::DistortionMeasure d(kx, ky, table);
        const auto cb = oracle::random_codebook(g, 1 + g() % 4, 1 + g() % 10, ky);
        const auto r = lel::proof_check(cb, w, px, d);

        EXPECT_LT(r.conditional_max_gap, 1e-12);
        EXPECT_NEAR(r.tv_joint, r.tv_marginal, 1e-12);
        EXPECT_LE(r.empirical_distortion, r.distortion_bound_rhs + 1e-12);
        EXPECT_LE(r.empirical_distortion, r.distortion_bound_rhs_tight + 1e-12);
        EXPECT_GE(r.tv_joint, 0.0);
        EXPECT_LE(r.tv_joint, 1.0);
        EXPECT_EQ(r.repeated_codewords, cb.has_repeated_codewords());

        // cross-check against the standalone joints
        const auto p = lel::encoder_joint_p(cb, w, px);
        const auto q = lel::ideal_joint_q(cb, w);
        EXPECT_NEAR(r.tv_joint, lel::total_variation(p, q), 1e-14);
        EXPECT_NEAR(r.tv_marginal,
                    lel::total_variation(lel::product_extension(px, cb.n), lel::induced_marginal(cb, w)),
                    1e-14);
    }
}

TEST(ProofCheck, MismatchedDistortionShape) {
    EXPECT_THROW(lel::proof_check(explicit_codebook(1, {0, 1}), Channel::bsc(0.2), Pmf::uniform(2),
                                  lel::DistortionMeasure::hamming(3)),
                 lel::ValidationError);
}

TEST(CodebookExpectationQ, EqualsIidJoint) {
    const Pmf py({0.3, 0.7});
    const Channel w({{0.9, 0.1}, {0.25, 0.75}});
    for (const auto& [n, m] : {std::pair{1, 1}, {1, 2}, {2, 1}, {1, 3}, {2, 2}, {3, 2}}) {
        const auto e = lel::codebook_expectation_q(py, w, n, m);
        const auto oracle_joint = oracle::iid_pair_joint({0.3, 0.7}, rows_of(w), n);
        ASSERT_EQ(e.probs().size(), oracle_joint.size());
        for (std::size_t i = 0; i < oracle_joint.size(); ++i) {
            EXPECT_NEAR(e.probs()[i], oracle_joint[i], 1e-12) << "n=" << n << " M=" << m;
        }
    }
    // M = 1 is the reversed joint P_Y(y) W(x|y)
    const auto one = lel::codebook_expectation_q(py, w, 1, 1);
    const auto j = lel::joint_from(py, w);
    for (std::size_t x = 0; x < 2; ++x)
        for (std::size_t y = 0; y < 2; ++y) EXPECT_NEAR(one(x, y), j(y, x), 1e-15);

    const auto m3 = lel::codebook_expectation_q(py, w, 2, 3);
    const auto m1 = lel::codebook_expectation_q(py, w, 2, 1);
    for (std::size_t i = 0; i < m1.probs().size(); ++i) EXPECT_NEAR(m3.probs()[i], m1.probs()[i], 1e-12);

    EXPECT_THROW(lel::codebook_expectation_q(py, w, 6, 6), lel::CapExceeded);
}

TEST(DistortionExperiment, IdentityChannelCoverage) {
    const Pmf px = Pmf::uniform(2);
    const auto ham = lel::DistortionMeasure::hamming(2);
    const auto r = lel::distortion_experiment(px, Pmf::uniform(2), Channel::identity(2), ham, 1, 3.0,
                                              200, 5);
    EXPECT_EQ(r.codewords, 8u);
    // A source symbol missing from all 8 codewords has probability 2^-8 per trial.
    EXPECT_EQ(r.mean, 0.0);
    EXPECT_LE(r.failures, 5u);
    std::size_t counted = 0;
    for (const auto& t : r.trials) counted += t.all_zero_likelihood;
    EXPECT_EQ(counted, r.failures);

    const auto narrow = lel::distortion_experiment(px, Pmf::uniform(2), Channel::identity(2), ham, 1,
                                                   0.0, 400, 5);
    EXPECT_GT(narrow.failures, 100u);
    EXPECT_EQ(narrow.mean, 0.0);
}

TEST(DistortionExperiment, ZeroRateMatchesClosedFormAverage) {
    // M = 1: the reproduction is a single random codeword independent of the source, so
    // E[d] = sum_{x,y} px(x) py(y) d(x, y).
    const Pmf px({0.2, 0.5, 0.3});
    const Pmf py({0.6, 0.4});
    const lel::DistortionMeasure d({{0, 1}, {2, 0.5}, {1, 3}});
    double expected = 0.0;
    for (std::size_t x = 0; x < 3; ++x)
        for (std::size_t y = 0; y < 2; ++y) expected += px[x] * py[y] * d(x, y);
    const Channel w({{0.3, 0.3, 0.4}, {0.1, 0.6, 0.3}});
    const auto r = lel::distortion_experiment(px, py, w, d, 3, 0.0, 4000, 17);
    EXPECT_EQ(r.failures, 0u);
    EXPECT_NEAR(r.mean, expected, 4 * r.standard_error);
}

TEST(DistortionExperiment, MonteCarloAgreesWithExactEncoderDistortion) {
    // Fixed codebook: each trial is an independent draw of d(X^n, decode(f(X^n))) whose
    // exact mean is E_P[d] from proof_check.
    std::mt19937_64 g(77);
    for (int trial = 0; trial < 5; ++trial) {
        const Pmf px(oracle::random_pmf(g, 2));
        const Channel w(oracle::random_channel(g, 2, 2));
        const auto cb = oracle::random_codebook(g, 2 + g() % 3, 2 + g() % 6, 2);
        const auto ham = lel::DistortionMeasure::hamming(2);
        const double exact = lel::proof_check(cb, w, px, ham).empirical_distortion;
        const auto r = lel::distortion_experiment(px, lel::EncoderSpec(w, cb), ham, 20000, g());
        EXPECT_NEAR(r.mean, exact, 4 * r.standard_error);
    }

    // Fresh codebooks: the target is E_C E_P[d], obtained by enumerating all 16 codebooks
    // for n = 2, M = 2.
    const Pmf px({0.4, 0.6});
    const Pmf py({0.45, 0.55});
    const Channel w({{0.8, 0.2}, {0.3, 0.7}});
    const auto ham = lel::DistortionMeasure::hamming(2);
    double exact = 0.0;
    for (std::uint64_t c = 0; c < 16; ++c) {
        const lel::Sequence words = lel::sequence_at(c, 2, 4);
        double weight = 1.0;
        for (const auto s : words) weight *= py[s];
        exact += weight * lel::proof_check(explicit_codebook(2, words), w, px, ham).empirical_distortion;
    }
    const auto r = lel::distortion_experiment(px, py, w, ham, 2, 0.5, 40000, 3);
    ASSERT_EQ(r.codewords, 2u);
    EXPECT_NEAR(r.mean, exact, 4 * r.standard_error);
}

TEST(DistortionExperiment, DeterministicAcrossJobCounts) {
    const auto ham = lel::DistortionMeasure::hamming(2);
    const auto a = lel::distortion_experiment(Pmf::uniform(2), Pmf::uniform(2), Channel::bsc(0.2), ham,
                                              8, 0.5, 50, 1234, 1);
    const auto b = lel::distortion_experiment(Pmf::uniform(2), Pmf::uniform(2), Channel::bsc(0.2), ham,
                                              8, 0.5, 50, 1234, 4);
    ASSERT_EQ(a.trials.size(), b.trials.size());
    for (std::size_t i = 0; i < a.trials.size(); ++i) {
        EXPECT_EQ(a.trials[i].seed, b.trials[i].seed);
        EXPECT_EQ(a.trials[i].index, b.trials[i].index);
        EXPECT_EQ(a.trials[i].distortion, b.trials[i].distortion);
    }
    EXPECT_EQ(a.mean, b.mean);
    EXPECT_EQ(a.standard_error, b.standard_error);
}
