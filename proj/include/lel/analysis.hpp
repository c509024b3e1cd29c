#pragma once
// analysis.hpp - exact and Monte Carlo instrumentation of soft covering and of the
// likelihood-encoder achievability argument.
//
// Joint distributions of the coding system are tabulated over (x^n, m) rather than
// (x^n, y^n): y^n = decode(m) is a deterministic function of m. When two indices carry
// the same codeword the (x^n, m) table is a refinement, and TV over it can only be
// larger than TV over (x^n, y^n); reports carry a repeated_codewords flag for that case.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>
#include <tuple>
#include <vector>

#include "lel/codec.hpp"
#include "lel/error.hpp"
#include "lel/finite_prob.hpp"
#include "lel/parallel.hpp"
#include "lel/random.hpp"
#include "lel/rd_solver.hpp"

namespace lel {

struct SoftCoverReport {
    std::size_t n = 0;
    double rate = 0.0;
    std::uint64_t codewords = 0;  // M
    std::size_t trials = 0;
    std::uint64_t master_seed = 0;
    double tv_mean = 0.0;
    double tv_stderr = 0.0;
    std::vector<std::uint64_t> trial_seeds;
    std::vector<double> tv;  // per trial, in trial order
};

struct ProofCheckReport {
    double tv_joint = 0.0;             // TV(P, Q) over (x^n, m)
    double tv_marginal = 0.0;          // TV(P, Q) over x^n
    double conditional_max_gap = 0.0;  // max |P(m|x^n) - Q(m|x^n)| over P(x^n) > 0
    double expected_distortion_q = 0.0;
    /// E_Q[d] + 2 d_max TV(P, Q), the constant used in the achievability argument.
    double distortion_bound_rhs = 0.0;
    /// E_Q[d] + d_max TV(P, Q), which also holds for per-letter distortions in [0, d_max].
    double distortion_bound_rhs_tight = 0.0;
    double empirical_distortion = 0.0;  // E_P[d], exact
    bool repeated_codewords = false;
};

struct DistortionTrial {
    std::size_t trial = 0;
    std::uint64_t seed = 0;
    bool all_zero_likelihood = false;
    std::size_t index = 0;  // encoded codeword index (undefined on failure)
    double distortion = std::numeric_limits<double>::quiet_NaN();
};

struct DistortionReport {
    std::size_t n = 0;
    double rate = 0.0;
    std::uint64_t codewords = 0;
    std::uint64_t master_seed = 0;
    std::vector<DistortionTrial> trials;
    std::size_t failures = 0;  // trials with AllZeroLikelihood, excluded from the mean
    double mean = std::numeric_limits<double>::quiet_NaN();
    double standard_error = std::numeric_limits<double>::quiet_NaN();
};

namespace detail {

inline void check_channel_codebook(const Codebook& cb, const Channel& test_channel) {
    if (test_channel.input_size() != cb.alphabet_size) {
        throw ValidationError("test channel input size " +
                              std::to_string(test_channel.input_size()) +
                              " != codebook alphabet size " + std::to_string(cb.alphabet_size));
    }
}

/// prod_t W(y_t, x_t) for every x^n, written into `out` (size k^n).
inline void sequence_likelihoods(std::span<const Symbol> y, const Channel& w,
                                 std::vector<double>& out, std::vector<double>& scratch) {
    const std::size_t k = w.output_size();
    out.assign(1, 1.0);
    for (const Symbol yt : y) {
        const auto row = w.row(yt);
        scratch.resize(out.size() * k);
        for (std::size_t i = 0; i < out.size(); ++i) {
            for (std::size_t a = 0; a < k; ++a) scratch[i * k + a] = out[i] * row[a];
        }
        out.swap(scratch);
    }
}

/// Exact likelihood table L(x^n, m), row-major in x^n.
inline std::vector<double> likelihood_table(const Codebook& cb, const Channel& w,
                                            std::uint64_t rows) {
    const std::size_t m_count = cb.size();
    std::vector<double> table(static_cast<std::size_t>(rows) * m_count);
    std::vector<double> col;
    std::vector<double> scratch;
    for (std::size_t m = 0; m < m_count; ++m) {
        sequence_likelihoods(cb.word(m), w, col, scratch);
        for (std::size_t x = 0; x < rows; ++x) table[x * m_count + m] = col[x];
    }
    return table;
}

inline std::uint64_t joint_rows(const Codebook& cb, const Channel& w) {
    check_channel_codebook(cb, w);
    const std::uint64_t rows = checked_sequence_count(w.output_size(), cb.n);
    const std::uint64_t cap = enumeration_cap();
    if (cb.size() != 0 && rows > cap / cb.size()) {
        throw CapExceeded("joint table over (x^n, m) for (n=" + std::to_string(cb.n) +
                          ", alphabet=" + std::to_string(w.output_size()) + ", M=" +
                          std::to_string(cb.size()) + ") exceeds enumeration cap " +
                          std::to_string(cap));
    }
    return rows;
}

inline std::pair<double, double> mean_and_stderr(std::span<const double> v) {
    if (v.empty()) {
        return {std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN()};
    }
    double sum = 0.0;
    for (const double x : v) sum += x;
    const double mean = sum / static_cast<double>(v.size());
    if (v.size() < 2) return {mean, std::numeric_limits<double>::quiet_NaN()};
    double ss = 0.0;
    for (const double x : v) ss += (x - mean) * (x - mean);
    const double sd = std::sqrt(ss / static_cast<double>(v.size() - 1));
    return {mean, sd / std::sqrt(static_cast<double>(v.size()))};
}

/// Encoder conditionals P(m | x^n) from the log-domain encoder, plus the i.i.d. source
/// probabilities. Rows with zero source probability are left at zero.
struct EncoderTable {
    std::vector<double> source;       // prod_t px(x_t), per x^n
    std::vector<double> conditional;  // P(m | x^n), row-major
};

inline EncoderTable encoder_table(const Codebook& cb, const Channel& w, const Pmf& px,
                                  std::uint64_t rows) {
    if (px.size() != w.output_size()) {
        throw ValidationError("source alphabet " + std::to_string(px.size()) +
                              " != test channel output size " + std::to_string(w.output_size()));
    }
    const EncoderSpec spec(w, cb);
    const std::size_t m_count = cb.size();
    EncoderTable t;
    const SequenceDist source = product_extension(px, cb.n);
    t.source.assign(source.probs().begin(), source.probs().end());
    t.conditional.assign(static_cast<std::size_t>(rows) * m_count, 0.0);
    for (std::uint64_t x = 0; x < rows; ++x) {
        if (t.source[x] <= 0.0) continue;
        const Sequence seq = sequence_at(x, px.size(), cb.n);
        const Pmf post = encoder_posterior(seq, spec);
        std::copy(post.probs().begin(), post.probs().end(), t.conditional.begin() + x * m_count);
    }
    return t;
}

inline std::vector<double> block_distortions(const Codebook& cb, const DistortionMeasure& d,
                                             std::size_t source_alphabet, std::uint64_t rows) {
    const std::size_t m_count = cb.size();
    std::vector<double> out(static_cast<std::size_t>(rows) * m_count);
    for (std::uint64_t x = 0; x < rows; ++x) {
        const Sequence seq = sequence_at(x, source_alphabet, cb.n);
        for (std::size_t m = 0; m < m_count; ++m) {
            out[x * m_count + m] = avg_distortion(seq, cb.word(m), d);
        }
    }
    return out;
}

inline void summarize(DistortionReport& r) {
    std::vector<double> ok;
    for (const auto& row : r.trials) {
        if (row.all_zero_likelihood) {
            ++r.failures;
        } else {
            ok.push_back(row.distortion);
        }
    }
    std::tie(r.mean, r.standard_error) = mean_and_stderr(ok);
}

}  // namespace detail

/// P_{X^n}(x^n) = (1/M) sum_m prod_t P_{X|Y}(x_t | y_t(m)).
inline SequenceDist induced_marginal(const Codebook& cb, const Channel& test_channel) {
    detail::check_channel_codebook(cb, test_channel);
    const std::uint64_t rows = checked_sequence_count(test_channel.output_size(), cb.n);
    std::vector<double> acc(rows, 0.0);
    std::vector<double> col;
    std::vector<double> scratch;
    for (std::size_t m = 0; m < cb.size(); ++m) {
        detail::sequence_likelihoods(cb.word(m), test_channel, col, scratch);
        for (std::size_t x = 0; x < rows; ++x) acc[x] += col[x];
    }
    const double inv_m = 1.0 / static_cast<double>(cb.size());
    for (auto& v : acc) v *= inv_m;
    return SequenceDist(test_channel.output_size(), cb.n, std::move(acc));
}

/// TV between the codebook-induced output distribution and the i.i.d. product of px.
inline double soft_cover_tv(const Codebook& cb, const Channel& test_channel, const Pmf& px) {
    return total_variation(induced_marginal(cb, test_channel), product_extension(px, cb.n));
}

/// Mean and standard error of soft_cover_tv over `trials` codebooks; codebook t is
/// generated from derive_seed(master_seed, t).
inline SoftCoverReport expected_soft_cover_tv(const Pmf& py, const Channel& test_channel,
                                              const Pmf& px, std::size_t n, double rate,
                                              std::size_t trials, std::uint64_t master_seed,
                                              std::size_t jobs = 1) {
    if (trials < 2) throw ValidationError("expected_soft_cover_tv: trials must be >= 2");
    SoftCoverReport r;
    r.n = n;
    r.rate = rate;
    r.codewords = codebook_size(n, rate);
    r.trials = trials;
    r.master_seed = master_seed;
    r.trial_seeds.resize(trials);
    r.tv.resize(trials);
    const SequenceDist target = product_extension(px, n);
    parallel_for(trials, jobs, [&](std::size_t t) {
        const std::uint64_t seed = derive_seed(master_seed, t);
        const Codebook cb = generate_codebook(py, n, rate, seed);
        r.trial_seeds[t] = seed;
        r.tv[t] = total_variation(induced_marginal(cb, test_channel), target);
    });
    std::tie(r.tv_mean, r.tv_stderr) = detail::mean_and_stderr(r.tv);
    return r;
}

/// Q(x^n, m) = (1/M) prod_t P_{X|Y}(x_t | y_t(m)).
inline SequenceJoint ideal_joint_q(const Codebook& cb, const Channel& test_channel) {
    const std::uint64_t rows = detail::joint_rows(cb, test_channel);
    std::vector<double> table = detail::likelihood_table(cb, test_channel, rows);
    const double inv_m = 1.0 / static_cast<double>(cb.size());
    for (auto& v : table) v *= inv_m;
    return SequenceJoint(test_channel.output_size(), cb.n, cb.size(), std::move(table));
}

/// P(x^n, m) = prod_t px(x_t) * P_{M|X^n}(m | x^n), the joint the coding system induces.
/// Throws AllZeroLikelihood if some positive-probability x^n cannot be encoded.
inline SequenceJoint encoder_joint_p(const Codebook& cb, const Channel& test_channel,
                                     const Pmf& px) {
    const std::uint64_t rows = detail::joint_rows(cb, test_channel);
    auto t = detail::encoder_table(cb, test_channel, px, rows);
    const std::size_t m_count = cb.size();
    for (std::uint64_t x = 0; x < rows; ++x) {
        for (std::size_t m = 0; m < m_count; ++m) t.conditional[x * m_count + m] *= t.source[x];
    }
    return SequenceJoint(px.size(), cb.n, m_count, std::move(t.conditional));
}

/// Evaluates every step of the P-versus-Q argument exactly for one codebook.
inline ProofCheckReport proof_check(const Codebook& cb, const Channel& test_channel,
                                    const Pmf& px, const DistortionMeasure& d) {
    const std::uint64_t rows = detail::joint_rows(cb, test_channel);
    if (d.size_x() != px.size() || d.size_y() != cb.alphabet_size) {
        throw ValidationError("distortion table shape does not match the alphabets");
    }
    const std::size_t m_count = cb.size();
    const auto lik = detail::likelihood_table(cb, test_channel, rows);
    const auto enc = detail::encoder_table(cb, test_channel, px, rows);
    const auto dist = detail::block_distortions(cb, d, px.size(), rows);
    const double inv_m = 1.0 / static_cast<double>(m_count);

    ProofCheckReport r;
    r.repeated_codewords = cb.has_repeated_codewords();
    double l1_joint = 0.0;
    double l1_marginal = 0.0;
    for (std::uint64_t x = 0; x < rows; ++x) {
        const std::size_t base = static_cast<std::size_t>(x) * m_count;
        double q_row = 0.0;
        for (std::size_t m = 0; m < m_count; ++m) q_row += lik[base + m];
        q_row *= inv_m;
        const double p_row = enc.source[x];
        l1_marginal += std::abs(p_row - q_row);
        for (std::size_t m = 0; m < m_count; ++m) {
            const double q = lik[base + m] * inv_m;
            const double p = p_row * enc.conditional[base + m];
            l1_joint += std::abs(p - q);
            r.expected_distortion_q += q * dist[base + m];
            r.empirical_distortion += p * dist[base + m];
            if (p_row > 0.0) {
                const double q_cond = q / q_row;
                r.conditional_max_gap =
                    std::max(r.conditional_max_gap, std::abs(enc.conditional[base + m] - q_cond));
            }
        }
    }
    r.tv_joint = std::clamp(0.5 * l1_joint, 0.0, 1.0);
    r.tv_marginal = std::clamp(0.5 * l1_marginal, 0.0, 1.0);
    r.distortion_bound_rhs = r.expected_distortion_q + 2.0 * d.d_max() * r.tv_joint;
    r.distortion_bound_rhs_tight = r.expected_distortion_q + d.d_max() * r.tv_joint;
    return r;
}

/// E_C Q(x^n, y^n), averaging Q over every codebook of M codewords drawn i.i.d. from py,
/// weighted by its probability. Rows are x^n, columns y^n (both lexicographic).
inline SequenceJoint codebook_expectation_q(const Pmf& py, const Channel& test_channel,
                                            std::size_t n, std::size_t m_count) {
    if (test_channel.input_size() != py.size()) {
        throw ValidationError("test channel input size != reproduction alphabet size");
    }
    if (n == 0 || m_count == 0) throw ValidationError("n and M must be >= 1");
    const std::size_t ky = py.size();
    const std::size_t kx = test_channel.output_size();
    const std::uint64_t books = checked_sequence_count(ky, n * m_count);
    const std::uint64_t rows = checked_sequence_count(kx, n);
    const std::uint64_t cols = checked_sequence_count(ky, n);
    if (rows > enumeration_cap() / cols) {
        throw CapExceeded("(x^n, y^n) table for (n=" + std::to_string(n) + ", alphabets=" +
                          std::to_string(kx) + "x" + std::to_string(ky) +
                          ") exceeds enumeration cap");
    }

    // lik[y * rows + x] = prod_t W(y_t, x_t)
    std::vector<double> lik(cols * rows);
    std::vector<double> col;
    std::vector<double> scratch;
    for (std::uint64_t y = 0; y < cols; ++y) {
        detail::sequence_likelihoods(sequence_at(y, ky, n), test_channel, col, scratch);
        std::copy(col.begin(), col.end(), lik.begin() + y * rows);
    }

    std::vector<double> acc(rows * cols, 0.0);
    const double inv_m = 1.0 / static_cast<double>(m_count);
    for (std::uint64_t c = 0; c < books; ++c) {
        const Sequence book = sequence_at(c, ky, n * m_count);
        double weight = 1.0;
        for (const Symbol s : book) weight *= py[s];
        if (weight == 0.0) continue;
        for (std::size_t m = 0; m < m_count; ++m) {
            const auto y = sequence_index(std::span<const Symbol>(book).subspan(m * n, n), ky);
            for (std::uint64_t x = 0; x < rows; ++x) {
                acc[x * cols + y] += weight * inv_m * lik[y * rows + x];
            }
        }
    }
    return SequenceJoint(kx, n, cols, std::move(acc));
}

/// Monte Carlo run of the full system: per trial a fresh codebook from py, a fresh
/// i.i.d. source sequence from px, likelihood encoding and lookup decoding. Trial t uses
/// the single stream Rng(derive_seed(master_seed, t)) in that order.
inline DistortionReport distortion_experiment(const Pmf& px, const Pmf& py,
                                              const Channel& test_channel,
                                              const DistortionMeasure& d, std::size_t n,
                                              double rate, std::size_t trials,
                                              std::uint64_t master_seed, std::size_t jobs = 1) {
    if (trials < 1) throw ValidationError("distortion_experiment: trials must be >= 1");
    if (test_channel.input_size() != py.size() || test_channel.output_size() != px.size() ||
        d.size_x() != px.size() || d.size_y() != py.size()) {
        throw ValidationError("distortion_experiment: alphabet sizes disagree");
    }
    DistortionReport r;
    r.n = n;
    r.rate = rate;
    r.codewords = codebook_size(n, rate);
    r.master_seed = master_seed;
    r.trials.resize(trials);
    parallel_for(trials, jobs, [&](std::size_t t) {
        DistortionTrial& row = r.trials[t];
        row.trial = t;
        row.seed = derive_seed(master_seed, t);
        Rng rng(row.seed);
        const EncoderSpec spec(test_channel, generate_codebook(py, n, rate, rng, row.seed));
        const Sequence x = rng.sample_sequence(px, n);
        try {
            row.index = likelihood_encode(x, spec, rng);
            row.distortion = avg_distortion(x, decode(row.index, spec.codebook()), d);
        } catch (const AllZeroLikelihood&) {
            row.all_zero_likelihood = true;
        }
    });
    detail::summarize(r);
    return r;
}

/// As above but with one fixed codebook; each trial draws only the source sequence and
/// the encoder's randomness.
inline DistortionReport distortion_experiment(const Pmf& px, const EncoderSpec& spec,
                                              const DistortionMeasure& d, std::size_t trials,
                                              std::uint64_t master_seed, std::size_t jobs = 1) {
    if (trials < 1) throw ValidationError("distortion_experiment: trials must be >= 1");
    if (spec.source_alphabet() != px.size() || d.size_x() != px.size() ||
        d.size_y() != spec.codebook().alphabet_size) {
        throw ValidationError("distortion_experiment: alphabet sizes disagree");
    }
    const Codebook& cb = spec.codebook();
    DistortionReport r;
    r.n = cb.n;
    r.rate = cb.rate;
    r.codewords = cb.size();
    r.master_seed = master_seed;
    r.trials.resize(trials);
    parallel_for(trials, jobs, [&](std::size_t t) {
        DistortionTrial& row = r.trials[t];
        row.trial = t;
        row.seed = derive_seed(master_seed, t);
        Rng rng(row.seed);
        const Sequence x = rng.sample_sequence(px, cb.n);
        try {
            row.index = likelihood_encode(x, spec, rng);
            row.distortion = avg_distortion(x, cb.word(row.index), d);
        } catch (const AllZeroLikelihood&) {
            row.all_zero_likelihood = true;
        }
    });
    detail::summarize(r);
    return r;
}

}  // namespace lel
