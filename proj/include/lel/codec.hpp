#pragma once
// codec.hpp - random codebooks, the likelihood encoder and the lookup decoder.
//
// Codeword indices are 0-based throughout: m in {0, ..., M-1}.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "lel/error.hpp"
#include "lel/finite_prob.hpp"
#include "lel/random.hpp"
#include "lel/rd_solver.hpp"

namespace lel {

/// M = ceil(2^{nR}). A product nR within 1e-9 of an integer is snapped to it first, so
/// that e.g. n = 10, R = 0.9 gives 512 and not 513.
inline std::uint64_t codebook_size(std::size_t n, double rate,
                                   std::uint64_t cap = enumeration_cap()) {
    if (!std::isfinite(rate) || rate < 0.0) {
        throw ValidationError("rate must be finite and >= 0");
    }
    double exponent = static_cast<double>(n) * rate;
    if (const double r = std::round(exponent); std::abs(exponent - r) < 1e-9) exponent = r;
    if (exponent >= 63.0 || std::ceil(std::exp2(exponent)) > static_cast<double>(cap)) {
        throw CapExceeded("codebook for (n=" + std::to_string(n) + ", R=" + std::to_string(rate) +
                          ") exceeds cap of " + std::to_string(cap) + " codewords");
    }
    return static_cast<std::uint64_t>(std::ceil(std::exp2(exponent)));
}

/// M x n table of reproduction symbols, row-major by codeword.
struct Codebook {
    std::size_t n = 0;
    double rate = 0.0;
    std::size_t alphabet_size = 0;  // |Y|
    std::uint64_t seed = 0;
    std::vector<Symbol> words;

    [[nodiscard]] std::size_t size() const noexcept { return n == 0 ? 0 : words.size() / n; }
    [[nodiscard]] std::span<const Symbol> word(std::size_t m) const {
        return std::span<const Symbol>(words).subspan(m * n, n);
    }
    /// True if two indices carry the same sequence.
    [[nodiscard]] bool has_repeated_codewords() const {
        std::vector<std::span<const Symbol>> rows;
        for (std::size_t m = 0; m < size(); ++m) rows.push_back(word(m));
        std::sort(rows.begin(), rows.end(), [](auto a, auto b) {
            return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
        });
        return std::adjacent_find(rows.begin(), rows.end(), [](auto a, auto b) {
                   return std::equal(a.begin(), a.end(), b.begin(), b.end());
               }) != rows.end();
    }

    friend bool operator==(const Codebook&, const Codebook&) = default;
};

/// Draws the codebook from `rng`, codeword by codeword, symbol by symbol. `seed` is only
/// recorded.
inline Codebook generate_codebook(const Pmf& py, std::size_t n, double rate, Rng& rng,
                                  std::uint64_t seed) {
    if (n == 0) throw ValidationError("blocklength must be >= 1");
    if (py.size() > kMaxAlphabet) throw ValidationError("reproduction alphabet too large");
    const std::uint64_t m = codebook_size(n, rate);
    Codebook cb{n, rate, py.size(), seed, {}};
    cb.words.resize(static_cast<std::size_t>(m) * n);
    for (auto& s : cb.words) s = rng.sample(py);
    return cb;
}

inline Codebook generate_codebook(const Pmf& py, std::size_t n, double rate, std::uint64_t seed) {
    Rng rng(seed);
    return generate_codebook(py, n, rate, rng, seed);
}

/// Test channel P_{X|Y} and the codebook it scores. Caches log P_{X|Y}.
class EncoderSpec {
public:
    EncoderSpec(Channel test_channel, Codebook codebook)
        : channel_(std::move(test_channel)), codebook_(std::move(codebook)) {
        if (channel_.input_size() != codebook_.alphabet_size) {
            throw ValidationError("test channel input size " +
                                  std::to_string(channel_.input_size()) +
                                  " != codebook alphabet size " +
                                  std::to_string(codebook_.alphabet_size));
        }
        log_lik_.resize(channel_.data().size());
        std::transform(channel_.data().begin(), channel_.data().end(), log_lik_.begin(),
                       [](double p) {
                           return p > 0.0 ? std::log(p) : -std::numeric_limits<double>::infinity();
                       });
    }

    [[nodiscard]] const Channel& test_channel() const noexcept { return channel_; }
    [[nodiscard]] const Codebook& codebook() const noexcept { return codebook_; }
    [[nodiscard]] std::size_t source_alphabet() const noexcept { return channel_.output_size(); }

    /// log P_{X|Y}(x | y).
    [[nodiscard]] double log_likelihood(Symbol y, Symbol x) const {
        return log_lik_[static_cast<std::size_t>(y) * channel_.output_size() + x];
    }

private:
    Channel channel_;
    Codebook codebook_;
    std::vector<double> log_lik_;
};

namespace detail {

inline void check_source_sequence(std::span<const Symbol> x, const EncoderSpec& spec) {
    if (x.size() != spec.codebook().n) {
        throw ValidationError("sequence length " + std::to_string(x.size()) +
                              " != codebook blocklength " + std::to_string(spec.codebook().n));
    }
    for (const Symbol s : x) {
        if (s >= spec.source_alphabet()) throw ValidationError("source symbol out of range");
    }
}

}  // namespace detail

/// sum_t log P_{X|Y}(x_t | y_t(m)) for every m, in index order.
inline std::vector<double> log_weights(std::span<const Symbol> x, const EncoderSpec& spec) {
    detail::check_source_sequence(x, spec);
    const Codebook& cb = spec.codebook();
    std::vector<double> w(cb.size());
    for (std::size_t m = 0; m < w.size(); ++m) {
        const auto y = cb.word(m);
        double acc = 0.0;
        for (std::size_t t = 0; t < cb.n; ++t) acc += spec.log_likelihood(y[t], x[t]);
        w[m] = acc;
    }
    return w;
}

/// Normalizes log-weights into a pmf after shifting by their maximum.
inline Pmf posterior_from_log_weights(std::span<const double> log_w) {
    const double mx = *std::max_element(log_w.begin(), log_w.end());
    if (mx == -std::numeric_limits<double>::infinity()) throw AllZeroLikelihood();
    std::vector<double> p(log_w.size());
    double z = 0.0;
    for (std::size_t m = 0; m < p.size(); ++m) {
        p[m] = std::exp(log_w[m] - mx);
        z += p[m];
    }
    for (auto& v : p) v /= z;
    return Pmf(std::move(p));
}

/// P_{M|X^n}(. | x), proportional to prod_t P_{X|Y}(x_t | y_t(m)).
inline Pmf encoder_posterior(std::span<const Symbol> x, const EncoderSpec& spec) {
    return posterior_from_log_weights(log_weights(x, spec));
}

/// One draw from encoder_posterior via the Gumbel-max rule. Consumes exactly M
/// uniforms from `rng` regardless of the weights.
inline std::size_t likelihood_encode(std::span<const Symbol> x, const EncoderSpec& spec,
                                     Rng& rng) {
    const auto w = log_weights(x, spec);
    constexpr double kNegInf = -std::numeric_limits<double>::infinity();
    double best = kNegInf;
    std::size_t best_m = w.size();
    for (std::size_t m = 0; m < w.size(); ++m) {
        const double g = rng.gumbel();
        if (w[m] == kNegInf) continue;
        if (const double key = w[m] + g; best_m == w.size() || key > best) {
            best = key;
            best_m = m;
        }
    }
    if (best_m == w.size()) throw AllZeroLikelihood();
    return best_m;
}

/// Lowest index with the maximal likelihood.
inline std::size_t map_encode(std::span<const Symbol> x, const EncoderSpec& spec) {
    const auto w = log_weights(x, spec);
    const auto it = std::max_element(w.begin(), w.end());
    if (*it == -std::numeric_limits<double>::infinity()) throw AllZeroLikelihood();
    return static_cast<std::size_t>(it - w.begin());
}

inline Sequence decode(std::size_t m, const Codebook& cb) {
    if (m >= cb.size()) {
        throw ValidationError("codeword index " + std::to_string(m) + " out of range [0, " +
                              std::to_string(cb.size()) + ")");
    }
    const auto w = cb.word(m);
    return Sequence(w.begin(), w.end());
}

/// (1/n) sum_t d(x_t, y_t).
inline double avg_distortion(std::span<const Symbol> x, std::span<const Symbol> y,
                             const DistortionMeasure& d) {
    if (x.size() != y.size()) {
        throw ValidationError("avg_distortion: length mismatch");
    }
    if (x.empty()) throw ValidationError("avg_distortion: empty sequences");
    double acc = 0.0;
    for (std::size_t t = 0; t < x.size(); ++t) {
        if (x[t] >= d.size_x() || y[t] >= d.size_y()) {
            throw ValidationError("avg_distortion: symbol out of range");
        }
        acc += d(x[t], y[t]);
    }
    return acc / static_cast<double>(x.size());
}

}  // namespace lel
