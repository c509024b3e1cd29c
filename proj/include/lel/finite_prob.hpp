#pragma once
// finite_prob.hpp - exact probability primitives over finite alphabets.
//
// Everything here is stored in the linear domain. Sequences of length n over an
// alphabet of size k are indexed lexicographically, most significant symbol first:
//   index(x_1..x_n) = x_1 k^{n-1} + x_2 k^{n-2} + ... + x_n.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "lel/error.hpp"

namespace lel {

using Symbol = std::uint8_t;
using Sequence = std::vector<Symbol>;

/// Symbols are stored one byte each.
inline constexpr std::size_t kMaxAlphabet = 256;

inline constexpr double kPmfTolerance = 1e-12;
inline constexpr double kSequenceTolerance = 1e-9;

inline constexpr std::uint64_t kDefaultEnumerationCap = std::uint64_t{1} << 24;

/// Upper bound on the number of states any exact enumeration may materialize.
/// `LEL_ENUM_CAP` in the environment overrides the default of 2^24.
inline std::uint64_t enumeration_cap() {
    if (const char* env = std::getenv("LEL_ENUM_CAP"); env != nullptr && *env != '\0') {
        char* end = nullptr;
        const unsigned long long v = std::strtoull(env, &end, 10);
        if (end != nullptr && *end == '\0' && v > 0) {
            return static_cast<std::uint64_t>(v);
        }
    }
    return kDefaultEnumerationCap;
}

/// alphabet^n, throwing CapExceeded if it exceeds `cap`.
inline std::uint64_t checked_sequence_count(std::size_t alphabet, std::size_t n,
                                            std::uint64_t cap = enumeration_cap()) {
    std::uint64_t count = 1;
    for (std::size_t i = 0; i < n; ++i) {
        if (alphabet != 0 && count > cap / alphabet) {
            throw CapExceeded("sequence space for (n=" + std::to_string(n) +
                              ", alphabet=" + std::to_string(alphabet) +
                              ") exceeds enumeration cap " + std::to_string(cap));
        }
        count *= alphabet;
    }
    if (count > cap) {
        throw CapExceeded("sequence space for (n=" + std::to_string(n) + ", alphabet=" +
                          std::to_string(alphabet) + ") exceeds enumeration cap " +
                          std::to_string(cap));
    }
    return count;
}

inline std::uint64_t sequence_index(std::span<const Symbol> seq, std::size_t alphabet) {
    std::uint64_t idx = 0;
    for (const Symbol s : seq) {
        idx = idx * alphabet + s;
    }
    return idx;
}

inline Sequence sequence_at(std::uint64_t index, std::size_t alphabet, std::size_t n) {
    Sequence seq(n);
    for (std::size_t t = n; t-- > 0;) {
        seq[t] = static_cast<Symbol>(index % alphabet);
        index /= alphabet;
    }
    return seq;
}

namespace detail {

inline void validate_distribution(std::span<const double> probs, double tol,
                                  const char* what) {
    if (probs.empty()) {
        throw ValidationError(std::string(what) + ": empty distribution");
    }
    double total = 0.0;
    for (const double p : probs) {
        if (!std::isfinite(p) || p < 0.0) {
            throw ValidationError(std::string(what) + ": entry " + std::to_string(p) +
                                  " is negative or not finite");
        }
        total += p;
    }
    if (std::abs(total - 1.0) > tol) {
        throw ValidationError(std::string(what) + ": entries sum to " +
                              std::to_string(total) + ", not 1");
    }
}

inline double half_l1(std::span<const double> a, std::span<const double> b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        acc += std::abs(a[i] - b[i]);
    }
    return std::clamp(0.5 * acc, 0.0, 1.0);
}

}  // namespace detail

/// Probability mass function over {0, ..., size-1}. Also used for pmfs over codeword
/// indices, so its size is not limited to kMaxAlphabet.
class Pmf {
public:
    Pmf() = default;

    explicit Pmf(std::vector<double> probs) : probs_(std::move(probs)) {
        detail::validate_distribution(probs_, kPmfTolerance, "pmf");
    }

    static Pmf uniform(std::size_t k) {
        return Pmf(std::vector<double>(k, 1.0 / static_cast<double>(k)));
    }

    static Pmf point_mass(std::size_t k, std::size_t at) {
        std::vector<double> p(k, 0.0);
        p.at(at) = 1.0;
        return Pmf(std::move(p));
    }

    /// (1-p, p): symbol 1 has probability p.
    static Pmf bernoulli(double p) { return Pmf({1.0 - p, p}); }

    [[nodiscard]] std::size_t size() const noexcept { return probs_.size(); }
    [[nodiscard]] double operator[](std::size_t i) const { return probs_[i]; }
    [[nodiscard]] std::span<const double> probs() const noexcept { return probs_; }

    friend bool operator==(const Pmf&, const Pmf&) = default;

private:
    std::vector<double> probs_;
};

/// Conditional pmf: row `a` is the output distribution given input `a`.
class Channel {
public:
    Channel() = default;

    Channel(std::size_t input_size, std::size_t output_size, std::vector<double> rows)
        : in_(input_size), out_(output_size), data_(std::move(rows)) {
        if (in_ == 0 || out_ == 0 || data_.size() != in_ * out_) {
            throw ValidationError("channel: table shape does not match " +
                                  std::to_string(in_) + "x" + std::to_string(out_));
        }
        if (in_ > kMaxAlphabet || out_ > kMaxAlphabet) {
            throw ValidationError("channel: alphabet larger than " + std::to_string(kMaxAlphabet));
        }
        for (std::size_t a = 0; a < in_; ++a) {
            detail::validate_distribution(row(a), kPmfTolerance, "channel row");
        }
    }

    explicit Channel(const std::vector<std::vector<double>>& rows)
        : Channel(rows.size(), rows.empty() ? 0 : rows.front().size(), flatten(rows)) {}

    static Channel identity(std::size_t k) {
        std::vector<double> d(k * k, 0.0);
        for (std::size_t a = 0; a < k; ++a) d[a * k + a] = 1.0;
        return Channel(k, k, std::move(d));
    }

    /// Binary symmetric channel with crossover probability p.
    static Channel bsc(double p) { return Channel(2, 2, {1.0 - p, p, p, 1.0 - p}); }

    /// Every input maps to the same output distribution.
    static Channel constant(std::size_t input_size, const Pmf& out) {
        std::vector<double> d;
        d.reserve(input_size * out.size());
        for (std::size_t a = 0; a < input_size; ++a) {
            d.insert(d.end(), out.probs().begin(), out.probs().end());
        }
        return Channel(input_size, out.size(), std::move(d));
    }

    [[nodiscard]] std::size_t input_size() const noexcept { return in_; }
    [[nodiscard]] std::size_t output_size() const noexcept { return out_; }

    [[nodiscard]] double operator()(std::size_t in, std::size_t out) const {
        return data_[in * out_ + out];
    }
    [[nodiscard]] std::span<const double> row(std::size_t in) const {
        return std::span<const double>(data_).subspan(in * out_, out_);
    }
    [[nodiscard]] Pmf row_pmf(std::size_t in) const {
        const auto r = row(in);
        return Pmf(std::vector<double>(r.begin(), r.end()));
    }
    [[nodiscard]] std::span<const double> data() const noexcept { return data_; }

    friend bool operator==(const Channel&, const Channel&) = default;

private:
    static std::vector<double> flatten(const std::vector<std::vector<double>>& rows) {
        std::vector<double> d;
        for (const auto& r : rows) {
            if (r.size() != rows.front().size()) {
                throw ValidationError("channel: ragged rows");
            }
            d.insert(d.end(), r.begin(), r.end());
        }
        return d;
    }

    std::size_t in_ = 0;
    std::size_t out_ = 0;
    std::vector<double> data_;
};

/// Joint pmf of (X, Y), row-major in x.
class JointPmf {
public:
    JointPmf() = default;

    JointPmf(std::size_t size_x, std::size_t size_y, std::vector<double> probs)
        : nx_(size_x), ny_(size_y), probs_(std::move(probs)) {
        if (nx_ == 0 || ny_ == 0 || probs_.size() != nx_ * ny_) {
            throw ValidationError("joint pmf: table shape mismatch");
        }
        detail::validate_distribution(probs_, kPmfTolerance, "joint pmf");
    }

    [[nodiscard]] std::size_t size_x() const noexcept { return nx_; }
    [[nodiscard]] std::size_t size_y() const noexcept { return ny_; }
    [[nodiscard]] double operator()(std::size_t x, std::size_t y) const {
        return probs_[x * ny_ + y];
    }
    [[nodiscard]] std::span<const double> probs() const noexcept { return probs_; }

    [[nodiscard]] Pmf marginal_x() const {
        std::vector<double> m(nx_, 0.0);
        for (std::size_t x = 0; x < nx_; ++x)
            for (std::size_t y = 0; y < ny_; ++y) m[x] += (*this)(x, y);
        return Pmf(std::move(m));
    }

    [[nodiscard]] Pmf marginal_y() const {
        std::vector<double> m(ny_, 0.0);
        for (std::size_t x = 0; x < nx_; ++x)
            for (std::size_t y = 0; y < ny_; ++y) m[y] += (*this)(x, y);
        return Pmf(std::move(m));
    }

    friend bool operator==(const JointPmf&, const JointPmf&) = default;

private:
    std::size_t nx_ = 0;
    std::size_t ny_ = 0;
    std::vector<double> probs_;
};

/// Explicit pmf over the k^n sequences of length n.
class SequenceDist {
public:
    SequenceDist() = default;

    SequenceDist(std::size_t alphabet_size, std::size_t n, std::vector<double> probs)
        : k_(alphabet_size), n_(n), probs_(std::move(probs)) {
        if (probs_.size() != checked_sequence_count(k_, n_, std::numeric_limits<std::uint64_t>::max())) {
            throw ValidationError("sequence distribution: length is not alphabet^n");
        }
        detail::validate_distribution(probs_, kSequenceTolerance, "sequence distribution");
    }

    [[nodiscard]] std::size_t alphabet_size() const noexcept { return k_; }
    [[nodiscard]] std::size_t n() const noexcept { return n_; }
    [[nodiscard]] std::size_t size() const noexcept { return probs_.size(); }
    [[nodiscard]] double operator[](std::size_t i) const { return probs_[i]; }
    [[nodiscard]] double at(std::span<const Symbol> seq) const {
        return probs_[sequence_index(seq, k_)];
    }
    [[nodiscard]] std::span<const double> probs() const noexcept { return probs_; }

private:
    std::size_t k_ = 0;
    std::size_t n_ = 0;
    std::vector<double> probs_;
};

/// Joint pmf over (sequence index, column index). Used for (x^n, m) and (x^n, y^n)
/// tables; rows are always X sequences in lexicographic order.
class SequenceJoint {
public:
    SequenceJoint() = default;

    SequenceJoint(std::size_t alphabet_size, std::size_t n, std::size_t cols,
                  std::vector<double> probs)
        : k_(alphabet_size), n_(n), cols_(cols), probs_(std::move(probs)) {
        const auto rows = checked_sequence_count(k_, n_, std::numeric_limits<std::uint64_t>::max());
        if (cols_ == 0 || probs_.size() != rows * cols_) {
            throw ValidationError("sequence joint: table shape mismatch");
        }
        detail::validate_distribution(probs_, kSequenceTolerance, "sequence joint");
    }

    [[nodiscard]] std::size_t alphabet_size() const noexcept { return k_; }
    [[nodiscard]] std::size_t n() const noexcept { return n_; }
    [[nodiscard]] std::size_t rows() const noexcept { return probs_.size() / cols_; }
    [[nodiscard]] std::size_t cols() const noexcept { return cols_; }
    [[nodiscard]] double operator()(std::size_t row, std::size_t col) const {
        return probs_[row * cols_ + col];
    }
    [[nodiscard]] std::span<const double> row(std::size_t r) const {
        return std::span<const double>(probs_).subspan(r * cols_, cols_);
    }
    [[nodiscard]] std::span<const double> probs() const noexcept { return probs_; }

    /// Marginal over the sequence (row) coordinate.
    [[nodiscard]] SequenceDist row_marginal() const {
        std::vector<double> m(rows(), 0.0);
        for (std::size_t r = 0; r < m.size(); ++r) {
            for (const double p : row(r)) m[r] += p;
        }
        return SequenceDist(k_, n_, std::move(m));
    }

private:
    std::size_t k_ = 0;
    std::size_t n_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> probs_;
};

/// Shannon entropy in bits.
inline double entropy(const Pmf& p) {
    double h = 0.0;
    for (const double v : p.probs()) {
        if (v > 0.0) h -= v * std::log2(v);
    }
    return std::max(0.0, h);
}

/// I(X;Y) in bits.
inline double mutual_information(const JointPmf& j) {
    const Pmf px = j.marginal_x();
    const Pmf py = j.marginal_y();
    double mi = 0.0;
    for (std::size_t x = 0; x < j.size_x(); ++x) {
        for (std::size_t y = 0; y < j.size_y(); ++y) {
            const double p = j(x, y);
            if (p > 0.0) mi += p * std::log2(p / (px[x] * py[y]));
        }
    }
    return std::max(0.0, mi);
}

inline double total_variation(const Pmf& p, const Pmf& q) {
    if (p.size() != q.size()) {
        throw ValidationError("total variation: alphabet sizes differ");
    }
    return detail::half_l1(p.probs(), q.probs());
}

inline double total_variation(const SequenceDist& p, const SequenceDist& q) {
    if (p.alphabet_size() != q.alphabet_size() || p.n() != q.n()) {
        throw ValidationError("total variation: sequence spaces differ");
    }
    return detail::half_l1(p.probs(), q.probs());
}

inline double total_variation(const SequenceJoint& p, const SequenceJoint& q) {
    if (p.alphabet_size() != q.alphabet_size() || p.n() != q.n() || p.cols() != q.cols()) {
        throw ValidationError("total variation: joint shapes differ");
    }
    return detail::half_l1(p.probs(), q.probs());
}

/// P(a, b) = input(a) ch(b | a).
inline JointPmf joint_from(const Pmf& input, const Channel& ch) {
    if (ch.input_size() != input.size()) {
        throw ValidationError("joint_from: channel input size " +
                              std::to_string(ch.input_size()) + " != pmf size " +
                              std::to_string(input.size()));
    }
    std::vector<double> j(input.size() * ch.output_size());
    for (std::size_t a = 0; a < input.size(); ++a) {
        for (std::size_t b = 0; b < ch.output_size(); ++b) {
            j[a * ch.output_size() + b] = input[a] * ch(a, b);
        }
    }
    return JointPmf(input.size(), ch.output_size(), std::move(j));
}

struct ReverseChannel {
    Pmf output_marginal;   // P_Y
    Channel backward;      // P_{X|Y}, rows indexed by y
    /// y symbols with P_Y(y) = 0; their rows are uniform.
    std::vector<std::size_t> degenerate_rows;
};

/// Bayes inversion of a joint into P_Y and P_{X|Y}.
inline ReverseChannel reverse_channel(const JointPmf& j) {
    const Pmf py = j.marginal_y();
    const std::size_t nx = j.size_x();
    const std::size_t ny = j.size_y();
    std::vector<double> rows(ny * nx);
    std::vector<std::size_t> degenerate;
    for (std::size_t y = 0; y < ny; ++y) {
        if (py[y] > 0.0) {
            for (std::size_t x = 0; x < nx; ++x) rows[y * nx + x] = j(x, y) / py[y];
        } else {
            degenerate.push_back(y);
            for (std::size_t x = 0; x < nx; ++x) rows[y * nx + x] = 1.0 / static_cast<double>(nx);
        }
    }
    return {py, Channel(ny, nx, std::move(rows)), std::move(degenerate)};
}

/// i.i.d. extension of p to length-n sequences.
inline SequenceDist product_extension(const Pmf& p, std::size_t n) {
    const std::uint64_t count = checked_sequence_count(p.size(), n);
    std::vector<double> probs;
    probs.reserve(count);
    probs.push_back(1.0);
    for (std::size_t t = 0; t < n; ++t) {
        std::vector<double> next(probs.size() * p.size());
        for (std::size_t i = 0; i < probs.size(); ++i) {
            for (std::size_t a = 0; a < p.size(); ++a) next[i * p.size() + a] = probs[i] * p[a];
        }
        probs = std::move(next);
    }
    return SequenceDist(p.size(), n, std::move(probs));
}

}  // namespace lel
