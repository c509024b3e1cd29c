#pragma once
// rd_solver.hpp - rate-distortion function by Blahut-Arimoto alternating minimization.
//
// The curve is traced by the Lagrangian slope s >= 0: each point minimizes
// I(X;Y) + s E[d(X,Y)] over forward channels P_{Y|X}. The slope is in nats per
// unit distortion (weights exp(-s d)); rates are reported in bits.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "lel/error.hpp"
#include "lel/finite_prob.hpp"

namespace lel {

/// Per-letter distortion table d(x, y) >= 0.
class DistortionMeasure {
public:
    DistortionMeasure() = default;

    DistortionMeasure(std::size_t size_x, std::size_t size_y, std::vector<double> table)
        : nx_(size_x), ny_(size_y), table_(std::move(table)) {
        if (nx_ == 0 || ny_ == 0 || table_.size() != nx_ * ny_) {
            throw ValidationError("distortion: table shape mismatch");
        }
        for (const double v : table_) {
            if (!std::isfinite(v) || v < 0.0) {
                throw ValidationError("distortion: entries must be finite and nonnegative");
            }
        }
        d_max_ = *std::max_element(table_.begin(), table_.end());
    }

    explicit DistortionMeasure(const std::vector<std::vector<double>>& rows)
        : DistortionMeasure(rows.size(), rows.empty() ? 0 : rows.front().size(), flatten(rows)) {}

    static DistortionMeasure hamming(std::size_t k) {
        std::vector<double> t(k * k, 1.0);
        for (std::size_t a = 0; a < k; ++a) t[a * k + a] = 0.0;
        return DistortionMeasure(k, k, std::move(t));
    }

    [[nodiscard]] std::size_t size_x() const noexcept { return nx_; }
    [[nodiscard]] std::size_t size_y() const noexcept { return ny_; }
    [[nodiscard]] double d_max() const noexcept { return d_max_; }
    [[nodiscard]] double operator()(std::size_t x, std::size_t y) const {
        return table_[x * ny_ + y];
    }
    [[nodiscard]] std::span<const double> table() const noexcept { return table_; }

    friend bool operator==(const DistortionMeasure&, const DistortionMeasure&) = default;

private:
    static std::vector<double> flatten(const std::vector<std::vector<double>>& rows) {
        std::vector<double> d;
        for (const auto& r : rows) {
            if (r.size() != rows.front().size()) throw ValidationError("distortion: ragged rows");
            d.insert(d.end(), r.begin(), r.end());
        }
        return d;
    }

    std::size_t nx_ = 0;
    std::size_t ny_ = 0;
    std::vector<double> table_;
    double d_max_ = 0.0;
};

struct RdPoint {
    double slope = 0.0;
    double distortion = 0.0;
    double rate = 0.0;  // bits
    Channel channel;    // P_{Y|X}
    std::size_t iterations = 0;
    bool converged = false;
};

struct BlahutArimotoOptions {
    double tol = 1e-9;
    std::size_t max_iters = 10000;
    /// Called after every iteration with the Lagrangian I + s E[d] (nats-free: I in
    /// bits, s E[d] in bits as well). For s = infinity the value is I alone.
    std::function<void(std::size_t iteration, double objective)> observer;
};

namespace detail {

inline double expected_distortion(const Pmf& source, const Channel& ch,
                                  const DistortionMeasure& d) {
    double acc = 0.0;
    for (std::size_t x = 0; x < source.size(); ++x) {
        for (std::size_t y = 0; y < ch.output_size(); ++y) acc += source[x] * ch(x, y) * d(x, y);
    }
    return acc;
}

inline void check_shapes(const Pmf& source, const DistortionMeasure& d) {
    if (source.size() != d.size_x()) {
        throw ValidationError("distortion table has " + std::to_string(d.size_x()) +
                              " rows but the source alphabet has " +
                              std::to_string(source.size()) + " symbols");
    }
}

/// E[d] attainable at zero rate, with the minimizing output symbol (lowest index on ties).
inline std::pair<double, std::size_t> zero_rate_distortion(const Pmf& source,
                                                           const DistortionMeasure& d) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t best_y = 0;
    for (std::size_t y = 0; y < d.size_y(); ++y) {
        double e = 0.0;
        for (std::size_t x = 0; x < source.size(); ++x) e += source[x] * d(x, y);
        if (e < best) {
            best = e;
            best_y = y;
        }
    }
    return {best, best_y};
}

inline double min_distortion(const Pmf& source, const DistortionMeasure& d) {
    double acc = 0.0;
    for (std::size_t x = 0; x < source.size(); ++x) {
        double m = std::numeric_limits<double>::infinity();
        for (std::size_t y = 0; y < d.size_y(); ++y) m = std::min(m, d(x, y));
        acc += source[x] * m;
    }
    return acc;
}

}  // namespace detail

/// One point of the R(D) curve at Lagrangian slope `slope` (may be +infinity, which
/// yields the minimum-distortion end of the curve).
inline RdPoint blahut_arimoto(const Pmf& source, const DistortionMeasure& d, double slope,
                              const BlahutArimotoOptions& opts) {
    detail::check_shapes(source, d);
    if (std::isnan(slope) || slope < 0.0) {
        throw ValidationError("blahut_arimoto: slope must be >= 0");
    }
    const std::size_t nx = source.size();
    const std::size_t ny = d.size_y();

    if (slope == 0.0) {
        const auto [dist, y] = detail::zero_rate_distortion(source, d);
        return {0.0, dist, 0.0, Channel::constant(nx, Pmf::point_mass(ny, y)), 0, true};
    }

    const bool infinite = std::isinf(slope);
    constexpr double kNegInf = -std::numeric_limits<double>::infinity();

    // Exponent table -s (d(x,y) - min_y d(x,y)); the per-row shift cancels in normalization.
    std::vector<double> expo(nx * ny);
    for (std::size_t x = 0; x < nx; ++x) {
        double m = std::numeric_limits<double>::infinity();
        for (std::size_t y = 0; y < ny; ++y) m = std::min(m, d(x, y));
        for (std::size_t y = 0; y < ny; ++y) {
            const double gap = d(x, y) - m;
            expo[x * ny + y] = infinite ? (gap == 0.0 ? 0.0 : kNegInf) : -slope * gap;
        }
    }

    std::vector<double> q(ny, 1.0 / static_cast<double>(ny));
    std::vector<double> cond(nx * ny);
    std::vector<double> logw(ny);
    std::vector<double> q_next(ny);
    double prev_rate = std::numeric_limits<double>::quiet_NaN();
    double rate = 0.0;
    double dist = 0.0;
    std::size_t iter = 0;
    bool converged = false;

    while (iter < opts.max_iters) {
        ++iter;
        for (std::size_t x = 0; x < nx; ++x) {
            double mx = kNegInf;
            for (std::size_t y = 0; y < ny; ++y) {
                logw[y] = (q[y] > 0.0 ? std::log(q[y]) : kNegInf) + expo[x * ny + y];
                mx = std::max(mx, logw[y]);
            }
            if (mx == kNegInf) {
                // output marginal vanished on this row's admissible outputs; only
                // possible for zero-probability inputs
                for (std::size_t y = 0; y < ny; ++y) logw[y] = expo[x * ny + y];
                mx = 0.0;
            }
            double z = 0.0;
            for (std::size_t y = 0; y < ny; ++y) {
                const double w = logw[y] == kNegInf ? 0.0 : std::exp(logw[y] - mx);
                cond[x * ny + y] = w;
                z += w;
            }
            for (std::size_t y = 0; y < ny; ++y) cond[x * ny + y] /= z;
        }

        std::fill(q_next.begin(), q_next.end(), 0.0);
        for (std::size_t x = 0; x < nx; ++x)
            for (std::size_t y = 0; y < ny; ++y) q_next[y] += source[x] * cond[x * ny + y];

        rate = 0.0;
        dist = 0.0;
        for (std::size_t x = 0; x < nx; ++x) {
            for (std::size_t y = 0; y < ny; ++y) {
                const double c = cond[x * ny + y];
                const double pxy = source[x] * c;
                dist += pxy * d(x, y);
                if (pxy > 0.0) rate += pxy * std::log(c / q_next[y]);
            }
        }
        rate = std::max(0.0, rate / std::numbers::ln2);

        if (opts.observer) {
            opts.observer(iter, infinite ? rate : rate + slope * dist / std::numbers::ln2);
        }
        q.swap(q_next);
        if (std::abs(rate - prev_rate) < opts.tol) {
            converged = true;
            break;
        }
        prev_rate = rate;
    }

    return {slope, dist, rate, Channel(nx, ny, std::move(cond)), iter, converged};
}

inline RdPoint blahut_arimoto(const Pmf& source, const DistortionMeasure& d, double slope,
                              double tol = 1e-9, std::size_t max_iters = 10000) {
    BlahutArimotoOptions opts;
    opts.tol = tol;
    opts.max_iters = max_iters;
    return blahut_arimoto(source, d, slope, opts);
}

/// Achievable distortion interval [D at slope infinity, D at zero rate].
inline std::pair<double, double> distortion_range(const Pmf& source, const DistortionMeasure& d) {
    detail::check_shapes(source, d);
    return {detail::min_distortion(source, d), detail::zero_rate_distortion(source, d).first};
}

/// The R(D) point at `target_d`, located by bisection over the slope. The returned
/// channel satisfies E[d] <= target_d and target_d - E[d] < tol.
inline RdPoint rd_point_at_distortion(const Pmf& source, const DistortionMeasure& d,
                                      double target_d, double tol = 1e-6,
                                      double ba_tol = 1e-9, std::size_t max_iters = 10000) {
    const auto [d_lo, d_hi] = distortion_range(source, d);
    if (!std::isfinite(target_d) || target_d < d_lo - kPmfTolerance) {
        throw ValidationError("target distortion " + std::to_string(target_d) +
                              " is below the minimum achievable " + std::to_string(d_lo));
    }
    const auto eval = [&](double s) { return blahut_arimoto(source, d, s, ba_tol, max_iters); };

    RdPoint lo = eval(0.0);
    if (target_d >= lo.distortion) return lo;
    if (target_d - d_lo < tol) return eval(std::numeric_limits<double>::infinity());

    RdPoint hi = eval(1.0);
    while (hi.distortion > target_d) {
        lo = std::move(hi);
        if (lo.slope > 0x1.0p60) return eval(std::numeric_limits<double>::infinity());
        hi = eval(lo.slope * 2.0);
    }

    for (int step = 0; step < 200; ++step) {
        if (target_d - hi.distortion < tol) return hi;
        const double mid = 0.5 * (lo.slope + hi.slope);
        if (mid <= lo.slope || mid >= hi.slope) break;
        RdPoint p = eval(mid);
        if (p.distortion > target_d) {
            lo = std::move(p);
        } else {
            hi = std::move(p);
        }
    }
    if (target_d - hi.distortion < tol) return hi;

    // D(s) jumps across a linear segment of the curve; a mixture of the two bracketing
    // channels attains target_d on that segment.
    const double lambda = std::clamp(
        (target_d - hi.distortion) / (lo.distortion - hi.distortion) * (1.0 - 1e-12), 0.0, 1.0);
    std::vector<double> mixed(lo.channel.data().size());
    for (std::size_t i = 0; i < mixed.size(); ++i) {
        mixed[i] = lambda * lo.channel.data()[i] + (1.0 - lambda) * hi.channel.data()[i];
    }
    Channel ch(source.size(), d.size_y(), std::move(mixed));
    const double dist = detail::expected_distortion(source, ch, d);
    const double rate = mutual_information(joint_from(source, ch));
    return {hi.slope, dist, rate, std::move(ch), lo.iterations + hi.iterations,
            lo.converged && hi.converged};
}

}  // namespace lel
