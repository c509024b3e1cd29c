#pragma once
// experiments.hpp - subcommands of the experiment harness and their CSV output.
//
// Every CSV starts with a version line "# lel-csv v1 <table>" followed by a header row.
// Rows are emitted in sweep order (n_list outer, rate_list inner, then trial index) and
// every row carries master_seed and the seed of the random stream that produced it
// (trial_seed; 0 for rows that involve no randomness).

#include <cstddef>
#include <cstdint>
#include <fstream>
#include <initializer_list>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "lel/analysis.hpp"
#include "lel/codebook_io.hpp"
#include "lel/codec.hpp"
#include "lel/config.hpp"
#include "lel/error.hpp"
#include "lel/finite_prob.hpp"
#include "lel/random.hpp"
#include "lel/rd_solver.hpp"

namespace lel {

enum class Subcommand { rd_curve, soft_cover, distortion, proof_check, codebook };

inline constexpr std::size_t kDefaultSoftCoverTrials = 20;
inline constexpr std::size_t kDefaultDistortionTrials = 200;

inline std::string_view name(Subcommand s) {
    switch (s) {
        case Subcommand::rd_curve: return "rd-curve";
        case Subcommand::soft_cover: return "soft-cover";
        case Subcommand::distortion: return "distortion";
        case Subcommand::proof_check: return "proof-check";
        case Subcommand::codebook: return "codebook";
    }
    return "";
}

struct RunOptions {
    std::optional<std::uint64_t> seed;    // overrides experiment.master_seed
    std::optional<std::size_t> trials;    // overrides experiment.trials
    std::size_t jobs = 1;
    std::string out;                      // overrides experiment.output
    std::string codebook_path;            // proof-check / distortion: replay this codebook
    std::ostream* log = &std::cerr;       // warnings; may be null
};

/// The distributions an experiment runs with.
struct ResolvedSetup {
    Pmf px;
    Pmf py;
    Channel test_channel;  // P_{X|Y}
    std::optional<RdPoint> rd_point;
    std::vector<std::size_t> degenerate_rows;
};

inline ResolvedSetup resolve_setup(const ExperimentConfig& cfg) {
    ResolvedSetup s;
    switch (cfg.channel_mode) {
        case ChannelMode::rd: {
            if (!cfg.source || !cfg.distortion || !cfg.target_distortion) {
                throw ConfigError(0, "channel.mode = rd needs source.pmf, distortion.table and "
                                     "channel.target_distortion");
            }
            RdPoint pt = rd_point_at_distortion(*cfg.source, *cfg.distortion,
                                                *cfg.target_distortion, cfg.rd_tol);
            auto rev = reverse_channel(joint_from(*cfg.source, pt.channel));
            s.px = *cfg.source;
            s.py = std::move(rev.output_marginal);
            s.test_channel = std::move(rev.backward);
            s.degenerate_rows = std::move(rev.degenerate_rows);
            s.rd_point = std::move(pt);
            break;
        }
        case ChannelMode::forward: {
            if (!cfg.source || !cfg.channel_matrix) {
                throw ConfigError(0, "channel.mode = forward needs source.pmf and channel.matrix");
            }
            auto rev = reverse_channel(joint_from(*cfg.source, *cfg.channel_matrix));
            s.px = *cfg.source;
            s.py = std::move(rev.output_marginal);
            s.test_channel = std::move(rev.backward);
            s.degenerate_rows = std::move(rev.degenerate_rows);
            break;
        }
        case ChannelMode::test: {
            if (!cfg.output_pmf || !cfg.channel_matrix) {
                throw ConfigError(0, "channel.mode = test needs channel.output_pmf and channel.matrix");
            }
            // joint over (Y, X); its second marginal is P_X
            const JointPmf yx = joint_from(*cfg.output_pmf, *cfg.channel_matrix);
            s.px = yx.marginal_y();
            s.py = *cfg.output_pmf;
            s.test_channel = *cfg.channel_matrix;
            if (cfg.source) {
                if (cfg.source->size() != s.px.size()) {
                    throw ConfigError(0, "source.pmf size does not match the test channel output");
                }
                for (std::size_t a = 0; a < s.px.size(); ++a) {
                    if (std::abs((*cfg.source)[a] - s.px[a]) > kSequenceTolerance) {
                        throw ConfigError(0, "source.pmf differs from the X-marginal implied by "
                                             "channel.output_pmf and channel.matrix");
                    }
                }
            }
            break;
        }
    }
    if (cfg.distortion &&
        (cfg.distortion->size_x() != s.px.size() || cfg.distortion->size_y() != s.py.size())) {
        throw ConfigError(0, "distortion table shape does not match the source and reproduction alphabets");
    }
    return s;
}

struct CsvOutput {
    std::string main;
    std::string summary;  // empty when the subcommand has no summary table
};

namespace detail {

class CsvWriter {
public:
    CsvWriter(std::string_view table, std::initializer_list<std::string_view> columns) {
        os_ << "# lel-csv v1 " << table << "\n";
        bool first = true;
        for (const auto c : columns) {
            os_ << (first ? "" : ",") << c;
            first = false;
        }
        os_ << "\n";
    }

    CsvWriter& cell(double v) { return raw(format_double(v)); }
    CsvWriter& cell(std::uint64_t v) { return raw(std::to_string(v)); }
    CsvWriter& cell(std::string_view v) { return raw(v); }
    CsvWriter& cell(bool v) { return raw(v ? "1" : "0"); }
    void end_row() {
        os_ << "\n";
        first_ = true;
    }

    [[nodiscard]] std::string str() const { return os_.str(); }

private:
    CsvWriter& raw(std::string_view text) {
        os_ << (first_ ? "" : ",") << text;
        first_ = false;
        return *this;
    }

    std::ostringstream os_;
    bool first_ = true;
};

inline std::uint64_t master_seed(const ExperimentConfig& cfg, const RunOptions& opts) {
    return opts.seed.value_or(cfg.master_seed);
}

inline std::size_t trials(const ExperimentConfig& cfg, const RunOptions& opts,
                          std::size_t fallback) {
    return opts.trials.value_or(cfg.trials.value_or(fallback));
}

inline CsvOutput render_rd_curve(const ExperimentConfig& cfg, const RunOptions& opts) {
    if (!cfg.source || !cfg.distortion) {
        throw ConfigError(0, "rd-curve needs source.pmf and distortion.table");
    }
    const std::uint64_t master = master_seed(cfg, opts);
    CsvWriter w("rd-curve", {"master_seed", "trial_seed", "target_D", "slope", "D", "R",
                             "iterations", "converged"});
    auto emit = [&](std::string_view target, const RdPoint& p) {
        w.cell(master).cell(std::uint64_t{0}).cell(target).cell(p.slope).cell(p.distortion)
            .cell(p.rate).cell(static_cast<std::uint64_t>(p.iterations)).cell(p.converged);
        w.end_row();
    };
    std::vector<double> slopes = cfg.slopes;
    if (slopes.empty() && cfg.distortions.empty()) slopes = {0.0, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0};
    for (const double s : slopes) emit("", blahut_arimoto(*cfg.source, *cfg.distortion, s));
    for (const double target : cfg.distortions) {
        emit(format_double(target),
             rd_point_at_distortion(*cfg.source, *cfg.distortion, target, cfg.rd_tol));
    }
    return {w.str(), {}};
}

inline CsvOutput render_soft_cover(const ExperimentConfig& cfg, const RunOptions& opts) {
    const ResolvedSetup s = resolve_setup(cfg);
    const std::uint64_t master = master_seed(cfg, opts);
    const std::size_t t_count = trials(cfg, opts, kDefaultSoftCoverTrials);
    CsvWriter rows("soft-cover", {"master_seed", "trial_seed", "n", "R", "M", "trial", "tv"});
    CsvWriter summary("soft-cover-summary",
                      {"master_seed", "n", "R", "M", "trials", "tv_mean", "tv_stderr"});
    for (const std::size_t n : cfg.n_list) {
        for (const double rate : cfg.rate_list) {
            const SoftCoverReport r = expected_soft_cover_tv(s.py, s.test_channel, s.px, n, rate,
                                                             t_count, master, opts.jobs);
            for (std::size_t t = 0; t < r.trials; ++t) {
                rows.cell(master).cell(r.trial_seeds[t]).cell(static_cast<std::uint64_t>(n))
                    .cell(rate).cell(r.codewords).cell(static_cast<std::uint64_t>(t)).cell(r.tv[t]);
                rows.end_row();
            }
            summary.cell(master).cell(static_cast<std::uint64_t>(n)).cell(rate).cell(r.codewords)
                .cell(static_cast<std::uint64_t>(r.trials)).cell(r.tv_mean).cell(r.tv_stderr);
            summary.end_row();
        }
    }
    return {rows.str(), summary.str()};
}

inline CsvOutput render_distortion(const ExperimentConfig& cfg, const RunOptions& opts) {
    const ResolvedSetup s = resolve_setup(cfg);
    if (!cfg.distortion) throw ConfigError(0, "distortion needs distortion.table");
    const std::uint64_t master = master_seed(cfg, opts);
    const std::size_t t_count = trials(cfg, opts, kDefaultDistortionTrials);
    CsvWriter rows("distortion", {"master_seed", "trial_seed", "n", "R", "M", "trial", "status",
                                  "index", "distortion"});
    CsvWriter summary("distortion-summary", {"master_seed", "n", "R", "M", "trials", "failures",
                                             "mean", "stderr"});
    auto emit = [&](const DistortionReport& r) {
        for (const auto& t : r.trials) {
            rows.cell(master).cell(t.seed).cell(static_cast<std::uint64_t>(r.n)).cell(r.rate)
                .cell(r.codewords).cell(static_cast<std::uint64_t>(t.trial))
                .cell(std::string_view(t.all_zero_likelihood ? "all_zero_likelihood" : "ok"))
                .cell(static_cast<std::uint64_t>(t.index)).cell(t.distortion);
            rows.end_row();
        }
        summary.cell(master).cell(static_cast<std::uint64_t>(r.n)).cell(r.rate).cell(r.codewords)
            .cell(static_cast<std::uint64_t>(r.trials.size()))
            .cell(static_cast<std::uint64_t>(r.failures)).cell(r.mean).cell(r.standard_error);
        summary.end_row();
        if (r.failures > 0 && opts.log != nullptr) {
            *opts.log << "warning: n=" << r.n << " R=" << format_double(r.rate) << ": "
                      << r.failures << " of " << r.trials.size()
                      << " trials hit AllZeroLikelihood and were excluded from the mean\n";
        }
    };
    if (!opts.codebook_path.empty()) {
        const EncoderSpec spec(s.test_channel, load_codebook(opts.codebook_path));
        emit(distortion_experiment(s.px, spec, *cfg.distortion, t_count, master, opts.jobs));
    } else {
        for (const std::size_t n : cfg.n_list) {
            for (const double rate : cfg.rate_list) {
                emit(distortion_experiment(s.px, s.py, s.test_channel, *cfg.distortion, n, rate,
                                           t_count, master, opts.jobs));
            }
        }
    }
    return {rows.str(), summary.str()};
}

inline CsvOutput render_proof_check(const ExperimentConfig& cfg, const RunOptions& opts) {
    const ResolvedSetup s = resolve_setup(cfg);
    if (!cfg.distortion) throw ConfigError(0, "proof-check needs distortion.table");
    const std::uint64_t master = master_seed(cfg, opts);
    CsvWriter w("proof-check",
                {"master_seed", "trial_seed", "n", "R", "M", "tv_joint", "tv_marginal",
                 "conditional_max_gap", "expected_distortion_q", "distortion_bound_rhs",
                 "distortion_bound_rhs_tight", "empirical_distortion", "repeated_codewords"});
    auto emit = [&](const Codebook& cb) {
        const ProofCheckReport r = proof_check(cb, s.test_channel, s.px, *cfg.distortion);
        w.cell(master).cell(cb.seed).cell(static_cast<std::uint64_t>(cb.n)).cell(cb.rate)
            .cell(static_cast<std::uint64_t>(cb.size())).cell(r.tv_joint).cell(r.tv_marginal)
            .cell(r.conditional_max_gap).cell(r.expected_distortion_q).cell(r.distortion_bound_rhs)
            .cell(r.distortion_bound_rhs_tight).cell(r.empirical_distortion)
            .cell(r.repeated_codewords);
        w.end_row();
    };
    if (!opts.codebook_path.empty()) {
        emit(load_codebook(opts.codebook_path));
    } else {
        std::uint64_t point = 0;
        for (const std::size_t n : cfg.n_list) {
            for (const double rate : cfg.rate_list) {
                emit(generate_codebook(s.py, n, rate, derive_seed(master, point++)));
            }
        }
    }
    return {w.str(), {}};
}

inline std::string summary_path(const std::string& out) {
    const auto slash = out.find_last_of('/');
    const auto dot = out.find_last_of('.');
    if (dot != std::string::npos && (slash == std::string::npos || dot > slash)) {
        return out.substr(0, dot) + ".summary" + out.substr(dot);
    }
    return out + ".summary.csv";
}

inline void write_file(const std::string& path, std::string_view data) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw Error("cannot open " + path + " for writing");
    os.write(data.data(), static_cast<std::streamsize>(data.size()));
    if (!os) throw Error("failed writing " + path);
}

}  // namespace detail

/// CSV text produced by a CSV-emitting subcommand.
inline CsvOutput render(Subcommand cmd, const ExperimentConfig& cfg, const RunOptions& opts) {
    switch (cmd) {
        case Subcommand::rd_curve: return detail::render_rd_curve(cfg, opts);
        case Subcommand::soft_cover: return detail::render_soft_cover(cfg, opts);
        case Subcommand::distortion: return detail::render_distortion(cfg, opts);
        case Subcommand::proof_check: return detail::render_proof_check(cfg, opts);
        case Subcommand::codebook: break;
    }
    throw ValidationError("codebook does not produce CSV");
}

/// Generates the codebook the `codebook` subcommand serializes: P_Y from the resolved
/// setup, n and R from the first entries of n_list and rate_list, seed = master seed.
inline Codebook configured_codebook(const ExperimentConfig& cfg, const RunOptions& opts) {
    const ResolvedSetup s = resolve_setup(cfg);
    return generate_codebook(s.py, cfg.n_list.front(), cfg.rate_list.front(),
                             detail::master_seed(cfg, opts));
}

/// Runs a subcommand and writes its artifacts. CSV goes to the output path (stdout when
/// none); summary tables go next to it as <stem>.summary<ext>. Returns the paths written.
inline std::vector<std::string> run(Subcommand cmd, const ExperimentConfig& cfg,
                                    const RunOptions& opts, std::ostream& stdout_stream = std::cout) {
    const std::string out = opts.out.empty() ? cfg.output : opts.out;
    if (cmd == Subcommand::codebook) {
        if (out.empty()) throw ValidationError("codebook needs an output path (--out)");
        save_codebook(out, configured_codebook(cfg, opts));
        return {out};
    }
    const CsvOutput csv = render(cmd, cfg, opts);
    if (out.empty()) {
        stdout_stream << csv.main << csv.summary;
        return {};
    }
    detail::write_file(out, csv.main);
    std::vector<std::string> written{out};
    if (!csv.summary.empty()) {
        written.push_back(detail::summary_path(out));
        detail::write_file(written.back(), csv.summary);
    }
    return written;
}

}  // namespace lel
