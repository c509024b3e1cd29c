#pragma once
// config.hpp - experiment configuration: parsing, validation and canonical printing.
//
// Format: sections in brackets, `key = value` lines, `#` comments. A key with an empty
// value takes the following indented lines as table rows:
//
//   [source]
//   pmf = 0.5 0.5
//
//   [distortion]
//   table =
//       0 1
//       1 0
//
//   [channel]
//   mode = rd                  # rd | forward | test
//   target_distortion = 0.2    # mode = rd
//   matrix =                   # forward: rows P_{Y|X}(.|x); test: rows P_{X|Y}(.|y)
//       0.89 0.11
//       0.11 0.89
//   output_pmf = 0.5 0.5       # mode = test: P_Y
//
//   [experiment]
//   n_list = 4 6 8
//   rate_list = 0.9 0.2
//   trials = 20                # optional; per-subcommand default otherwise
//   master_seed = 1
//   output = out.csv           # optional
//
//   [rd]                       # optional, used by rd-curve
//   slopes = 0.5 1 2
//   distortions = 0.05 0.2
//   tol = 1e-6

#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "lel/error.hpp"
#include "lel/finite_prob.hpp"
#include "lel/rd_solver.hpp"

namespace lel {

enum class ChannelMode { rd, forward, test };

struct ExperimentConfig {
    std::optional<Pmf> source;
    std::optional<DistortionMeasure> distortion;
    ChannelMode channel_mode = ChannelMode::rd;
    std::optional<double> target_distortion;
    std::optional<Channel> channel_matrix;
    std::optional<Pmf> output_pmf;
    std::vector<std::size_t> n_list;
    std::vector<double> rate_list;
    std::optional<std::size_t> trials;
    std::uint64_t master_seed = 1;
    std::string output;
    std::vector<double> slopes;
    std::vector<double> distortions;
    double rd_tol = 1e-6;

    friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

/// Shortest decimal text that parses back to the same double.
inline std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

namespace detail {

inline std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline std::vector<std::string_view> split_ws(std::string_view s) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
        const std::size_t b = i;
        while (i < s.size() && s[i] != ' ' && s[i] != '\t') ++i;
        if (i > b) out.push_back(s.substr(b, i - b));
    }
    return out;
}

inline double parse_double(std::string_view tok, std::size_t line) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc{} || ptr != tok.data() + tok.size()) {
        throw ConfigError(line, "expected a number, got '" + std::string(tok) + "'");
    }
    return v;
}

inline std::uint64_t parse_uint(std::string_view tok, std::size_t line) {
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc{} || ptr != tok.data() + tok.size()) {
        throw ConfigError(line, "expected a nonnegative integer, got '" + std::string(tok) + "'");
    }
    return v;
}

inline std::vector<double> parse_doubles(std::string_view s, std::size_t line) {
    std::vector<double> out;
    for (const auto tok : split_ws(s)) out.push_back(parse_double(tok, line));
    return out;
}

struct RawValue {
    std::size_t line = 0;
    std::string value;
    std::vector<std::pair<std::size_t, std::string>> rows;
};

using RawConfig = std::map<std::string, RawValue>;  // "section.key"

inline RawConfig tokenize(std::istream& in) {
    RawConfig raw;
    std::string section;
    std::string line_text;
    std::size_t line = 0;
    RawValue* open_table = nullptr;
    while (std::getline(in, line_text)) {
        ++line;
        std::string_view body = line_text;
        if (const auto hash = body.find('#'); hash != std::string_view::npos) {
            body = body.substr(0, hash);
        }
        const bool indented = !body.empty() && (body.front() == ' ' || body.front() == '\t');
        body = trim(body);
        if (body.empty()) continue;

        if (body.front() == '[') {
            if (body.back() != ']') throw ConfigError(line, "unterminated section header");
            section = std::string(trim(body.substr(1, body.size() - 2)));
            open_table = nullptr;
            continue;
        }
        const auto eq = body.find('=');
        if (eq == std::string_view::npos) {
            if (open_table == nullptr || !indented) {
                throw ConfigError(line, "expected 'key = value'");
            }
            open_table->rows.emplace_back(line, std::string(body));
            continue;
        }
        if (section.empty()) throw ConfigError(line, "key outside of any [section]");
        const std::string key = section + "." + std::string(trim(body.substr(0, eq)));
        if (raw.contains(key)) throw ConfigError(line, "duplicate key '" + key + "'");
        RawValue& v = raw[key];
        v.line = line;
        v.value = std::string(trim(body.substr(eq + 1)));
        open_table = v.value.empty() ? &v : nullptr;
    }
    return raw;
}

inline std::vector<std::vector<double>> table_rows(const RawValue& v, const std::string& key) {
    if (v.rows.empty()) throw ConfigError(v.line, "'" + key + "' needs indented table rows");
    std::vector<std::vector<double>> rows;
    for (const auto& [line, text] : v.rows) {
        rows.push_back(parse_doubles(text, line));
        if (rows.back().size() != rows.front().size()) {
            throw ConfigError(line, "row has " + std::to_string(rows.back().size()) +
                                        " entries, expected " + std::to_string(rows.front().size()));
        }
    }
    return rows;
}

template <typename Fn>
auto with_line(std::size_t line, Fn&& fn) -> decltype(fn()) {
    try {
        return fn();
    } catch (const ConfigError&) {
        throw;
    } catch (const ValidationError& e) {
        throw ConfigError(line, e.what());
    }
}

}  // namespace detail

inline ExperimentConfig parse_config(std::istream& in) {
    using namespace detail;
    RawConfig raw = tokenize(in);
    ExperimentConfig cfg;

    auto take = [&](const std::string& key) -> std::optional<RawValue> {
        auto it = raw.find(key);
        if (it == raw.end()) return std::nullopt;
        RawValue v = std::move(it->second);
        raw.erase(it);
        return v;
    };
    auto scalar = [](const RawValue& v, const std::string& key) -> const std::string& {
        if (v.value.empty()) throw ConfigError(v.line, "'" + key + "' needs a value");
        if (!v.rows.empty()) throw ConfigError(v.line, "'" + key + "' does not take table rows");
        return v.value;
    };

    if (auto v = take("source.pmf")) {
        const auto probs = parse_doubles(scalar(*v, "source.pmf"), v->line);
        cfg.source = with_line(v->line, [&] { return Pmf(probs); });
        if (probs.size() > kMaxAlphabet) throw ConfigError(v->line, "alphabet larger than 256");
    }
    if (auto v = take("distortion.table")) {
        const auto rows = table_rows(*v, "distortion.table");
        cfg.distortion = with_line(v->line, [&] { return DistortionMeasure(rows); });
        if (cfg.source && cfg.distortion->size_x() != cfg.source->size()) {
            throw ConfigError(v->line, "distortion table has " +
                                           std::to_string(cfg.distortion->size_x()) +
                                           " rows but the source has " +
                                           std::to_string(cfg.source->size()) + " symbols");
        }
    }
    if (auto v = take("channel.mode")) {
        const std::string& m = scalar(*v, "channel.mode");
        if (m == "rd") {
            cfg.channel_mode = ChannelMode::rd;
        } else if (m == "forward") {
            cfg.channel_mode = ChannelMode::forward;
        } else if (m == "test") {
            cfg.channel_mode = ChannelMode::test;
        } else {
            throw ConfigError(v->line, "channel.mode must be rd, forward or test, got '" + m + "'");
        }
    }
    if (auto v = take("channel.target_distortion")) {
        cfg.target_distortion = parse_double(scalar(*v, "channel.target_distortion"), v->line);
    }
    if (auto v = take("channel.matrix")) {
        const auto rows = table_rows(*v, "channel.matrix");
        cfg.channel_matrix = with_line(v->line, [&] { return Channel(rows); });
    }
    if (auto v = take("channel.output_pmf")) {
        const auto probs = parse_doubles(scalar(*v, "channel.output_pmf"), v->line);
        cfg.output_pmf = with_line(v->line, [&] { return Pmf(probs); });
    }

    auto n_list = take("experiment.n_list");
    if (!n_list) throw ConfigError(0, "missing required key experiment.n_list");
    for (const auto tok : split_ws(scalar(*n_list, "experiment.n_list"))) {
        const auto n = parse_uint(tok, n_list->line);
        if (n == 0) throw ConfigError(n_list->line, "blocklengths must be >= 1");
        cfg.n_list.push_back(static_cast<std::size_t>(n));
    }
    auto rate_list = take("experiment.rate_list");
    if (!rate_list) throw ConfigError(0, "missing required key experiment.rate_list");
    cfg.rate_list = parse_doubles(scalar(*rate_list, "experiment.rate_list"), rate_list->line);
    for (const double r : cfg.rate_list) {
        if (!(r >= 0.0) || !std::isfinite(r)) {
            throw ConfigError(rate_list->line, "rates must be finite and >= 0");
        }
    }
    if (auto v = take("experiment.trials")) {
        cfg.trials = static_cast<std::size_t>(parse_uint(scalar(*v, "experiment.trials"), v->line));
        if (*cfg.trials == 0) throw ConfigError(v->line, "trials must be >= 1");
    }
    if (auto v = take("experiment.master_seed")) {
        cfg.master_seed = parse_uint(scalar(*v, "experiment.master_seed"), v->line);
    }
    if (auto v = take("experiment.output")) cfg.output = scalar(*v, "experiment.output");

    if (auto v = take("rd.slopes")) {
        cfg.slopes = parse_doubles(scalar(*v, "rd.slopes"), v->line);
        for (const double s : cfg.slopes) {
            if (!(s >= 0.0)) throw ConfigError(v->line, "slopes must be >= 0");
        }
    }
    if (auto v = take("rd.distortions")) {
        cfg.distortions = parse_doubles(scalar(*v, "rd.distortions"), v->line);
    }
    if (auto v = take("rd.tol")) {
        cfg.rd_tol = parse_double(scalar(*v, "rd.tol"), v->line);
        if (!(cfg.rd_tol > 0.0)) throw ConfigError(v->line, "rd.tol must be > 0");
    }

    if (!raw.empty()) {
        const auto& [key, v] = *raw.begin();
        throw ConfigError(v.line, "unknown key '" + key + "'");
    }
    if (cfg.n_list.empty()) throw ConfigError(n_list->line, "experiment.n_list is empty");
    if (cfg.rate_list.empty()) throw ConfigError(rate_list->line, "experiment.rate_list is empty");
    return cfg;
}

inline ExperimentConfig parse_config(const std::string& text) {
    std::istringstream in(text);
    return parse_config(in);
}

inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(0, "cannot open config file " + path);
    return parse_config(in);
}

/// Canonical text form; parse_config(to_text(c)) == c.
inline std::string to_text(const ExperimentConfig& cfg) {
    std::ostringstream os;
    auto list = [&](std::span<const double> v) {
        for (std::size_t i = 0; i < v.size(); ++i) os << (i ? " " : "") << format_double(v[i]);
    };
    auto table = [&](std::span<const double> data, std::size_t cols) {
        for (std::size_t i = 0; i < data.size(); i += cols) {
            os << "    ";
            list(data.subspan(i, cols));
            os << "\n";
        }
    };
    if (cfg.source) {
        os << "[source]\npmf = ";
        list(cfg.source->probs());
        os << "\n\n";
    }
    if (cfg.distortion) {
        os << "[distortion]\ntable =\n";
        table(cfg.distortion->table(), cfg.distortion->size_y());
        os << "\n";
    }
    os << "[channel]\nmode = "
       << (cfg.channel_mode == ChannelMode::rd        ? "rd"
           : cfg.channel_mode == ChannelMode::forward ? "forward"
                                                      : "test")
       << "\n";
    if (cfg.target_distortion) os << "target_distortion = " << format_double(*cfg.target_distortion) << "\n";
    if (cfg.channel_matrix) {
        os << "matrix =\n";
        table(cfg.channel_matrix->data(), cfg.channel_matrix->output_size());
    }
    if (cfg.output_pmf) {
        os << "output_pmf = ";
        list(cfg.output_pmf->probs());
        os << "\n";
    }
    os << "\n[experiment]\nn_list =";
    for (const auto n : cfg.n_list) os << " " << n;
    os << "\nrate_list = ";
    list(cfg.rate_list);
    os << "\n";
    if (cfg.trials) os << "trials = " << *cfg.trials << "\n";
    os << "master_seed = " << cfg.master_seed << "\n";
    if (!cfg.output.empty()) os << "output = " << cfg.output << "\n";
    os << "\n[rd]\n";
    if (!cfg.slopes.empty()) {
        os << "slopes = ";
        list(cfg.slopes);
        os << "\n";
    }
    if (!cfg.distortions.empty()) {
        os << "distortions = ";
        list(cfg.distortions);
        os << "\n";
    }
    os << "tol = " << format_double(cfg.rd_tol) << "\n";
    return os.str();
}

}  // namespace lel
