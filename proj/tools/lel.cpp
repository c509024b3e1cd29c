// lel - experiment harness for the likelihood encoder.
//
//   lel <subcommand> --config PATH [--out PATH] [--seed U64] [--trials N] [--jobs N]
//
// Subcommands: rd-curve, soft-cover, distortion, proof-check, codebook.
// Exit codes: 0 success, 1 validation error, 2 runtime error.

#include <cstdint>
#include <exception>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "lel/lel.hpp"

namespace {

constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;

struct Flags {
    std::string config;
    std::string out;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> trials;
    std::size_t jobs = 1;
    std::string codebook;
};

void add_common(CLI::App* sub, Flags& f, bool replay) {
    sub->add_option("--config", f.config, "experiment config file")->required();
    sub->add_option("--out", f.out, "output path (defaults to experiment.output, else stdout)");
    sub->add_option("--seed", f.seed, "master seed, overrides experiment.master_seed");
    sub->add_option("--trials", f.trials, "trials per sweep point")->check(CLI::PositiveNumber);
    sub->add_option("--jobs", f.jobs, "worker threads")->check(CLI::PositiveNumber);
    if (replay) sub->add_option("--codebook", f.codebook, "replay a serialized codebook");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Likelihood-encoder simulation harness"};
    app.require_subcommand(1);
    Flags flags;

    struct Entry {
        lel::Subcommand cmd;
        const char* help;
        bool replay;
    };
    const std::vector<Entry> entries{
        {lel::Subcommand::rd_curve, "sweep the rate-distortion curve", false},
        {lel::Subcommand::soft_cover, "TV between codebook-induced and i.i.d. distributions", false},
        {lel::Subcommand::distortion, "Monte Carlo distortion of the full encoder/decoder", true},
        {lel::Subcommand::proof_check, "exact P-versus-Q quantities for one codebook", true},
        {lel::Subcommand::codebook, "generate and serialize a codebook", false},
    };
    std::vector<std::pair<CLI::App*, lel::Subcommand>> subs;
    for (const auto& e : entries) {
        CLI::App* sub = app.add_subcommand(std::string(lel::name(e.cmd)), e.help);
        add_common(sub, flags, e.replay);
        subs.emplace_back(sub, e.cmd);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kExitValidation;
    }

    lel::Subcommand cmd = lel::Subcommand::rd_curve;
    for (const auto& [sub, c] : subs) {
        if (sub->parsed()) cmd = c;
    }

    try {
        const lel::ExperimentConfig cfg = lel::load_config(flags.config);
        lel::RunOptions opts;
        opts.seed = flags.seed;
        opts.trials = flags.trials;
        opts.jobs = flags.jobs;
        opts.out = flags.out;
        opts.codebook_path = flags.codebook;
        for (const auto& path : lel::run(cmd, cfg, opts)) {
            std::cerr << "wrote " << path << "\n";
        }
    } catch (const lel::ValidationError& e) {
        std::cerr << "error: " << flags.config << ": " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return 0;
}
