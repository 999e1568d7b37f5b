/**
 * @file ionsim_cli.cpp
 * @brief Command-line front end for the experiment runner.
 *
 * Subcommands: run, validate, list-presets, resume. A sweep is named either
 * by --config (JSON file) or by --preset; --out overrides the configured
 * output directory and --seed overrides the configured seed. Exit codes:
 * 0 success, 1 config error, 2 every grid point failed, 3 partial results.
 */

#include "ionsim/experiment.hpp"

#include "CLI11.hpp"

#include <cstdio>
#include <optional>
#include <string>

namespace {

struct CommonArgs {
    std::string config_path;
    std::string preset;
    std::string out_dir;
    int workers = 1;
    std::uint64_t seed_value = 0;
    CLI::Option* seed_opt = nullptr;
};

void add_source_options(CLI::App* cmd, CommonArgs& args) {
    auto* c = cmd->add_option("--config", args.config_path, "Config JSON file");
    auto* p = cmd->add_option("--preset", args.preset, "Shipped preset name");
    c->excludes(p);
}

void add_run_options(CLI::App* cmd, CommonArgs& args) {
    add_source_options(cmd, args);
    cmd->add_option("--out", args.out_dir, "Output directory (overrides config)");
    cmd->add_option("--workers", args.workers, "Worker threads")
        ->check(CLI::PositiveNumber);
    args.seed_opt = cmd->add_option("--seed", args.seed_value,
                                    "Seed override (overrides config)");
}

/// Load from file or preset; prints the problem and returns nullopt on any
/// config error so callers can exit 1.
std::optional<ionsim::ExperimentConfig> resolve_config(const CommonArgs& args) {
    if (args.config_path.empty() == args.preset.empty()) {
        std::fprintf(stderr, "error: exactly one of --config and --preset is required\n");
        return std::nullopt;
    }
    try {
        ionsim::ExperimentConfig cfg =
            args.config_path.empty() ? ionsim::preset_config(args.preset)
                                     : ionsim::load_config(args.config_path);
        if (!args.out_dir.empty()) cfg.output.directory = args.out_dir;
        if (args.seed_opt && args.seed_opt->count() > 0) cfg.seed = args.seed_value;
        return cfg;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return std::nullopt;
    }
}

/// Print diagnostics; returns false when the config has errors.
bool report_validation(const ionsim::ExperimentConfig& cfg) {
    ionsim::ValidationReport report = ionsim::validate_config(cfg);
    for (const std::string& w : report.warnings())
        std::fprintf(stderr, "warning: %s\n", w.c_str());
    for (const std::string& e : report.errors())
        std::fprintf(stderr, "error: %s\n", e.c_str());
    return report.ok();
}

int run_sweep(const CommonArgs& args, bool resume) {
    std::optional<ionsim::ExperimentConfig> cfg = resolve_config(args);
    if (!cfg) return 1;
    if (!report_validation(*cfg)) return 1;
    ionsim::ExperimentResult result;
    try {
        result = ionsim::run_experiment(*cfg, args.workers, resume);
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    std::printf("config %s: %d points, %d failed%s\n", result.hash_hex.c_str(),
                static_cast<int>(result.points.size()), result.failures,
                result.partial ? " (partial)" : "");
    for (const std::string& f : result.written_files)
        std::printf("wrote %s\n", f.c_str());
    return ionsim::exit_code_for(result);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Trapped-ion spin-model sweep runner"};
    app.require_subcommand(1);

    CommonArgs run_args, validate_args, resume_args;

    CLI::App* run = app.add_subcommand("run", "Run a sweep and write results");
    add_run_options(run, run_args);

    CLI::App* validate =
        app.add_subcommand("validate", "Check a config without running it");
    add_source_options(validate, validate_args);

    CLI::App* list =
        app.add_subcommand("list-presets", "List shipped sweep definitions");

    CLI::App* resume = app.add_subcommand(
        "resume", "Re-run a sweep, reusing cached points where valid");
    add_run_options(resume, resume_args);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    if (list->parsed()) {
        for (const std::string& name : ionsim::preset_names())
            std::printf("%s\n", name.c_str());
        return 0;
    }
    if (validate->parsed()) {
        std::optional<ionsim::ExperimentConfig> cfg = resolve_config(validate_args);
        if (!cfg) return 1;
        if (!report_validation(*cfg)) return 1;
        std::printf("OK %s\n", ionsim::config_hash_hex(*cfg).c_str());
        return 0;
    }
    if (resume->parsed()) return run_sweep(resume_args, true);
    return run_sweep(run_args, false);
}
