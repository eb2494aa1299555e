#include "cli.hpp"

#include <filesystem>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "secforage/config.hpp"
#include "secforage/errors.hpp"
#include "secforage/results_io.hpp"

namespace secforage::cli {

namespace fs = std::filesystem;

namespace {

std::vector<fs::path> runs_under(const fs::path& in) {
    if (fs::exists(in / kRunFile)) return {in};
    auto runs = find_runs(in);
    if (runs.empty()) throw DataError(in.string() + ": no runs found");
    return runs;
}

struct RunArgs {
    std::string config;
    std::vector<std::uint64_t> seeds;
    std::string out;
    std::optional<int> workers;
    std::optional<int> episodes;
    bool force = false;
    bool quiet = false;
};

int cmd_run(const RunArgs& a, std::ostream& out) {
    ExperimentConfig config = a.config.empty() ? ExperimentConfig{} : load_config(a.config);
    if (!a.seeds.empty()) config.seeds = a.seeds;
    if (!a.out.empty()) config.output_dir = a.out;
    if (a.workers) config.workers = *a.workers;
    if (a.episodes) config.episodes = *a.episodes;
    config.validate();
    SweepOptions options;
    options.force = a.force;
    if (!a.quiet) options.log = [&out](const std::string& line) { out << line << '\n' << std::flush; };
    const auto rows = run_sweep(config, options);
    out << rows.size() << " runs written to " << config.output_dir << '\n';
    return kExitOk;
}

int cmd_metrics(const std::string& in, std::ostream& out) {
    out << "condition,seed,reward_evenness,relative_diversity_mean,group_diversity,group_alignment,"
           "memory_distribution,matches_stored\n";
    for (const auto& dir : runs_under(in)) {
        const StoredRun run = read_run(dir, true);
        const MetricsReport m = recompute_final_metrics(run);
        const bool same = !run.checkpoints.empty() && run.checkpoints.back().report == m;
        out << run.condition.id() << ',' << run.seed << ',' << format_double(m.reward_evenness) << ','
            << format_double(m.relative_diversity_mean) << ',' << format_double(m.group_diversity) << ','
            << format_double(m.group_alignment) << ',' << format_double(m.memory_distribution) << ','
            << (same ? "yes" : "no") << '\n';
    }
    return kExitOk;
}

int cmd_validate(const std::string& in, std::ostream& out) {
    bool all = true;
    for (const auto& dir : runs_under(in)) {
        for (const CheckResult& c : validate_run(dir)) {
            out << (c.passed ? "PASS " : "FAIL ") << dir.string() << ' ' << c.name << ": " << c.detail << '\n';
            all = all && c.passed;
        }
    }
    return all ? kExitOk : kExitRuntime;
}

int cmd_summarize(const std::string& in, const std::string& dest, std::ostream& out) {
    const fs::path target = dest.empty() ? fs::path(in) : fs::path(dest);
    const std::size_t rows = summarize(in, target);
    out << rows << " checkpoint rows written to " << (target / "checkpoints.csv").string() << '\n';
    return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Episodic-memory sharing foragers: simulation sweeps and result tools", "secforage"};
    app.require_subcommand(1);

    RunArgs run_args;
    auto* run = app.add_subcommand("run", "Execute the condition x seed sweep from a config file");
    run->add_option("--config", run_args.config, "JSON config (defaults when omitted)")->check(CLI::ExistingFile);
    run->add_option("--seeds,--seed", run_args.seeds, "Seed list, overrides the config")->delimiter(',');
    run->add_option("--out", run_args.out, "Output directory, overrides the config");
    run->add_option("--workers", run_args.workers, "Parallel runs");
    run->add_option("--episodes", run_args.episodes, "Episodes per run");
    run->add_flag("--force", run_args.force, "Replace existing run directories");
    run->add_flag("--quiet", run_args.quiet, "No per-run progress lines");

    std::string metrics_in;
    auto* metrics = app.add_subcommand("metrics", "Recompute final metrics from stored snapshots");
    metrics->add_option("--in", metrics_in, "Run directory or output tree")->required();

    std::string validate_in;
    auto* validate = app.add_subcommand("validate", "Check stored runs against the model invariants");
    validate->add_option("--in", validate_in, "Run directory or output tree")->required();

    std::string summarize_in, summarize_out;
    auto* summarize_cmd = app.add_subcommand("summarize", "Write figure-ready CSVs for an output tree");
    summarize_cmd->add_option("--in", summarize_in, "Output tree")->required();
    summarize_cmd->add_option("--out", summarize_out, "Destination (defaults to --in)");

    auto* config_cmd = app.add_subcommand("config", "Print the default config as JSON");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kExitConfig;
    }

    try {
        if (*run) return cmd_run(run_args, out);
        if (*metrics) return cmd_metrics(metrics_in, out);
        if (*validate) return cmd_validate(validate_in, out);
        if (*summarize_cmd) return cmd_summarize(summarize_in, summarize_out, out);
        if (*config_cmd) {
            out << dump_config(ExperimentConfig{});
            return kExitOk;
        }
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
    return kExitOk;
}

}  // namespace secforage::cli
