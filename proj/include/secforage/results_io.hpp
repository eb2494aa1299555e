#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "secforage/experiment.hpp"
#include "secforage/snapshot.hpp"

namespace secforage {

/// Shortest decimal that reads back to the same double.
std::string format_double(double v);

/// Files of one run directory.
inline constexpr const char* kRewardsFile = "rewards.csv";
inline constexpr const char* kTransfersFile = "transfers.csv";
inline constexpr const char* kMetricsFile = "metrics.csv";
inline constexpr const char* kSnapshotFile = "ltm_final.snapshot";
inline constexpr const char* kRunFile = "run.json";

/// `<out>/<condition id>/<seed>`.
std::filesystem::path run_directory(const std::filesystem::path& out, const Condition& c, std::uint64_t seed);

/// Writes the five run files into `dir`, which must exist. The snapshot is
/// written only when the record kept its final LTM.
void write_run(const std::filesystem::path& dir, const RunRecord& record, const ExperimentConfig& config);

/// Everything stored for one run. `snapshot` is loaded on request.
struct StoredRun {
    std::filesystem::path dir;
    Condition condition;
    std::uint64_t seed = 0;
    int episodes = 0;
    int max_steps = 0;
    std::size_t agents = 0;
    int fruits = 0;
    std::size_t ltm_capacity = 0;
    std::string config_hash;
    EvennessMeasure evenness = EvennessMeasure::min_max;
    std::vector<EpisodeResult> episode_results;
    std::vector<TransferEvent> transfers;
    std::vector<Checkpoint> checkpoints;
    std::optional<LtmSnapshot> snapshot;

    double total_reward() const;
};

/// Throws DataError naming the file on any schema mismatch.
StoredRun read_run(const std::filesystem::path& dir, bool load_snapshot = false);

/// Run directories under an output tree, sorted by condition id then seed.
std::vector<std::filesystem::path> find_runs(const std::filesystem::path& out);

/// One row of summary.csv: a run's totals and final metrics.
struct SummaryRow {
    Condition condition;
    std::uint64_t seed = 0;
    double total_reward = 0.0;
    std::size_t transfers = 0;
    MetricsReport final_metrics;
};

SummaryRow summarize_record(const RunRecord& record);

/// summary.csv and summary.json; rows are sorted by condition id then seed.
void write_summary(const std::filesystem::path& out, std::vector<SummaryRow> rows, const ExperimentConfig& config);

struct SweepOptions {
    bool force = false;  // replace existing run directories and summaries
    std::function<void(const std::string&)> log;  // progress lines, may be empty
    std::function<void(const RunRecord&)> on_record;  // called before a run is persisted; may throw
};

/// Runs every (condition, seed) on `config.workers` threads and persists each
/// run atomically (temp directory + rename). A failing run leaves completed
/// runs intact and the summary unwritten; the first failure is rethrown
/// after all workers stop. Refuses existing outputs unless forced.
std::vector<SummaryRow> run_sweep(const ExperimentConfig& config, const SweepOptions& options = {});

/// Figure-ready tables for an output tree:
///   checkpoints.csv   one row per (condition, checkpoint): mean/sd over seeds
///   curves.csv        one row per (condition, episode): mean/sd group reward
///   correlations.csv  pooled per-run final points, one row per noise level
/// Returns the number of checkpoint rows.
std::size_t summarize(const std::filesystem::path& out, const std::filesystem::path& dest);

/// Final metrics recomputed from the stored snapshot and rewards.
MetricsReport recompute_final_metrics(const StoredRun& run);

struct CheckResult {
    std::string name;
    bool passed = false;
    std::string detail;
};

/// Invariant checks on one stored run: reward bounds, episode lengths,
/// episode count, noise-free transfer fidelity, snapshot hashes and the
/// final metrics row against a recomputation.
std::vector<CheckResult> validate_run(const std::filesystem::path& dir);

}  // namespace secforage
