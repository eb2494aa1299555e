#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "secforage/env.hpp"
#include "secforage/metrics.hpp"
#include "secforage/sec_agent.hpp"
#include "secforage/social.hpp"

namespace secforage {

/// One cell of the sweep grid.
struct Condition {
    int stm_length = 20;
    int transfer_rate = 0;
    double transfer_noise = 0.0;

    /// Directory-safe id, e.g. "stm20_tr10_tn0.1". Sorting ids groups runs
    /// deterministically.
    std::string id() const;
    friend bool operator==(const Condition&, const Condition&) = default;
};

struct ExperimentConfig {
    int episodes = 5000;
    EnvConfig env;  // env.max_steps is max_steps_per_episode
    std::vector<int> stm_lengths{10, 20, 30};
    std::vector<int> transfer_rates{0, 1, 10, 50};
    std::vector<double> transfer_noises{0.0, 0.1};
    std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
    int metric_checkpoint_interval = 100;
    int ltm_capacity = static_cast<int>(AgentMemory::kDefaultLtmCapacity);
    int refractory_steps = 25;
    SecParams sec;
    EvennessMeasure evenness = EvennessMeasure::min_max;
    std::string output_dir = "results";
    int workers = 1;

    /// Throws ConfigError naming the offending field.
    void validate() const;
    /// stm x rate x noise, in that nesting order.
    std::vector<Condition> conditions() const;
    SocialParams social_params(const Condition& c) const;
    /// True when `episode_index` (0-based) closes a checkpoint window; the
    /// final episode always does.
    bool is_checkpoint(int episode_index) const;
    int checkpoint_count() const;
};

struct EpisodeResult {
    std::vector<double> rewards;  // per agent
    int steps = 0;
};

struct Checkpoint {
    int episode = 0;  // episodes completed
    MetricsReport report;
};

struct RunRecord {
    Condition condition;
    std::uint64_t seed = 0;
    std::vector<EpisodeResult> episodes;
    std::vector<TransferEvent> transfers;
    std::vector<Checkpoint> checkpoints;
    MemorySnapshot final_snapshot;
    std::vector<std::vector<EpisodicSequence>> final_ltm;  // empty unless kept

    double total_reward() const;
    std::vector<double> cumulative_rewards() const;
};

struct RunOptions {
    bool keep_final_ltm = true;
};

/// Simulates every episode of one (condition, seed). Bit-reproducible.
RunRecord run_single(const ExperimentConfig& config, const Condition& condition, std::uint64_t seed,
                     const RunOptions& options = {});

}  // namespace secforage
