#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace secforage {

class AgentMemory;

/// What the mnemonic metrics see: each agent's LTM as a multiset of
/// content hashes.
struct MemorySnapshot {
    std::vector<std::vector<std::uint64_t>> hashes;  // per agent, with multiplicity
    std::vector<std::uint64_t> acquired_count;       // per agent

    static MemorySnapshot capture(std::span<const AgentMemory> agents);
    std::size_t agents() const { return hashes.size(); }
    friend bool operator==(const MemorySnapshot&, const MemorySnapshot&) = default;
};

enum class EvennessMeasure { min_max, gini };

struct MetricsReport {
    std::vector<double> cumulative_reward;  // per agent
    double reward_evenness = 1.0;
    double relative_diversity_mean = 1.0;   // D_r averaged over agents
    double group_diversity = 1.0;           // D_g
    double group_alignment = 0.0;           // A_g
    double memory_distribution = 0.0;       // M_d
    friend bool operator==(const MetricsReport&, const MetricsReport&) = default;
};

/// D_r: unique / total in one agent's LTM; 1 for an empty LTM.
double relative_diversity(const MemorySnapshot& snapshot, std::size_t agent_index);
double mean_relative_diversity(const MemorySnapshot& snapshot);
/// D_g: unique / total over the concatenated group buffer; 1 when all empty.
double group_diversity(const MemorySnapshot& snapshot);
/// A_g: mean pairwise Jaccard index of unique-hash sets (0 for two empty sets).
double group_alignment(const MemorySnapshot& snapshot);
/// M_d: mean over unique memories of (holders - 1) / (agents - 1); 0 for an empty pool.
double memory_distribution(const MemorySnapshot& snapshot);

/// min / max; 1 when every total is 0.
double reward_evenness(std::span<const double> totals);
/// 1 - Gini coefficient; 1 when every total is 0.
double reward_evenness_gini(std::span<const double> totals);
double reward_evenness(std::span<const double> totals, EvennessMeasure measure);

/// Product-moment correlation. nullopt for fewer than 3 points, mismatched
/// lengths or zero variance.
std::optional<double> pearson_correlation(std::span<const double> xs, std::span<const double> ys);

MetricsReport compute_metrics(const MemorySnapshot& snapshot, std::span<const double> cumulative_reward,
                              EvennessMeasure measure = EvennessMeasure::min_max);

}  // namespace secforage
