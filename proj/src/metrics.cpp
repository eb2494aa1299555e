#include "secforage/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>

#include "secforage/errors.hpp"
#include "secforage/sec_agent.hpp"

namespace secforage {

namespace {

std::vector<std::uint64_t> unique_sorted(std::vector<std::uint64_t> v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
}

}  // namespace

MemorySnapshot MemorySnapshot::capture(std::span<const AgentMemory> agents) {
    MemorySnapshot s;
    for (const AgentMemory& m : agents) {
        s.hashes.push_back(m.ltm_hashes());
        s.acquired_count.push_back(m.acquired_count());
    }
    return s;
}

double relative_diversity(const MemorySnapshot& snapshot, std::size_t agent_index) {
    if (agent_index >= snapshot.agents()) throw ContractViolation("relative_diversity: agent index out of range");
    const auto& h = snapshot.hashes[agent_index];
    if (h.empty()) return 1.0;
    return static_cast<double>(unique_sorted(h).size()) / static_cast<double>(h.size());
}

double mean_relative_diversity(const MemorySnapshot& snapshot) {
    if (snapshot.agents() == 0) return 1.0;
    double sum = 0.0;
    for (std::size_t i = 0; i < snapshot.agents(); ++i) sum += relative_diversity(snapshot, i);
    return sum / static_cast<double>(snapshot.agents());
}

double group_diversity(const MemorySnapshot& snapshot) {
    std::vector<std::uint64_t> pool;
    for (const auto& h : snapshot.hashes) pool.insert(pool.end(), h.begin(), h.end());
    if (pool.empty()) return 1.0;
    const double total = static_cast<double>(pool.size());
    return static_cast<double>(unique_sorted(std::move(pool)).size()) / total;
}

double group_alignment(const MemorySnapshot& snapshot) {
    const std::size_t k = snapshot.agents();
    if (k < 2) return 0.0;
    std::vector<std::vector<std::uint64_t>> sets;
    for (const auto& h : snapshot.hashes) sets.push_back(unique_sorted(h));
    double sum = 0.0;
    std::size_t pairs = 0;
    std::vector<std::uint64_t> scratch;
    for (std::size_t a = 0; a < k; ++a) {
        for (std::size_t b = a + 1; b < k; ++b, ++pairs) {
            scratch.clear();
            std::set_intersection(sets[a].begin(), sets[a].end(), sets[b].begin(), sets[b].end(),
                                  std::back_inserter(scratch));
            const std::size_t inter = scratch.size();
            const std::size_t uni = sets[a].size() + sets[b].size() - inter;
            if (uni > 0) sum += static_cast<double>(inter) / static_cast<double>(uni);
        }
    }
    return sum / static_cast<double>(pairs);
}

double memory_distribution(const MemorySnapshot& snapshot) {
    const std::size_t k = snapshot.agents();
    if (k < 2) return 0.0;
    std::unordered_map<std::uint64_t, std::size_t> holders;
    for (const auto& h : snapshot.hashes)
        for (std::uint64_t u : unique_sorted(h)) ++holders[u];
    if (holders.empty()) return 0.0;
    // One integer ratio: independent of map order and correctly rounded.
    std::uint64_t spread = 0;
    for (const auto& [hash, count] : holders) spread += count - 1;
    return static_cast<double>(spread) / static_cast<double>((k - 1) * holders.size());
}

double reward_evenness(std::span<const double> totals) {
    if (totals.empty()) return 1.0;
    const auto [lo, hi] = std::minmax_element(totals.begin(), totals.end());
    if (*hi <= 0.0) return 1.0;
    return *lo / *hi;
}

double reward_evenness_gini(std::span<const double> totals) {
    const std::size_t n = totals.size();
    if (n == 0) return 1.0;
    const double sum = std::accumulate(totals.begin(), totals.end(), 0.0);
    if (sum <= 0.0) return 1.0;
    double abs_diff = 0.0;
    for (double x : totals)
        for (double y : totals) abs_diff += std::abs(x - y);
    const double gini = abs_diff / (2.0 * static_cast<double>(n) * sum);
    // Maximum Gini for n holders is (n-1)/n; rescale so evenness spans [0, 1].
    const double max_gini = n > 1 ? static_cast<double>(n - 1) / static_cast<double>(n) : 1.0;
    return std::clamp(1.0 - gini / max_gini, 0.0, 1.0);
}

double reward_evenness(std::span<const double> totals, EvennessMeasure measure) {
    return measure == EvennessMeasure::gini ? reward_evenness_gini(totals) : reward_evenness(totals);
}

std::optional<double> pearson_correlation(std::span<const double> xs, std::span<const double> ys) {
    if (xs.size() != ys.size() || xs.size() < 3) return std::nullopt;
    const double n = static_cast<double>(xs.size());
    const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
    const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double dx = xs[i] - mx;
        const double dy = ys[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx <= 0.0 || syy <= 0.0) return std::nullopt;
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

MetricsReport compute_metrics(const MemorySnapshot& snapshot, std::span<const double> cumulative_reward,
                              EvennessMeasure measure) {
    MetricsReport r;
    r.cumulative_reward.assign(cumulative_reward.begin(), cumulative_reward.end());
    r.reward_evenness = reward_evenness(cumulative_reward, measure);
    r.relative_diversity_mean = mean_relative_diversity(snapshot);
    r.group_diversity = group_diversity(snapshot);
    r.group_alignment = group_alignment(snapshot);
    r.memory_distribution = memory_distribution(snapshot);
    return r;
}

}  // namespace secforage
