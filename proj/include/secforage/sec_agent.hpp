#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "secforage/env.hpp"
#include "secforage/rng.hpp"

namespace secforage {

struct Couplet {
    Observation state;
    Action action = Action::turn_left;
    friend bool operator==(const Couplet&, const Couplet&) = default;
};

/// Digest over the ordered couplet list. The reward is not part of a
/// memory's identity.
std::uint64_t content_hash(std::span<const Couplet> couplets);
std::string hash_to_hex(std::uint64_t h);
std::uint64_t hash_from_hex(const std::string& hex);

struct EpisodicSequence {
    std::vector<Couplet> couplets;
    double reward = 0.0;
    std::uint64_t content_hash = 0;

    static EpisodicSequence make(std::vector<Couplet> couplets, double reward);
    std::size_t length() const { return couplets.size(); }
    friend bool operator==(const EpisodicSequence&, const EpisodicSequence&) = default;
};

struct SecParams {
    double beta_i = 0.1;        // bias increment
    double beta_d = 0.05;       // bias decay
    double tau = 0.9;           // distance-to-reward discount
    double theta_prop = 0.98;   // relative similarity threshold
    double theta_abs = 0.995;   // absolute similarity threshold

    void validate() const;
    /// Only identical states can pass the absolute threshold.
    bool exact_match_only() const;
    friend bool operator==(const SecParams&, const SecParams&) = default;
};

/// Fraction of slots holding the same code.
double similarity(const Observation& a, const Observation& b);
/// Throws ContractViolation on length mismatch.
double similarity(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b);

struct EligibleElement {
    std::uint64_t sequence_id = 0;
    std::uint32_t index = 0;
    double similarity = 0.0;
    double eligibility = 0.0;
};

using ActionDistribution = std::array<double, kNumActions>;

/// How retrieval bias is stored.
///
/// `per_element` keeps (value, stamp) for every LTM element and works for any
/// thresholds. `aggregated` requires thresholds that admit only exact state
/// matches: a successor's bias then equals the decayed count of retrievals of
/// its predecessor's state since the sequence was stored, so it can be kept as
/// one accumulator per distinct state, and Q(s, .) is a sum over distinct
/// predecessor states instead of over every matching element.
enum class BiasEngine { automatic, aggregated, per_element };

/// STM ring buffer, FIFO-bounded LTM and the per-element retrieval bias.
///
/// Sequences get consecutive ids as they enter the LTM; eviction removes the
/// lowest id, so a live id maps to its deque slot by subtraction.
class AgentMemory {
public:
    static constexpr std::size_t kDefaultLtmCapacity = 5000;

    explicit AgentMemory(std::size_t stm_capacity, SecParams params = {},
                         std::size_t ltm_capacity = kDefaultLtmCapacity, BiasEngine engine = BiasEngine::automatic);

    void record_step(const Observation& state, Action action);
    /// Moves the STM into the LTM with `reward` and clears the STM. Returns
    /// false (and counts a skipped consolidation) when the STM is empty.
    bool consolidate(double reward);
    /// Appends a sequence (own or received). Evicts the oldest at capacity.
    void store(EpisodicSequence sequence);
    void clear_stm() { stm_.clear(); }

    /// Elements passing both similarity thresholds, ordered by (sequence id,
    /// index). Side effect: the successor of every returned element gains
    /// beta_i, then every bias decays by (1 - beta_d).
    std::vector<EligibleElement> retrieve(const Observation& current);
    /// Same side effects as retrieve(); returns action_distribution() of the
    /// retrieved set without materialising it when the engine allows.
    ActionDistribution retrieve_distribution(const Observation& current);

    const SecParams& params() const { return params_; }
    BiasEngine engine() const { return engine_; }
    const std::deque<Couplet>& stm() const { return stm_; }
    std::size_t stm_capacity() const { return stm_capacity_; }
    std::size_t ltm_capacity() const { return ltm_capacity_; }
    std::size_t ltm_size() const { return ltm_.size(); }
    /// 0 = oldest.
    const EpisodicSequence& ltm_at(std::size_t pos) const { return ltm_[pos].sequence; }
    std::uint64_t ltm_id_at(std::size_t pos) const { return first_id_ + pos; }
    /// nullptr when the id was evicted or never existed.
    const EpisodicSequence* find(std::uint64_t sequence_id) const;
    double bias(std::uint64_t sequence_id, std::size_t index) const;
    std::vector<std::uint64_t> ltm_hashes() const;

    std::uint64_t acquired_count() const { return acquired_; }
    std::uint64_t skipped_consolidations() const { return skipped_; }
    std::uint64_t decision_steps() const { return clock_; }

private:
    using KeyId = std::uint32_t;
    static constexpr KeyId kNoKey = ~KeyId{0};

    /// A value that decays by (1 - beta_d) per retrieval since `stamp`.
    struct Decaying {
        double value = 0.0;
        std::uint64_t stamp = 0;
    };
    struct ElementRef {
        std::uint64_t sequence_id;
        std::uint32_t index;
    };
    struct PredecessorWeights {
        KeyId predecessor;
        std::uint32_t count = 0;
        std::array<double, kNumActions> weight{};
    };
    /// Everything known about one distinct observation.
    struct KeyStats {
        Observation key;
        std::uint32_t refs = 0;                 // elements using it as state or predecessor
        std::vector<ElementRef> elements;       // elements whose state this is, id order
        // aggregated engine only
        Decaying retrievals;                    // decayed beta_i-weighted retrieval count
        std::array<double, kNumActions> static_weight{};
        std::array<double, kNumActions> baseline{};  // decaying, shares baseline_stamp
        std::uint64_t baseline_stamp = 0;
        std::vector<PredecessorWeights> by_predecessor;
    };
    struct Stored {
        EpisodicSequence sequence;
        std::uint64_t stored_at = 0;
        std::vector<KeyId> keys;
        std::vector<double> baseline;   // aggregated: predecessor accumulator at store time
        std::vector<Decaying> bias;     // per_element only
    };

    double decay_pow(std::uint64_t age) const;
    double read(const Decaying& d) const { return d.value == 0.0 ? 0.0 : d.value * decay_pow(clock_ - d.stamp); }
    double element_weight(const Stored& s, std::size_t index) const;
    double element_bias(const Stored& s, std::size_t index) const;
    KeyId intern(const Observation& obs);
    void release(KeyId id);
    const KeyStats* lookup(const Observation& obs) const;
    void evict_oldest();
    void collect_exact(const Observation& current, std::vector<EligibleElement>& out) const;
    void collect_linear(const Observation& current, std::vector<EligibleElement>& out) const;
    void apply_retrieval_side_effects(const Observation& current, const std::vector<EligibleElement>& out);
    ActionDistribution aggregated_distribution(const KeyStats& stats) const;

    std::size_t stm_capacity_;
    std::size_t ltm_capacity_;
    SecParams params_;
    BiasEngine engine_;
    bool exact_;
    double decay_;
    std::vector<double> decay_table_;
    std::deque<Couplet> stm_;
    std::deque<Stored> ltm_;
    std::uint64_t first_id_ = 0;
    struct ObservationHash {
        std::size_t operator()(const Observation& o) const { return static_cast<std::size_t>(o.hash()); }
    };
    std::unordered_map<Observation, KeyId, ObservationHash> key_ids_;
    std::vector<KeyStats> keys_;
    std::vector<KeyId> free_keys_;
    std::uint64_t acquired_ = 0;
    std::uint64_t skipped_ = 0;
    std::uint64_t clock_ = 0;
};

/// Free-function forms of the memory operations.
inline std::vector<EligibleElement> retrieve(AgentMemory& memory, const Observation& current) {
    return memory.retrieve(current);
}

/// Q(s, .) over the eligible set; uniform when the set is empty.
/// Weighted by eligibility, reward / max eligible reward and
/// tau^(distance to the sequence end), summed per action and normalised.
ActionDistribution action_distribution(std::span<const EligibleElement> eligible, const AgentMemory& memory);

/// Inverse-CDF draw from a distribution with one uniform variate.
Action sample_action(const ActionDistribution& q, Rng& rng);

Action select_action(AgentMemory& memory, const Observation& current, Rng& rng);

}  // namespace secforage
