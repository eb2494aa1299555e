#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "secforage/env.hpp"
#include "secforage/rng.hpp"
#include "secforage/sec_agent.hpp"

namespace secforage {

struct SocialParams {
    int transfer_rate = 0;        // 0 = never, k = every k-th episode
    double transfer_noise = 0.0;  // per-couplet drop probability
    int refractory_steps = 25;

    void validate() const;
    friend bool operator==(const SocialParams&, const SocialParams&) = default;
};

/// One transmission attempt. `aborted` marks a sequence that lost every
/// couplet in transit; nothing reached the receiver and received_hash is 0.
struct TransferEvent {
    int episode = 0;
    int timestep = 0;
    std::size_t sender = 0;
    std::size_t receiver = 0;
    std::uint64_t original_hash = 0;
    std::uint64_t received_hash = 0;
    std::size_t original_length = 0;
    std::size_t elements_dropped = 0;
    bool aborted = false;
    friend bool operator==(const TransferEvent&, const TransferEvent&) = default;
};

bool is_transfer_episode(int episode_index, const SocialParams& params);

/// Copy of one LTM sequence drawn with probability reward / sum(rewards).
/// nullopt when the LTM is empty or holds no positive reward.
std::optional<EpisodicSequence> select_memory_for_sharing(const AgentMemory& memory, Rng& rng);

struct Transmission {
    std::optional<EpisodicSequence> received;  // nullopt = aborted
    std::size_t elements_dropped = 0;
};

/// Drops each couplet independently with probability transfer_noise. Order
/// and reward survive; the hash is recomputed. No random draws when noise is 0.
Transmission transmit(const EpisodicSequence& sequence, const SocialParams& params, Rng& rng);

/// Per-agent cooldown after sending.
class RefractoryClocks {
public:
    explicit RefractoryClocks(std::size_t agents) : clocks_(agents, 0) {}
    void reset() { std::fill(clocks_.begin(), clocks_.end(), 0); }
    void tick() {
        for (int& c : clocks_)
            if (c > 0) --c;
    }
    int operator[](std::size_t agent) const { return clocks_[agent]; }
    void start(std::size_t agent, int steps) { clocks_[agent] = steps; }

private:
    std::vector<int> clocks_;
};

/// Random streams consumed by the sharing phase.
struct SocialStreams {
    Rng selection;
    Rng noise;
};

/// One timestep of sharing. Clocks tick first; then every ordered pair
/// (sender ascending, receiver ascending) with the receiver inside the
/// sender's view, the sender's clock at 0 and a non-empty sender LTM
/// produces one transmission. Senders restart their clock even when the
/// transmission aborts. Senders choose from their LTM as it was before the
/// phase; receivers store after all choices. Returns nothing outside
/// transfer episodes.
std::vector<TransferEvent> social_learning_phase(const WorldState& world, std::span<AgentMemory> agents,
                                                 const SocialParams& params, int episode_index, int timestep,
                                                 RefractoryClocks& clocks, SocialStreams& streams);

}  // namespace secforage
