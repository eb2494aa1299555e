#include "secforage/social.hpp"

#include <algorithm>

#include "secforage/errors.hpp"

namespace secforage {

void SocialParams::validate() const {
    if (transfer_rate < 0) throw ConfigError("transfer_rates: values must be >= 0");
    if (!(transfer_noise >= 0.0 && transfer_noise <= 1.0))
        throw ConfigError("transfer_noises: values must be in [0, 1]");
    if (refractory_steps < 0) throw ConfigError("refractory_steps: must be >= 0");
}

bool is_transfer_episode(int episode_index, const SocialParams& params) {
    if (params.transfer_rate <= 0) return false;
    return episode_index % params.transfer_rate == 0;
}

std::optional<EpisodicSequence> select_memory_for_sharing(const AgentMemory& memory, Rng& rng) {
    double total = 0.0;
    for (std::size_t i = 0; i < memory.ltm_size(); ++i) total += std::max(0.0, memory.ltm_at(i).reward);
    if (memory.ltm_size() == 0 || !(total > 0.0)) return std::nullopt;
    const double target = rng.uniform() * total;
    double cumulative = 0.0;
    std::size_t chosen = memory.ltm_size() - 1;
    for (std::size_t i = 0; i < memory.ltm_size(); ++i) {
        const double r = std::max(0.0, memory.ltm_at(i).reward);
        if (r <= 0.0) continue;
        cumulative += r;
        chosen = i;
        if (target < cumulative) break;
    }
    return memory.ltm_at(chosen);
}

Transmission transmit(const EpisodicSequence& sequence, const SocialParams& params, Rng& rng) {
    if (sequence.couplets.empty()) throw ContractViolation("transmit: empty sequence");
    Transmission out;
    if (params.transfer_noise <= 0.0) {
        out.received = sequence;
        return out;
    }
    std::vector<Couplet> kept;
    kept.reserve(sequence.couplets.size());
    for (const Couplet& c : sequence.couplets) {
        if (rng.bernoulli(params.transfer_noise)) ++out.elements_dropped;
        else kept.push_back(c);
    }
    if (!kept.empty()) out.received = EpisodicSequence::make(std::move(kept), sequence.reward);
    return out;
}

std::vector<TransferEvent> social_learning_phase(const WorldState& world, std::span<AgentMemory> agents,
                                                 const SocialParams& params, int episode_index, int timestep,
                                                 RefractoryClocks& clocks, SocialStreams& streams) {
    std::vector<TransferEvent> events;
    if (!is_transfer_episode(episode_index, params)) return events;
    if (agents.size() != world.agents.size()) throw ContractViolation("social_learning_phase: agent count mismatch");
    clocks.tick();
    // Stores are applied after every sender has chosen, so that exchanges
    // within one timestep are simultaneous.
    std::vector<std::pair<std::size_t, EpisodicSequence>> deliveries;
    for (std::size_t sender = 0; sender < agents.size(); ++sender) {
        for (std::size_t receiver : visible_agents(world, sender)) {
            if (clocks[sender] > 0) break;
            auto chosen = select_memory_for_sharing(agents[sender], streams.selection);
            if (!chosen) break;
            Transmission tx = transmit(*chosen, params, streams.noise);
            TransferEvent ev;
            ev.episode = episode_index;
            ev.timestep = timestep;
            ev.sender = sender;
            ev.receiver = receiver;
            ev.original_hash = chosen->content_hash;
            ev.original_length = chosen->length();
            ev.elements_dropped = tx.elements_dropped;
            ev.aborted = !tx.received;
            if (tx.received) {
                ev.received_hash = tx.received->content_hash;
                deliveries.emplace_back(receiver, std::move(*tx.received));
            }
            clocks.start(sender, params.refractory_steps);
            events.push_back(ev);
        }
    }
    for (auto& [receiver, seq] : deliveries) agents[receiver].store(std::move(seq));
    return events;
}

}  // namespace secforage
