#include "secforage/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <numeric>

#include "secforage/errors.hpp"

namespace secforage {

namespace {

std::string format_noise(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

}  // namespace

std::string Condition::id() const {
    return "stm" + std::to_string(stm_length) + "_tr" + std::to_string(transfer_rate) + "_tn" +
           format_noise(transfer_noise);
}

void ExperimentConfig::validate() const {
    if (episodes < 1) throw ConfigError("episodes: must be >= 1");
    env.validate();
    if (stm_lengths.empty()) throw ConfigError("stm_lengths: must not be empty");
    for (int s : stm_lengths)
        if (s < 1) throw ConfigError("stm_lengths: values must be >= 1");
    if (transfer_rates.empty()) throw ConfigError("transfer_rates: must not be empty");
    if (transfer_noises.empty()) throw ConfigError("transfer_noises: must not be empty");
    if (seeds.empty()) throw ConfigError("seeds: must not be empty");
    if (metric_checkpoint_interval < 1) throw ConfigError("metric_checkpoint_interval: must be >= 1");
    if (ltm_capacity < 1) throw ConfigError("ltm_capacity: must be >= 1");
    if (workers < 1) throw ConfigError("workers: must be >= 1");
    if (output_dir.empty()) throw ConfigError("output_dir: must not be empty");
    sec.validate();
    for (const Condition& c : conditions()) social_params(c).validate();
    auto has_duplicates = [](auto v) {
        std::sort(v.begin(), v.end());
        return std::adjacent_find(v.begin(), v.end()) != v.end();
    };
    if (has_duplicates(stm_lengths)) throw ConfigError("stm_lengths: duplicate value");
    if (has_duplicates(transfer_rates)) throw ConfigError("transfer_rates: duplicate value");
    if (has_duplicates(transfer_noises)) throw ConfigError("transfer_noises: duplicate value");
    if (has_duplicates(seeds)) throw ConfigError("seeds: duplicate value");
}

std::vector<Condition> ExperimentConfig::conditions() const {
    std::vector<Condition> out;
    for (int stm : stm_lengths)
        for (int tr : transfer_rates)
            for (double tn : transfer_noises) out.push_back(Condition{stm, tr, tn});
    return out;
}

SocialParams ExperimentConfig::social_params(const Condition& c) const {
    return SocialParams{c.transfer_rate, c.transfer_noise, refractory_steps};
}

bool ExperimentConfig::is_checkpoint(int episode_index) const {
    return (episode_index + 1) % metric_checkpoint_interval == 0 || episode_index == episodes - 1;
}

int ExperimentConfig::checkpoint_count() const {
    return episodes / metric_checkpoint_interval + (episodes % metric_checkpoint_interval != 0 ? 1 : 0);
}

double RunRecord::total_reward() const {
    double total = 0.0;
    for (const auto& e : episodes) total += std::accumulate(e.rewards.begin(), e.rewards.end(), 0.0);
    return total;
}

std::vector<double> RunRecord::cumulative_rewards() const {
    std::vector<double> totals(final_snapshot.agents(), 0.0);
    for (const auto& e : episodes) {
        if (totals.size() < e.rewards.size()) totals.resize(e.rewards.size(), 0.0);
        for (std::size_t i = 0; i < e.rewards.size(); ++i) totals[i] += e.rewards[i];
    }
    return totals;
}

RunRecord run_single(const ExperimentConfig& config, const Condition& condition, std::uint64_t seed,
                     const RunOptions& options) {
    config.env.validate();
    config.sec.validate();
    const SocialParams social = config.social_params(condition);
    social.validate();

    const auto n_agents = static_cast<std::size_t>(config.env.num_agents);
    Rng env_rng = derive_stream(seed, Stream::env_placement);
    std::vector<Rng> action_rngs;
    for (std::size_t i = 0; i < n_agents; ++i) action_rngs.push_back(derive_stream(seed, Stream::agent_actions, i));
    SocialStreams streams{derive_stream(seed, Stream::social_selection), derive_stream(seed, Stream::transfer_noise)};

    std::vector<AgentMemory> agents;
    for (std::size_t i = 0; i < n_agents; ++i)
        agents.emplace_back(static_cast<std::size_t>(condition.stm_length), config.sec,
                            static_cast<std::size_t>(config.ltm_capacity));
    RefractoryClocks clocks(n_agents);

    RunRecord record;
    record.condition = condition;
    record.seed = seed;
    record.episodes.reserve(static_cast<std::size_t>(config.episodes));
    std::vector<double> cumulative(n_agents, 0.0);
    std::vector<Observation> observations(n_agents);
    std::vector<Action> actions(n_agents);

    for (int episode = 0; episode < config.episodes; ++episode) {
        WorldState world = reset(config.env, env_rng);
        for (auto& m : agents) m.clear_stm();
        clocks.reset();
        const bool sharing = is_transfer_episode(episode, social);
        EpisodeResult result;
        result.rewards.assign(n_agents, 0.0);

        while (!world.episode_done) {
            for (std::size_t i = 0; i < n_agents; ++i) {
                observations[i] = observe(world, i);
                actions[i] = select_action(agents[i], observations[i], action_rngs[i]);
            }
            const StepResult step_result = step(world, actions);
            for (std::size_t i = 0; i < n_agents; ++i) {
                agents[i].record_step(observations[i], actions[i]);
                if (step_result.rewards[i] > 0.0) {
                    agents[i].consolidate(step_result.rewards[i]);
                    result.rewards[i] += step_result.rewards[i];
                }
            }
            if (sharing) {
                auto events = social_learning_phase(world, agents, social, episode, world.timestep - 1, clocks,
                                                    streams);
                record.transfers.insert(record.transfers.end(), events.begin(), events.end());
            }
        }
        result.steps = world.timestep;
        for (std::size_t i = 0; i < n_agents; ++i) cumulative[i] += result.rewards[i];
        record.episodes.push_back(std::move(result));

        if (config.is_checkpoint(episode)) {
            const MemorySnapshot snap = MemorySnapshot::capture(agents);
            record.checkpoints.push_back(Checkpoint{episode + 1, compute_metrics(snap, cumulative, config.evenness)});
        }
    }

    record.final_snapshot = MemorySnapshot::capture(agents);
    if (options.keep_final_ltm) {
        for (const AgentMemory& m : agents) {
            std::vector<EpisodicSequence> ltm;
            ltm.reserve(m.ltm_size());
            for (std::size_t k = 0; k < m.ltm_size(); ++k) ltm.push_back(m.ltm_at(k));
            record.final_ltm.push_back(std::move(ltm));
        }
    }
    return record;
}

}  // namespace secforage
