#include "secforage/env.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

#include "secforage/errors.hpp"

namespace secforage {

const char* to_string(Action a) {
    switch (a) {
        case Action::turn_left: return "turn_left";
        case Action::turn_right: return "turn_right";
        case Action::move_forward: return "move_forward";
        case Action::pickup: return "pickup";
        case Action::drop: return "drop";
    }
    return "?";
}

const char* to_string(Heading h) {
    switch (h) {
        case Heading::north: return "north";
        case Heading::east: return "east";
        case Heading::south: return "south";
        case Heading::west: return "west";
    }
    return "?";
}

Heading turn_left(Heading h) { return static_cast<Heading>((static_cast<int>(h) + 3) % 4); }
Heading turn_right(Heading h) { return static_cast<Heading>((static_cast<int>(h) + 1) % 4); }

namespace {

constexpr int kForwardRow[4] = {-1, 0, 1, 0};
constexpr int kForwardCol[4] = {0, 1, 0, -1};

Pos offset(Pos p, Heading h, int n) {
    const int i = static_cast<int>(h);
    return {p.row + n * kForwardRow[i], p.col + n * kForwardCol[i]};
}

bool is_border(const EnvConfig& c, Pos p) {
    return p.row == 0 || p.col == 0 || p.row == c.rows - 1 || p.col == c.cols - 1;
}

}  // namespace

Pos ahead_of(Pos p, Heading h) { return offset(p, h, 1); }

Pos window_to_world(Pos pos, Heading h, int window_row, int window_col, ViewMode view) {
    const int forward = self_window_row(view) - window_row;
    const int right = window_col - 1;
    const Pos f = offset(pos, h, forward);
    return offset(f, turn_right(h), right);
}

Color agent_color(std::size_t agent_index) {
    static constexpr Color kColors[] = {Color::green, Color::yellow, Color::blue, Color::purple};
    return kColors[agent_index % 4];
}

void EnvConfig::validate() const {
    if (rows < 3) throw ConfigError("env.rows: must be >= 3, got " + std::to_string(rows));
    if (cols < 3) throw ConfigError("env.cols: must be >= 3, got " + std::to_string(cols));
    if (num_agents < 1 || num_agents > 4)
        throw ConfigError("env.agents: must be in [1, 4], got " + std::to_string(num_agents));
    if (num_fruits < 0) throw ConfigError("env.fruits: must be >= 0, got " + std::to_string(num_fruits));
    if (max_steps < 1) throw ConfigError("max_steps_per_episode: must be >= 1, got " + std::to_string(max_steps));
    if (nest.row <= 0 || nest.row >= rows - 1 || nest.col <= 0 || nest.col >= cols - 1)
        throw ConfigError("env.nest: must be an interior cell");
    const int interior = (rows - 2) * (cols - 2);
    if (num_agents + num_fruits + 1 > interior)
        throw ConfigError("env: grid too small for agents, fruits and nest");
}

int WorldState::agent_at(Pos p) const {
    for (std::size_t i = 0; i < agents.size(); ++i)
        if (agents[i].position == p) return static_cast<int>(i);
    return -1;
}

int WorldState::fruits_on_grid() const {
    return static_cast<int>(std::count_if(grid.begin(), grid.end(),
                                          [](const Cell& c) { return c.kind == ObjectKind::fruit; }));
}

int WorldState::fruits_carried() const {
    return static_cast<int>(std::count_if(agents.begin(), agents.end(),
                                          [](const AgentPose& a) { return a.carrying.has_value(); }));
}

WorldState reset(const EnvConfig& config, Rng& rng) {
    config.validate();
    WorldState s;
    s.rows = config.rows;
    s.cols = config.cols;
    s.max_steps = config.max_steps;
    s.view = config.view;
    s.grid.assign(static_cast<std::size_t>(config.rows * config.cols), Cell{});
    std::vector<Pos> free_cells;
    for (int r = 0; r < config.rows; ++r) {
        for (int c = 0; c < config.cols; ++c) {
            const Pos p{r, c};
            if (is_border(config, p)) {
                s.at(p) = Cell{ObjectKind::wall, Color::grey};
            } else if (p == config.nest) {
                s.at(p) = Cell{ObjectKind::nest, Color::green};
            } else {
                free_cells.push_back(p);
            }
        }
    }
    // Partial Fisher-Yates: only the first agents+fruits slots are needed.
    const std::size_t needed = static_cast<std::size_t>(config.num_fruits + config.num_agents);
    for (std::size_t i = 0; i < needed; ++i) {
        const std::size_t j = i + rng.index(free_cells.size() - i);
        std::swap(free_cells[i], free_cells[j]);
    }
    std::size_t k = 0;
    for (int f = 0; f < config.num_fruits; ++f) s.at(free_cells[k++]) = Cell{ObjectKind::fruit, Color::red};
    for (int a = 0; a < config.num_agents; ++a) {
        AgentPose pose;
        pose.position = free_cells[k++];
        pose.heading = static_cast<Heading>(rng.index(4));
        s.agents.push_back(pose);
    }
    s.fruits_remaining = config.num_fruits;
    s.episode_done = config.num_fruits == 0;
    return s;
}

StepResult step(WorldState& state, const std::vector<Action>& actions) {
    if (state.episode_done) throw ProtocolError("step called on a finished episode");
    if (actions.size() != state.agents.size())
        throw ProtocolError("step expects one action per agent: got " + std::to_string(actions.size()) +
                            ", need " + std::to_string(state.agents.size()));

    StepResult result;
    result.rewards.assign(state.agents.size(), 0.0);
    for (std::size_t i = 0; i < state.agents.size(); ++i) {
        AgentPose& me = state.agents[i];
        const Pos front = ahead_of(me.position, me.heading);
        const bool inside = state.in_bounds(front);
        const int other = inside ? state.agent_at(front) : -1;
        switch (actions[i]) {
            case Action::turn_left: me.heading = turn_left(me.heading); break;
            case Action::turn_right: me.heading = turn_right(me.heading); break;
            case Action::move_forward:
                if (inside && other < 0 && state.at(front).kind == ObjectKind::empty) me.position = front;
                break;
            case Action::pickup:
                if (me.carrying || !inside) break;
                if (other >= 0) {
                    AgentPose& them = state.agents[static_cast<std::size_t>(other)];
                    if (them.carrying) {
                        me.carrying = them.carrying;
                        them.carrying.reset();
                    }
                } else if (state.at(front).kind == ObjectKind::fruit) {
                    me.carrying = CarriedItem{ObjectKind::fruit, state.at(front).color};
                    state.at(front) = Cell{};
                }
                break;
            case Action::drop:
                if (!me.carrying || !inside) break;
                if (other >= 0) {
                    AgentPose& them = state.agents[static_cast<std::size_t>(other)];
                    if (!them.carrying) {
                        them.carrying = me.carrying;
                        me.carrying.reset();
                    }
                } else if (state.at(front).kind == ObjectKind::nest) {
                    me.carrying.reset();
                    --state.fruits_remaining;
                    ++state.fruits_delivered;
                    result.rewards[i] = 1.0;
                } else if (state.at(front).kind == ObjectKind::empty) {
                    state.at(front) = Cell{me.carrying->kind, me.carrying->color};
                    me.carrying.reset();
                }
                break;
        }
    }
    ++state.timestep;
    state.episode_done = state.fruits_remaining == 0 || state.timestep >= state.max_steps;
    result.done = state.episode_done;
    return result;
}

bool Observation::valid() const {
    for (int cell = 0; cell < kWindow * kWindow; ++cell) {
        const auto* v = &values[static_cast<std::size_t>(cell * kCellAttributes)];
        if (v[slot_kind] >= kNumObjectKinds || v[slot_color] >= kNumColors) return false;
        if (v[slot_carried_kind] >= kNumObjectKinds || v[slot_carried_color] >= kNumColors) return false;
        if (v[slot_heading] > 4 || v[slot_is_self] > 1) return false;
    }
    return true;
}

Observation observe(const WorldState& state, std::size_t agent_index) {
    if (agent_index >= state.agents.size()) throw ContractViolation("observe: agent index out of range");
    const AgentPose& me = state.agents[agent_index];
    Observation obs;
    for (int wr = 0; wr < kWindow; ++wr) {
        for (int wc = 0; wc < kWindow; ++wc) {
            auto* v = &obs.values[static_cast<std::size_t>((wr * kWindow + wc) * kCellAttributes)];
            const Pos p = window_to_world(me.position, me.heading, wr, wc, state.view);
            if (!state.in_bounds(p)) {
                v[slot_kind] = static_cast<std::uint8_t>(ObjectKind::wall);
                v[slot_color] = static_cast<std::uint8_t>(Color::grey);
                continue;
            }
            const int who = state.agent_at(p);
            if (who >= 0) {
                const AgentPose& a = state.agents[static_cast<std::size_t>(who)];
                const bool self = static_cast<std::size_t>(who) == agent_index;
                v[slot_kind] = static_cast<std::uint8_t>(ObjectKind::agent);
                // Own colour is omitted so that stored states are portable between agents.
                v[slot_color] = static_cast<std::uint8_t>(self ? Color::none : agent_color(static_cast<std::size_t>(who)));
                if (a.carrying) {
                    v[slot_carried_kind] = static_cast<std::uint8_t>(a.carrying->kind);
                    v[slot_carried_color] = static_cast<std::uint8_t>(a.carrying->color);
                }
                v[slot_heading] = static_cast<std::uint8_t>(1 + static_cast<int>(a.heading));
                v[slot_is_self] = self ? 1 : 0;
            } else {
                const Cell& c = state.at(p);
                v[slot_kind] = static_cast<std::uint8_t>(c.kind);
                v[slot_color] = static_cast<std::uint8_t>(c.color);
            }
        }
    }
    return obs;
}

std::vector<std::size_t> visible_agents(const WorldState& state, std::size_t agent_index) {
    if (agent_index >= state.agents.size()) throw ContractViolation("visible_agents: agent index out of range");
    const AgentPose& me = state.agents[agent_index];
    std::vector<std::size_t> seen;
    for (int wr = 0; wr < kWindow; ++wr) {
        for (int wc = 0; wc < kWindow; ++wc) {
            const int who = state.agent_at(window_to_world(me.position, me.heading, wr, wc, state.view));
            if (who >= 0 && static_cast<std::size_t>(who) != agent_index) seen.push_back(static_cast<std::size_t>(who));
        }
    }
    std::sort(seen.begin(), seen.end());
    return seen;
}

std::string ascii_dump(const WorldState& state) {
    static constexpr char kArrows[] = {'^', '>', 'v', '<'};
    std::ostringstream out;
    for (int r = 0; r < state.rows; ++r) {
        for (int c = 0; c < state.cols; ++c) {
            const Pos p{r, c};
            const int who = state.agent_at(p);
            if (who >= 0) {
                const auto& a = state.agents[static_cast<std::size_t>(who)];
                out << (a.carrying ? static_cast<char>('0' + who) : kArrows[static_cast<int>(a.heading)]);
                continue;
            }
            switch (state.at(p).kind) {
                case ObjectKind::empty: out << '.'; break;
                case ObjectKind::wall: out << '#'; break;
                case ObjectKind::fruit: out << 'o'; break;
                case ObjectKind::nest: out << 'N'; break;
                case ObjectKind::agent: out << '?'; break;
            }
        }
        out << '\n';
    }
    return out.str();
}

}  // namespace secforage
