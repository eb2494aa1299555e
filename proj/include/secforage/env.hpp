#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "secforage/rng.hpp"

namespace secforage {

enum class ObjectKind : std::uint8_t { empty = 0, wall = 1, fruit = 2, agent = 3, nest = 4 };
inline constexpr int kNumObjectKinds = 5;

enum class Color : std::uint8_t { none = 0, red = 1, green = 2, blue = 3, purple = 4, yellow = 5, grey = 6 };
inline constexpr int kNumColors = 7;

enum class Heading : std::uint8_t { north = 0, east = 1, south = 2, west = 3 };

enum class Action : std::uint8_t { turn_left = 0, turn_right = 1, move_forward = 2, pickup = 3, drop = 4 };
inline constexpr int kNumActions = 5;

const char* to_string(Action a);
const char* to_string(Heading h);

Heading turn_left(Heading h);
Heading turn_right(Heading h);

struct Pos {
    int row = 0;
    int col = 0;
    friend bool operator==(const Pos&, const Pos&) = default;
};

Pos ahead_of(Pos p, Heading h);

/// Static content of one grid square. Agents are tracked separately and
/// overlaid when rendering observations.
struct Cell {
    ObjectKind kind = ObjectKind::empty;
    Color color = Color::none;
    friend bool operator==(const Cell&, const Cell&) = default;
};

struct CarriedItem {
    ObjectKind kind = ObjectKind::fruit;
    Color color = Color::red;
    friend bool operator==(const CarriedItem&, const CarriedItem&) = default;
};

struct AgentPose {
    Pos position;
    Heading heading = Heading::north;
    std::optional<CarriedItem> carrying;
    friend bool operator==(const AgentPose&, const AgentPose&) = default;
};

/// Agent colours in index order.
Color agent_color(std::size_t agent_index);

/// Geometry of the 3x3 view. `forward`: the agent sits at the back-middle
/// cell and sees two rows ahead. `centered`: the agent sits in the middle.
enum class ViewMode : std::uint8_t { forward = 0, centered = 1 };

struct EnvConfig {
    int rows = 11;
    int cols = 15;
    int num_agents = 4;
    int num_fruits = 4;
    Pos nest{5, 7};
    int max_steps = 1000;
    ViewMode view = ViewMode::forward;

    /// Throws ConfigError naming the offending field.
    void validate() const;
    friend bool operator==(const EnvConfig&, const EnvConfig&) = default;
};

struct WorldState {
    int rows = 0;
    int cols = 0;
    std::vector<Cell> grid;  // row-major
    std::vector<AgentPose> agents;
    int fruits_remaining = 0;  // on grid + carried
    int fruits_delivered = 0;
    int timestep = 0;
    int max_steps = 0;
    ViewMode view = ViewMode::forward;
    bool episode_done = false;

    bool in_bounds(Pos p) const { return p.row >= 0 && p.row < rows && p.col >= 0 && p.col < cols; }
    const Cell& at(Pos p) const { return grid[static_cast<std::size_t>(p.row * cols + p.col)]; }
    Cell& at(Pos p) { return grid[static_cast<std::size_t>(p.row * cols + p.col)]; }
    /// Index of the agent standing on p, or -1.
    int agent_at(Pos p) const;
    int fruits_on_grid() const;
    int fruits_carried() const;

    friend bool operator==(const WorldState&, const WorldState&) = default;
};

/// 3x3 egocentric window, 6 attributes per cell.
inline constexpr int kWindow = 3;
inline constexpr int kCellAttributes = 6;
inline constexpr int kObservationSize = kWindow * kWindow * kCellAttributes;

/// Attribute slot offsets inside one cell's 6-tuple.
enum ObsSlot : int {
    slot_kind = 0,
    slot_color = 1,
    slot_carried_kind = 2,
    slot_carried_color = 3,
    slot_heading = 4,  // 0 = no agent, 1 + Heading otherwise
    slot_is_self = 5,
};

struct Observation {
    std::array<std::uint8_t, kObservationSize> values{};

    std::uint8_t cell(int window_row, int window_col, ObsSlot slot) const {
        return values[static_cast<std::size_t>((window_row * kWindow + window_col) * kCellAttributes + slot)];
    }
    std::uint64_t hash() const { return fnv1a64(values.data(), values.size()); }
    /// True when every entry is a legal code for its slot.
    bool valid() const;

    friend bool operator==(const Observation&, const Observation&) = default;
};

struct StepResult {
    std::vector<double> rewards;
    bool done = false;
};

/// Places fruits and agents uniformly at random over free interior cells.
WorldState reset(const EnvConfig& config, Rng& rng);

/// Applies one action per agent in index order. Throws ProtocolError when the
/// episode is already finished or the action count is wrong.
StepResult step(WorldState& state, const std::vector<Action>& actions);

/// 3x3 window rotated so the agent's heading points to window row 0.
/// Cells outside the grid encode as wall.
Observation observe(const WorldState& state, std::size_t agent_index);

/// Other agents inside the observer's 3x3 window, ascending.
std::vector<std::size_t> visible_agents(const WorldState& state, std::size_t agent_index);

/// World position shown at (window_row, window_col) for an agent at pos facing h.
Pos window_to_world(Pos pos, Heading h, int window_row, int window_col, ViewMode view);

/// Window coordinates of the observing agent itself.
inline constexpr int self_window_row(ViewMode view) { return view == ViewMode::forward ? 2 : 1; }
inline constexpr int kSelfWindowCol = 1;

/// Debug dump, one line per grid row.
std::string ascii_dump(const WorldState& state);

}  // namespace secforage
