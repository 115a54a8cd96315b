#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "skillforge/nn.hpp"
#include "skillforge/rng.hpp"

namespace skillforge {

enum class Tile : char {
  floor = '.',
  wall = '#',
  exit = 'E',
  item = 'I',
  door = 'D',
  goal = 'G',
};

enum class Action : int { forward = 0, rotate_left, rotate_right, break_block, pickup, place };
inline constexpr std::size_t kActionCount = 6;

std::string_view action_name(Action a);

/// Completion predicate of a domain.
enum class Task {
  reach_exit,   // stand on an exit tile in the outer wall
  pickup,       // carry the item
  break_door,   // the door is broken
  place_block,  // the carried block was placed on a goal pad
};

enum class SpawnRule {
  random_cell,   // any passable cell where the task is not already complete
  fixed_room_1,  // cells marked 'S' in the layout
};

struct DomainSpec {
  std::string name;
  int rows = 0;
  int cols = 0;
  std::vector<Tile> tiles;         // rows * cols, row-major
  std::vector<bool> spawn_region;  // 'S' cells
  /// Room id per cell: connected interior cells share an id. Walls, exits,
  /// doors and gaps in the outer wall are -1. Filled when the map is set.
  std::vector<int> room;
  SpawnRule spawn = SpawnRule::random_cell;
  int step_limit = 30;
  double step_reward = -0.04;
  double goal_reward = 1.0;
  double pickup_reward = 0.0;
  bool start_carrying = false;
  Task task = Task::reach_exit;

  /// Out-of-range cells read as walls.
  Tile at(int row, int col) const;
  bool in_bounds(int row, int col) const { return row >= 0 && col >= 0 && row < rows && col < cols; }
  bool on_boundary(int row, int col) const { return row == 0 || col == 0 || row == rows - 1 || col == cols - 1; }
  /// Throws DomainError when an invariant is violated.
  void validate() const;
};

/// Canonical domain names: nav1, nav2, pickup, break, placement, two_room, complex.
std::vector<std::string> domain_names();
DomainSpec make_domain(std::string_view name);
/// Name of a canonical domain or a path to a domain file.
DomainSpec load_domain(std::string_view name_or_path);
DomainSpec parse_domain(std::string_view text);
std::string format_domain(const DomainSpec& spec);

/// The part of the world a single frame depends on.
struct Snapshot {
  int row = 0;
  int col = 0;
  int heading = 0;  // 0 north, 1 east, 2 south, 3 west
  bool carrying = false;
  bool door_broken = false;
  bool item_present = false;

  bool operator==(const Snapshot&) const = default;
};

inline constexpr int kFrameStack = 4;
/// Bumped whenever rendering changes, so cached networks trained on older
/// observations are not reused.
inline constexpr int kRenderVersion = 2;
inline constexpr int kViewSize = 7;
inline constexpr int kChannels = 5;  // wall, exit, item, door, goal
inline constexpr std::size_t kFrameLength = kChannels * kViewSize * kViewSize + 2;
inline constexpr std::size_t kObservationLength = kFrameStack * kFrameLength;

struct WorldState {
  Snapshot now;
  bool block_placed = false;
  int steps = 0;
  /// Earlier snapshots, oldest first; together with `now` they form the
  /// frame stack.
  std::array<Snapshot, kFrameStack - 1> history{};

  bool operator==(const WorldState&) const = default;
};

/// Flattened stack of the last four egocentric frames, oldest first. Each
/// frame holds a 7x7 view (agent in the bottom-center cell looking "up") with
/// one channel per tile category, then heading/3 and the carrying flag.
using Observation = SparseVector;

struct StepResult {
  WorldState state;
  Observation observation;
  double reward = 0.0;
  bool terminal = false;
  bool success = false;
};

/// All cells the spawn rule may choose from, in row-major order.
std::vector<std::pair<int, int>> spawn_cells(const DomainSpec& spec);
WorldState reset_state(const DomainSpec& spec, Rng& rng);
std::pair<WorldState, Observation> reset(const DomainSpec& spec, Rng& rng);
StepResult step(const WorldState& state, const DomainSpec& spec, Action action);
Observation render(const WorldState& state, const DomainSpec& spec);
/// Single frame of a snapshot (dense, kFrameLength values).
std::vector<double> render_frame(const Snapshot& snap, const DomainSpec& spec);

bool passable(const DomainSpec& spec, const Snapshot& snap, int row, int col);
bool task_complete(const DomainSpec& spec, const WorldState& state);
/// Tile shown at a cell given the dynamic flags (picked items and broken
/// doors read as floor).
Tile visible_tile(const DomainSpec& spec, const Snapshot& snap, int row, int col);
std::pair<int, int> facing_cell(const Snapshot& snap);

}  // namespace skillforge
