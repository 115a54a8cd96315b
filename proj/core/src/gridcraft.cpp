#include "skillforge/gridcraft.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

#include "skillforge/error.hpp"

namespace skillforge {

namespace {

struct Layout {
  const char* name;
  Task task;
  int step_limit;
  double pickup_reward;
  bool start_carrying;
  std::vector<std::string_view> rows;
};

// Rooms are stacked north to south and every room exit sits in its north
// wall, so the single-room layouts line up with the rooms of the composite
// domains: nav2 = complex room 1, pickup/break = complex room 2,
// placement = complex room 3.
const std::vector<Layout>& layouts() {
  static const std::vector<Layout> all = {
      {"nav1", Task::reach_exit, 30, 0.0, false,
       {"###E######",
        "#........#",
        "#........#",
        "#........#",
        "#........#",
        "#........#",
        "#........#",
        "#........#",
        "#........#",
        "##########"}},
      {"nav2", Task::reach_exit, 30, 0.0, false,
       {"#####E####",
        "#........#",
        "#........#",
        "#..####..#",
        "#........#",
        "#........#",
        "#.#....#.#",
        "#........#",
        "#........#",
        "##########"}},
      {"pickup", Task::pickup, 30, 0.1, false,
       {"##D#######",
        "#........#",
        "#........#",
        "#........#",
        "#...I....#",
        "#........#",
        "#........#",
        "#........#",
        "#........#",
        "#####E####"}},
      {"break", Task::break_door, 30, 0.0, true,
       {"##D#######",
        "#........#",
        "#........#",
        "#........#",
        "#........#",
        "#........#",
        "#........#",
        "#........#",
        "#........#",
        "#####E####"}},
      {"placement", Task::place_block, 30, 0.0, true,
       {"##########",
        "#........#",
        "#.....G..#",
        "#........#",
        "#........#",
        "#........#",
        "#........#",
        "#........#",
        "#........#",
        "##.#######"}},
      {"two_room", Task::reach_exit, 60, 0.0, false,
       {"###E######",
        "#........#",
        "#........#",
        "#........#",
        "#........#",
        "#........#",
        "#........#",
        "#........#",
        "#........#",
        "######E###",
        "#SSSSSSSS#",
        "#SSSSSSSS#",
        "#SSSSSSSS#",
        "#SSSSSSSS#",
        "#SSSSSSSS#",
        "#SSSSSSSS#",
        "#SSSSSSSS#",
        "#SSSSSSSS#",
        "##########"}},
      {"complex", Task::place_block, 100, 0.0, false,
       {"##########",
        "#........#",
        "#.....G..#",
        "#........#",
        "#........#",
        "#........#",
        "#........#",
        "#........#",
        "#........#",
        "##D#######",
        "#........#",
        "#........#",
        "#........#",
        "#...I....#",
        "#........#",
        "#........#",
        "#........#",
        "#........#",
        "#####E####",
        "#SSSSSSSS#",
        "#SSSSSSSS#",
        "#SS####SS#",
        "#SSSSSSSS#",
        "#SSSSSSSS#",
        "#S#SSSS#S#",
        "#SSSSSSSS#",
        "#SSSSSSSS#",
        "##########"}},
  };
  return all;
}

std::string_view task_name(Task t) {
  switch (t) {
    case Task::reach_exit: return "reach_exit";
    case Task::pickup: return "pickup";
    case Task::break_door: return "break_door";
    case Task::place_block: return "place_block";
  }
  return "?";
}

Task parse_task(std::string_view s) {
  if (s == "reach_exit") return Task::reach_exit;
  if (s == "pickup") return Task::pickup;
  if (s == "break_door") return Task::break_door;
  if (s == "place_block") return Task::place_block;
  throw DomainError("unknown task '" + std::string(s) + "'");
}

std::string_view spawn_name(SpawnRule r) { return r == SpawnRule::random_cell ? "random_cell" : "fixed_room_1"; }

SpawnRule parse_spawn(std::string_view s) {
  if (s == "random_cell") return SpawnRule::random_cell;
  if (s == "fixed_room_1") return SpawnRule::fixed_room_1;
  throw DomainError("unknown spawn rule '" + std::string(s) + "'");
}

// Flood fill over interior cells with 4-connectivity.
void label_rooms(DomainSpec& spec) {
  spec.room.assign(spec.tiles.size(), -1);
  auto interior = [&](int r, int c) {
    const Tile t = spec.at(r, c);
    return !spec.on_boundary(r, c) && (t == Tile::floor || t == Tile::item || t == Tile::goal);
  };
  int next = 0;
  std::vector<std::pair<int, int>> stack;
  for (int r = 0; r < spec.rows; ++r) {
    for (int c = 0; c < spec.cols; ++c) {
      if (!interior(r, c) || spec.room[static_cast<std::size_t>(r * spec.cols + c)] >= 0) continue;
      stack.assign(1, {r, c});
      spec.room[static_cast<std::size_t>(r * spec.cols + c)] = next;
      while (!stack.empty()) {
        const auto [y, x] = stack.back();
        stack.pop_back();
        for (const auto& d : {std::pair{-1, 0}, std::pair{1, 0}, std::pair{0, -1}, std::pair{0, 1}}) {
          const int ny = y + d.first, nx = x + d.second;
          if (!interior(ny, nx)) continue;
          int& id = spec.room[static_cast<std::size_t>(ny * spec.cols + nx)];
          if (id >= 0) continue;
          id = next;
          stack.emplace_back(ny, nx);
        }
      }
      ++next;
    }
  }
}

void set_map(DomainSpec& spec, const std::vector<std::string>& rows) {
  if (rows.empty()) throw DomainError("domain '" + spec.name + "' has an empty map");
  spec.rows = static_cast<int>(rows.size());
  spec.cols = static_cast<int>(rows.front().size());
  spec.tiles.clear();
  spec.spawn_region.clear();
  bool any_spawn = false;
  for (const auto& row : rows) {
    if (static_cast<int>(row.size()) != spec.cols) throw DomainError("domain '" + spec.name + "' map is not rectangular");
    for (char c : row) {
      bool spawn = false;
      Tile t;
      switch (c) {
        case '#': t = Tile::wall; break;
        case '.': t = Tile::floor; break;
        case 'E': t = Tile::exit; break;
        case 'I': t = Tile::item; break;
        case 'D': t = Tile::door; break;
        case 'G': t = Tile::goal; break;
        case 'S': t = Tile::floor; spawn = true; break;
        default: throw DomainError(std::string("unknown tile character '") + c + "'");
      }
      any_spawn = any_spawn || spawn;
      spec.tiles.push_back(t);
      spec.spawn_region.push_back(spawn);
    }
  }
  spec.spawn = any_spawn ? SpawnRule::fixed_room_1 : SpawnRule::random_cell;
  label_rooms(spec);
}

constexpr int kForward[4][2] = {{-1, 0}, {0, 1}, {1, 0}, {0, -1}};
constexpr int kRight[4][2] = {{0, 1}, {1, 0}, {0, -1}, {-1, 0}};

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

double parse_double(std::string_view key, std::string_view v) {
  try {
    std::size_t used = 0;
    const std::string s(v);
    const double d = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument("trailing");
    return d;
  } catch (const std::exception&) {
    throw DomainError("bad numeric value for '" + std::string(key) + "': " + std::string(v));
  }
}

bool parse_bool(std::string_view key, std::string_view v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw DomainError("bad boolean value for '" + std::string(key) + "': " + std::string(v));
}

}  // namespace

std::string_view action_name(Action a) {
  switch (a) {
    case Action::forward: return "forward";
    case Action::rotate_left: return "rotate_left";
    case Action::rotate_right: return "rotate_right";
    case Action::break_block: return "break";
    case Action::pickup: return "pickup";
    case Action::place: return "place";
  }
  return "?";
}

Tile DomainSpec::at(int row, int col) const {
  if (!in_bounds(row, col)) return Tile::wall;
  return tiles[static_cast<std::size_t>(row * cols + col)];
}

void DomainSpec::validate() const {
  if (rows <= 0 || cols <= 0 || tiles.size() != static_cast<std::size_t>(rows * cols) ||
      spawn_region.size() != tiles.size()) {
    throw DomainError("domain '" + name + "': layout is not rectangular");
  }
  if (step_limit <= 0) throw DomainError("domain '" + name + "': step limit must be positive");
  if (std::count(tiles.begin(), tiles.end(), Tile::item) > 1 || std::count(tiles.begin(), tiles.end(), Tile::door) > 1) {
    throw DomainError("domain '" + name + "': at most one item and one door are supported");
  }
  const auto has = [&](Tile t) { return std::find(tiles.begin(), tiles.end(), t) != tiles.end(); };
  switch (task) {
    case Task::reach_exit: {
      bool boundary_exit = false;
      for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) boundary_exit = boundary_exit || (at(r, c) == Tile::exit && on_boundary(r, c));
      if (!boundary_exit) throw DomainError("domain '" + name + "': reach_exit needs an exit in the outer wall");
      break;
    }
    case Task::pickup:
      if (!has(Tile::item)) throw DomainError("domain '" + name + "': pickup task needs an item");
      break;
    case Task::break_door:
      if (!has(Tile::door)) throw DomainError("domain '" + name + "': break task needs a door");
      break;
    case Task::place_block:
      if (!has(Tile::goal)) throw DomainError("domain '" + name + "': placement task needs a goal pad");
      if (!start_carrying && !has(Tile::item)) throw DomainError("domain '" + name + "': nothing to place");
      break;
  }
  if (spawn_cells(*this).empty()) throw DomainError("domain '" + name + "': no spawnable floor cell");
}

std::vector<std::string> domain_names() {
  std::vector<std::string> out;
  for (const auto& l : layouts()) out.emplace_back(l.name);
  return out;
}

DomainSpec make_domain(std::string_view name) {
  for (const auto& l : layouts()) {
    if (name != l.name) continue;
    DomainSpec spec;
    spec.name = l.name;
    spec.task = l.task;
    spec.step_limit = l.step_limit;
    spec.pickup_reward = l.pickup_reward;
    spec.start_carrying = l.start_carrying;
    set_map(spec, std::vector<std::string>(l.rows.begin(), l.rows.end()));
    spec.validate();
    return spec;
  }
  throw DomainError("unknown domain '" + std::string(name) + "'");
}

DomainSpec load_domain(std::string_view name_or_path) {
  for (const auto& l : layouts()) {
    if (name_or_path == l.name) return make_domain(name_or_path);
  }
  const std::filesystem::path path(name_or_path);
  std::ifstream in(path);
  if (!in) throw DomainError("unknown domain '" + std::string(name_or_path) + "' (not a built-in name or readable file)");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_domain(buf.str());
}

DomainSpec parse_domain(std::string_view text) {
  DomainSpec spec;
  std::vector<std::string> map_rows;
  bool in_map = false;
  std::optional<SpawnRule> spawn;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    std::string_view l = trim(line);
    if (in_map) {
      if (!l.empty()) map_rows.emplace_back(l);
      continue;
    }
    if (l.empty() || l.front() == ';') continue;
    if (l == "map:") {
      in_map = true;
      continue;
    }
    const auto colon = l.find(':');
    if (colon == std::string_view::npos) throw DomainError("domain file: expected 'key: value', got '" + std::string(l) + "'");
    const std::string_view key = trim(l.substr(0, colon));
    const std::string_view value = trim(l.substr(colon + 1));
    if (key == "name") spec.name = std::string(value);
    else if (key == "task") spec.task = parse_task(value);
    else if (key == "spawn") spawn = parse_spawn(value);
    else if (key == "step_limit") spec.step_limit = static_cast<int>(parse_double(key, value));
    else if (key == "step_reward") spec.step_reward = parse_double(key, value);
    else if (key == "goal_reward") spec.goal_reward = parse_double(key, value);
    else if (key == "pickup_reward") spec.pickup_reward = parse_double(key, value);
    else if (key == "start_carrying") spec.start_carrying = parse_bool(key, value);
    else throw DomainError("domain file: unknown key '" + std::string(key) + "'");
  }
  if (spec.name.empty()) spec.name = "custom";
  set_map(spec, map_rows);
  if (spawn) spec.spawn = *spawn;
  spec.validate();
  return spec;
}

std::string format_domain(const DomainSpec& spec) {
  std::ostringstream out;
  out << "name: " << spec.name << '\n'
      << "task: " << task_name(spec.task) << '\n'
      << "spawn: " << spawn_name(spec.spawn) << '\n'
      << "step_limit: " << spec.step_limit << '\n'
      << "step_reward: " << spec.step_reward << '\n'
      << "goal_reward: " << spec.goal_reward << '\n'
      << "pickup_reward: " << spec.pickup_reward << '\n'
      << "start_carrying: " << (spec.start_carrying ? "true" : "false") << '\n'
      << "map:\n";
  for (int r = 0; r < spec.rows; ++r) {
    for (int c = 0; c < spec.cols; ++c) {
      const auto i = static_cast<std::size_t>(r * spec.cols + c);
      out << (spec.spawn_region[i] ? 'S' : static_cast<char>(spec.tiles[i]));
    }
    out << '\n';
  }
  return out.str();
}

Tile visible_tile(const DomainSpec& spec, const Snapshot& snap, int row, int col) {
  const Tile t = spec.at(row, col);
  if (t == Tile::item && !snap.item_present) return Tile::floor;
  if (t == Tile::door && snap.door_broken) return Tile::floor;
  return t;
}

bool passable(const DomainSpec& spec, const Snapshot& snap, int row, int col) {
  if (!spec.in_bounds(row, col)) return false;
  switch (visible_tile(spec, snap, row, col)) {
    case Tile::floor:
    case Tile::exit:
    case Tile::goal: return true;
    default: return false;
  }
}

std::pair<int, int> facing_cell(const Snapshot& snap) {
  return {snap.row + kForward[snap.heading][0], snap.col + kForward[snap.heading][1]};
}

bool task_complete(const DomainSpec& spec, const WorldState& state) {
  const Snapshot& s = state.now;
  switch (spec.task) {
    case Task::reach_exit: return spec.at(s.row, s.col) == Tile::exit && spec.on_boundary(s.row, s.col);
    case Task::pickup: return s.carrying && !s.item_present;
    case Task::break_door: return s.door_broken;
    case Task::place_block: return state.block_placed;
  }
  return false;
}

std::vector<std::pair<int, int>> spawn_cells(const DomainSpec& spec) {
  std::vector<std::pair<int, int>> cells;
  const bool has_item = std::find(spec.tiles.begin(), spec.tiles.end(), Tile::item) != spec.tiles.end();
  WorldState probe;
  probe.now.carrying = spec.start_carrying;
  probe.now.item_present = has_item;
  for (int r = 0; r < spec.rows; ++r) {
    for (int c = 0; c < spec.cols; ++c) {
      const auto i = static_cast<std::size_t>(r * spec.cols + c);
      if (spec.spawn == SpawnRule::fixed_room_1 && !spec.spawn_region[i]) continue;
      probe.now.row = r;
      probe.now.col = c;
      if (!passable(spec, probe.now, r, c) || task_complete(spec, probe)) continue;
      cells.emplace_back(r, c);
    }
  }
  return cells;
}

WorldState reset_state(const DomainSpec& spec, Rng& rng) {
  const auto cells = spawn_cells(spec);
  if (cells.empty()) throw DomainError("domain '" + spec.name + "': no spawnable cell");
  const auto [r, c] = cells[uniform_index(rng, cells.size())];
  WorldState st;
  st.now.row = r;
  st.now.col = c;
  st.now.heading = static_cast<int>(uniform_index(rng, 4));
  st.now.carrying = spec.start_carrying;
  st.now.door_broken = false;
  st.now.item_present = std::find(spec.tiles.begin(), spec.tiles.end(), Tile::item) != spec.tiles.end();
  st.history.fill(st.now);
  return st;
}

std::pair<WorldState, Observation> reset(const DomainSpec& spec, Rng& rng) {
  WorldState st = reset_state(spec, rng);
  Observation obs = render(st, spec);
  return {std::move(st), std::move(obs)};
}

StepResult step(const WorldState& state, const DomainSpec& spec, Action action) {
  StepResult out;
  WorldState next = state;
  for (std::size_t i = 0; i + 1 < next.history.size(); ++i) next.history[i] = next.history[i + 1];
  next.history.back() = state.now;
  next.steps = state.steps + 1;

  Snapshot& s = next.now;
  const auto [fr, fc] = facing_cell(s);
  bool picked = false;
  switch (action) {
    case Action::forward:
      if (passable(spec, s, fr, fc)) {
        s.row = fr;
        s.col = fc;
      }
      break;
    case Action::rotate_left: s.heading = (s.heading + 3) % 4; break;
    case Action::rotate_right: s.heading = (s.heading + 1) % 4; break;
    case Action::break_block:
      if (visible_tile(spec, s, fr, fc) == Tile::door) s.door_broken = true;
      break;
    case Action::pickup:
      if (visible_tile(spec, s, fr, fc) == Tile::item && !s.carrying) {
        s.item_present = false;
        s.carrying = true;
        picked = true;
      }
      break;
    case Action::place:
      if (visible_tile(spec, s, fr, fc) == Tile::goal && s.carrying) {
        s.carrying = false;
        next.block_placed = true;
      }
      break;
  }

  out.success = task_complete(spec, next);
  out.terminal = out.success || next.steps >= spec.step_limit;
  out.reward = out.success ? spec.goal_reward : spec.step_reward + (picked ? spec.pickup_reward : 0.0);
  out.observation = render(next, spec);
  out.state = std::move(next);
  return out;
}

namespace {

// Rooms the agent currently sees into: its own, or every room next to the
// passage cell it stands on.
struct RoomSet {
  std::array<int, 4> ids{-1, -1, -1, -1};
  bool contains(int id) const { return id >= 0 && std::find(ids.begin(), ids.end(), id) != ids.end(); }
};

int room_at(const DomainSpec& spec, int row, int col) {
  return spec.in_bounds(row, col) ? spec.room[static_cast<std::size_t>(row * spec.cols + col)] : -1;
}

RoomSet rooms_of(const DomainSpec& spec, int row, int col) {
  RoomSet s;
  if (const int own = room_at(spec, row, col); own >= 0) {
    s.ids[0] = own;
    return s;
  }
  for (int d = 0; d < 4; ++d) s.ids[static_cast<std::size_t>(d)] = room_at(spec, row + kForward[d][0], col + kForward[d][1]);
  return s;
}

// Walls occlude: a cell shows only if it lies in a visible room or borders one.
bool in_sight(const DomainSpec& spec, const RoomSet& rooms, int row, int col) {
  if (!spec.in_bounds(row, col)) return false;
  if (const int id = room_at(spec, row, col); id >= 0) return rooms.contains(id);
  for (int dr = -1; dr <= 1; ++dr) {
    for (int dc = -1; dc <= 1; ++dc) {
      if (rooms.contains(room_at(spec, row + dr, col + dc))) return true;
    }
  }
  return false;
}

std::array<Tile, kViewSize * kViewSize> view_tiles(const Snapshot& snap, const DomainSpec& spec) {
  std::array<Tile, kViewSize * kViewSize> view{};
  const int* f = kForward[snap.heading];
  const int* rt = kRight[snap.heading];
  const bool occlude = spec.room.size() == spec.tiles.size();
  const RoomSet rooms = occlude ? rooms_of(spec, snap.row, snap.col) : RoomSet{};
  for (int i = 0; i < kViewSize; ++i) {
    const int ahead = kViewSize - 1 - i;
    for (int j = 0; j < kViewSize; ++j) {
      const int lateral = j - kViewSize / 2;
      const int r = snap.row + f[0] * ahead + rt[0] * lateral;
      const int c = snap.col + f[1] * ahead + rt[1] * lateral;
      view[static_cast<std::size_t>(i * kViewSize + j)] =
          !occlude || in_sight(spec, rooms, r, c) ? visible_tile(spec, snap, r, c) : Tile::wall;
    }
  }
  return view;
}

constexpr Tile kChannelTiles[kChannels] = {Tile::wall, Tile::exit, Tile::item, Tile::door, Tile::goal};

void append_frame(Observation& obs, std::uint32_t offset, const Snapshot& snap, const DomainSpec& spec) {
  const auto view = view_tiles(snap, spec);
  constexpr std::uint32_t cells = kViewSize * kViewSize;
  for (std::uint32_t ch = 0; ch < kChannels; ++ch) {
    for (std::uint32_t k = 0; k < cells; ++k) {
      if (view[k] == kChannelTiles[ch]) obs.push(offset + ch * cells + k, 1.0);
    }
  }
  obs.push(offset + kChannels * cells, snap.heading / 3.0);
  obs.push(offset + kChannels * cells + 1, snap.carrying ? 1.0 : 0.0);
}

}  // namespace

std::vector<double> render_frame(const Snapshot& snap, const DomainSpec& spec) {
  Observation one(kFrameLength);
  append_frame(one, 0, snap, spec);
  return one.to_dense();
}

Observation render(const WorldState& state, const DomainSpec& spec) {
  Observation obs(kObservationLength);
  for (std::size_t f = 0; f < state.history.size(); ++f) {
    append_frame(obs, static_cast<std::uint32_t>(f * kFrameLength), state.history[f], spec);
  }
  append_frame(obs, static_cast<std::uint32_t>((kFrameStack - 1) * kFrameLength), state.now, spec);
  return obs;
}

}  // namespace skillforge
