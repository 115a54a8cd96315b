#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "skillforge/gridcraft.hpp"
#include "skillforge/nn.hpp"

namespace skillforge {

/// Condition under which a skill hands control back before its timeout.
enum class SubGoal {
  exit,         // standing on any exit tile
  carrying,     // holding a block
  door_broken,  // the door is broken
  placed,       // a block sits on the goal pad
};

std::string_view sub_goal_name(SubGoal g);
std::optional<SubGoal> parse_sub_goal(std::string_view text);
/// Sub-goal whose completion matches a single-room task.
SubGoal sub_goal_for(Task task);
bool sub_goal_reached(SubGoal g, const WorldState& state, const DomainSpec& spec);

inline constexpr int kDefaultSkillDuration = 30;

struct Skill {
  std::string name;
  SubGoal sub_goal = SubGoal::exit;
  int max_duration = kDefaultSkillDuration;
  std::size_t index = 0;  // network / head inside the deep skill module
  /// Initiation set. Empty means every state.
  std::function<bool(const WorldState&)> initiation;

  bool can_start(const WorldState& state) const { return !initiation || initiation(state); }
};

/// Maps (skill index, observation) to a primitive action. Either an array of
/// independent networks or one shared-trunk network with a head per skill.
/// Immutable after construction.
class DeepSkillModule {
 public:
  enum class Kind { dsn_array, distilled };

  static DeepSkillModule array(std::vector<QNetwork> networks);
  static DeepSkillModule distilled(MultiHeadNetwork network);

  Kind kind() const noexcept { return impl_.index() == 0 ? Kind::dsn_array : Kind::distilled; }
  std::size_t size() const noexcept;

  ValueVector values(std::size_t skill, const Observation& obs) const;
  const std::vector<QNetwork>& networks() const;
  const MultiHeadNetwork& multi_head() const;

  bool same_parameters(const DeepSkillModule& other) const;

 private:
  explicit DeepSkillModule(std::variant<std::vector<QNetwork>, MultiHeadNetwork> impl) : impl_(std::move(impl)) {}
  std::variant<std::vector<QNetwork>, MultiHeadNetwork> impl_;
};

/// Greedy action of skill `skill` (ties go to the lowest index).
std::size_t skill_act(const DeepSkillModule& module, std::size_t skill, const Observation& obs);

/// Deterministic termination: sub-goal reached, `elapsed` at the skill's
/// timeout, or the episode is over.
bool beta_terminate(const Skill& skill, const WorldState& state, const DomainSpec& spec, int elapsed);

/// sum_j gamma^j r_j, evaluated from the back.
double discounted_sum(std::span<const double> rewards, double gamma);

struct SkillExecutionRecord {
  WorldState start;
  std::size_t skill = 0;
  std::vector<Action> actions;
  std::vector<double> rewards;
  WorldState end;
  Observation end_observation;
  int duration = 0;
  bool terminal = false;
  bool success = false;
  double discounted_return = 0.0;
};

/// Runs the skill closed-loop from `state` until beta_terminate. Always takes
/// at least one step. Skill policies are greedy so no randomness is involved.
SkillExecutionRecord execute_skill(const WorldState& state, const DomainSpec& spec, const Skill& skill,
                                   const DeepSkillModule& module, double gamma);

/// Skill manifest: one skill per line as `name sub_goal max_duration source`
/// where source is `checkpoint:<path>` or `head:<index>`. A `module <path>`
/// line names the distilled checkpoint that `head:` entries index into.
/// Relative paths resolve against the manifest's directory.
struct SkillManifestEntry {
  std::string name;
  SubGoal sub_goal = SubGoal::exit;
  int max_duration = kDefaultSkillDuration;
  std::filesystem::path checkpoint;  // empty for head entries
  std::optional<std::size_t> head;
};

struct SkillManifest {
  std::filesystem::path module;  // distilled checkpoint, if any
  std::vector<SkillManifestEntry> entries;
};

SkillManifest parse_skill_manifest(std::string_view text);
std::string format_skill_manifest(const SkillManifest& manifest);
SkillManifest read_skill_manifest(const std::filesystem::path& path);
void write_skill_manifest(const SkillManifest& manifest, const std::filesystem::path& path);

struct SkillSet {
  std::vector<Skill> skills;
  DeepSkillModule module;
};

/// Loads every network a manifest refers to. Paths are taken relative to
/// `base_dir`.
SkillSet load_skill_set(const SkillManifest& manifest, const std::filesystem::path& base_dir);

}  // namespace skillforge
