#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "skillforge/agent.hpp"
#include "skillforge/distill.hpp"
#include "skillforge/hdrln.hpp"

namespace skillforge {

enum class ModuleKind { array, distilled };

/// Desk-scale presets. The learner presets differ from the AgentConfig
/// defaults in replay ratio, exploration horizon, epoch length and the
/// optimizer's epsilon; see docs/hyperparameters.md.
AgentConfig desk_skill_config();
AgentConfig desk_hdrln_config();
DistillConfig desk_distill_config();

/// Everything a CLI run needs. Text form is INI-style:
///
///   [experiment]   name, domain, seeds, output_dir, variant, module, skills, parallel
///   [agent]        skill network training
///   [hdrln]        controller and flat-baseline training (same keys as [agent])
///   [distill]      tau, switch_interval, steps_per_teacher, batch_size, lr, dataset_size, rollout_epsilon, hidden
///
/// Keys outside these sets are rejected.
struct ExperimentConfig {
  std::string name = "experiment";
  std::string domain = "nav1";
  std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
  std::filesystem::path output_dir = "runs";
  TargetVariant variant = TargetVariant::ddqn;
  ModuleKind module = ModuleKind::array;
  std::filesystem::path skills;  // skill manifest, empty when unused
  bool parallel = false;
  AgentConfig agent = desk_skill_config();
  AgentConfig hdrln = desk_hdrln_config();
  DistillConfig distill = desk_distill_config();

  /// Throws ConfigError when an invariant is violated.
  void validate() const;
};

bool operator==(const AgentConfig& a, const AgentConfig& b);
bool operator==(const DistillConfig& a, const DistillConfig& b);
bool operator==(const ExperimentConfig& a, const ExperimentConfig& b);

ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::filesystem::path& path);
std::string serialize_config(const ExperimentConfig& cfg);

std::string_view variant_name(TargetVariant v);
std::string_view module_kind_name(ModuleKind k);

/// `key = value` lines of one agent block, used to fingerprint cached skills.
std::string serialize_agent(const AgentConfig& cfg);

/// Shortest text that parses back to the same double.
std::string format_double(double v);

}  // namespace skillforge
