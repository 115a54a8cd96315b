#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "skillforge/agent.hpp"
#include "skillforge/replay.hpp"
#include "skillforge/skills.hpp"

namespace skillforge {

/// Controller over the joint output set: indices [0, 6) are primitive actions,
/// index 6 + j runs skills[j] through the deep skill module.
struct HdrlnPolicy {
  QNetwork controller;
  std::shared_ptr<const DeepSkillModule> module;
  std::vector<Skill> skills;
  double gamma = 0.99;

  std::size_t output_dim() const noexcept { return kActionCount + skills.size(); }
  static bool is_skill(std::size_t output) noexcept { return output >= kActionCount; }
  /// Throws ContractViolation when the layout is inconsistent.
  void validate() const;
};

/// y = r~ for terminal tuples, else r~ + gamma^k max over all controller
/// outputs of Q_target(s_{t+k}). Equals dqn_target bit for bit when k == 1.
double smdp_target(const Transition& t, double gamma, const QNetwork& target_net);
/// As smdp_target with the bootstrap output chosen by the online network.
double smdp_target_double(const Transition& t, double gamma, const QNetwork& net, const QNetwork& target_net);

struct UsagePoint {
  int epoch = 0;
  std::uint64_t skill_selections = 0;
  std::uint64_t primitive_selections = 0;
  double mean_reward = 0.0;

  double skill_pct() const;
  double primitive_pct() const;
  bool operator==(const UsagePoint&) const = default;
};

/// Per-epoch controller choices counted over the greedy decisions of that
/// epoch's evaluation episodes.
struct SkillUsageStats {
  std::vector<UsagePoint> epochs;
};

struct HdrlnStepResult {
  WorldState state;
  Observation observation;
  std::size_t choice = 0;
  bool explored = false;  // picked by the epsilon branch
  int duration = 1;
  double reward = 0.0;  // r for primitives, r~ for skills
  bool terminal = false;
  bool success = false;
  std::optional<SkillExecutionRecord> skill;
};

/// One controller decision: epsilon-greedy over the joint outputs, then a
/// single environment step or a full skill execution. Pushes the resulting
/// tuple into `buffer` when one is given.
HdrlnStepResult hdrln_step(const HdrlnPolicy& policy, const WorldState& state, const Observation& obs,
                           const DomainSpec& spec, double eps, Rng& rng, ReplayBuffer* buffer = nullptr);

struct HdrlnEvaluation {
  EvaluationReport report;
  std::uint64_t skill_selections = 0;  // greedy decisions only
  std::uint64_t primitive_selections = 0;
};

HdrlnEvaluation evaluate_hdrln(const HdrlnPolicy& policy, const DomainSpec& spec, int episodes, std::uint64_t seed,
                               double eval_epsilon = 0.05);

struct HdrlnTrainingResult {
  HdrlnPolicy policy;
  LearningCurve curve;
  SkillUsageStats usage;
  std::uint64_t env_steps = 0;
  std::uint64_t decisions = 0;
  std::uint64_t optimization_steps = 0;
};

enum class TargetVariant { dqn, ddqn };

/// Trains the controller with the skill module frozen. Epsilon anneals over
/// decisions; n_replay updates follow every decision once learning starts.
HdrlnTrainingResult train_hdrln(const DomainSpec& spec, std::vector<Skill> skills,
                                std::shared_ptr<const DeepSkillModule> module, const AgentConfig& cfg,
                                TargetVariant variant, std::uint64_t seed, const ProgressFn& progress = {});

/// Runs a trained skill network directly on another domain, no learning.
EvaluationReport zero_shot_eval(const QNetwork& dsn, const DomainSpec& spec, int episodes, std::uint64_t seed,
                                double eval_epsilon = 0.05);

}  // namespace skillforge
