#pragma once

#include <cstdint>
#include <vector>

#include "skillforge/agent.hpp"
#include "skillforge/gridcraft.hpp"
#include "skillforge/nn.hpp"
#include "skillforge/skills.hpp"

namespace skillforge {

struct DistillSample {
  Observation obs;
  ValueVector teacher_q;
  std::size_t teacher = 0;
};

struct DistillConfig {
  double tau = 0.1;
  std::uint64_t switch_interval = 500;  // updates per teacher phase
  std::uint64_t steps_per_teacher = 20'000;
  std::size_t batch_size = 32;
  double lr = 0.0001;
  std::size_t dataset_size = 20'000;  // samples per teacher
  double rollout_epsilon = 0.05;
  std::vector<std::size_t> hidden = {64, 64};
  RmsPropConfig optimizer{};

  /// Throws ConfigError when an invariant is violated.
  void validate() const;
};

/// Rolls the teacher out with `epsilon`-greedy exploration on its own domain
/// and records exactly n (obs, Q_teacher(obs)) pairs.
std::vector<DistillSample> collect_dataset(const QNetwork& teacher, const DomainSpec& spec, std::size_t n,
                                           std::uint64_t seed, double epsilon = 0.05,
                                           std::size_t teacher_index = 0);

struct DistillResult {
  DeepSkillModule module;
  std::vector<double> phase_loss;  // mean loss of every teacher phase, in order
};

/// Trains a shared-trunk student with one head per teacher. Phases of
/// `switch_interval` updates cycle round-robin over the teachers; each phase
/// draws batches from one dataset and updates the trunk and that head only.
DistillResult distill_multi(std::span<const QNetwork> teachers, std::span<const DomainSpec> specs,
                            const DistillConfig& cfg, std::uint64_t seed);

/// Same, with datasets already collected (datasets[i] feeds head i).
DistillResult distill_datasets(std::span<const std::vector<DistillSample>> datasets, const DistillConfig& cfg,
                               std::uint64_t seed);

/// Evaluates head i greedily on specs[i].
std::vector<EvaluationReport> evaluate_distilled(const DeepSkillModule& module, std::span<const DomainSpec> specs,
                                                 int episodes, std::uint64_t seed, double eval_epsilon = 0.05);

/// Fraction of samples on which the student head's argmax equals the
/// teacher's argmax.
double argmax_agreement(const DeepSkillModule& module, std::size_t head, std::span<const DistillSample> samples);

}  // namespace skillforge
