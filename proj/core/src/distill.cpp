#include "skillforge/distill.hpp"

#include <cmath>
#include <string>

#include "skillforge/error.hpp"

namespace skillforge {

using skillforge::detail::require;

void DistillConfig::validate() const {
  if (!(tau > 0.0)) throw ConfigError("distill tau must be positive");
  if (!(lr > 0.0)) throw ConfigError("distill lr must be positive");
  if (switch_interval == 0 || steps_per_teacher == 0 || batch_size == 0 || dataset_size == 0) {
    throw ConfigError("distill counts must be positive");
  }
  if (!(rollout_epsilon >= 0.0 && rollout_epsilon <= 1.0)) throw ConfigError("rollout epsilon must lie in [0, 1]");
  if (hidden.empty()) throw ConfigError("at least one hidden layer is required");
}

std::vector<DistillSample> collect_dataset(const QNetwork& teacher, const DomainSpec& spec, std::size_t n,
                                           std::uint64_t seed, double epsilon, std::size_t teacher_index) {
  require(n >= 1, "collect_dataset: n must be at least 1");
  Rng rng(seed);
  std::vector<DistillSample> out;
  out.reserve(n);
  auto [state, obs] = reset(spec, rng);
  while (out.size() < n) {
    ValueVector q = teacher.forward(obs);
    const std::size_t a = select_action(q, epsilon, rng);
    out.push_back(DistillSample{obs, std::move(q), teacher_index});
    StepResult r = step(state, spec, static_cast<Action>(a));
    if (r.terminal) {
      std::tie(state, obs) = reset(spec, rng);
    } else {
      state = std::move(r.state);
      obs = std::move(r.observation);
    }
  }
  return out;
}

DistillResult distill_datasets(std::span<const std::vector<DistillSample>> datasets, const DistillConfig& cfg,
                               std::uint64_t seed) {
  cfg.validate();
  require(!datasets.empty(), "distill: no teachers");
  for (const auto& d : datasets) require(!d.empty(), "distill: empty teacher dataset");

  const std::size_t n_heads = datasets.size();
  MultiHeadNetwork student =
      MultiHeadNetwork::make(kObservationLength, cfg.hidden, kActionCount, n_heads, derive_seed(seed, 1), cfg.optimizer);
  Rng rng(derive_seed(seed, 2));
  std::vector<std::uint64_t> done(n_heads, 0);
  std::vector<double> phase_loss;
  std::vector<SparseVector> inputs(cfg.batch_size);
  std::vector<ValueVector> targets(cfg.batch_size);

  for (std::size_t head = 0;; head = (head + 1) % n_heads) {
    bool remaining = false;
    for (auto d : done) remaining = remaining || d < cfg.steps_per_teacher;
    if (!remaining) break;
    if (done[head] >= cfg.steps_per_teacher) continue;

    const auto& data = datasets[head];
    const std::uint64_t phase = std::min(cfg.switch_interval, cfg.steps_per_teacher - done[head]);
    double loss_sum = 0.0;
    for (std::uint64_t it = 0; it < phase; ++it) {
      for (std::size_t b = 0; b < cfg.batch_size; ++b) {
        const DistillSample& s = data[uniform_index(rng, data.size())];
        inputs[b] = s.obs;
        targets[b] = s.teacher_q;
      }
      try {
        loss_sum += student.distill_step(head, inputs, targets, cfg.tau, cfg.lr);
      } catch (const TrainingDiverged& e) {
        throw TrainingDiverged(std::string("distill: ") + e.what() + " on head " + std::to_string(head) +
                               " after " + std::to_string(done[head] + it) + " updates");
      }
    }
    done[head] += phase;
    phase_loss.push_back(loss_sum / static_cast<double>(phase));
  }
  return DistillResult{DeepSkillModule::distilled(std::move(student)), std::move(phase_loss)};
}

DistillResult distill_multi(std::span<const QNetwork> teachers, std::span<const DomainSpec> specs,
                            const DistillConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  require(!teachers.empty(), "distill: no teachers");
  require(teachers.size() == specs.size(), "distill: one domain per teacher required");
  std::vector<std::vector<DistillSample>> datasets;
  for (std::size_t i = 0; i < teachers.size(); ++i) {
    datasets.push_back(collect_dataset(teachers[i], specs[i], cfg.dataset_size, derive_seed(seed, 100 + i),
                                       cfg.rollout_epsilon, i));
  }
  return distill_datasets(datasets, cfg, seed);
}

std::vector<EvaluationReport> evaluate_distilled(const DeepSkillModule& module, std::span<const DomainSpec> specs,
                                                 int episodes, std::uint64_t seed, double eval_epsilon) {
  require(specs.size() == module.size(), "evaluate_distilled: one domain per head required");
  std::vector<EvaluationReport> reports;
  for (std::size_t i = 0; i < specs.size(); ++i) {
    const Policy policy = [&module, i](const WorldState&, const Observation& obs) {
      return skill_act(module, i, obs);
    };
    reports.push_back(evaluate(policy, specs[i], episodes, seed, eval_epsilon));
  }
  return reports;
}

double argmax_agreement(const DeepSkillModule& module, std::size_t head, std::span<const DistillSample> samples) {
  require(!samples.empty(), "argmax_agreement: no samples");
  std::size_t agree = 0;
  for (const auto& s : samples) agree += skill_act(module, head, s.obs) == argmax(s.teacher_q) ? 1 : 0;
  return static_cast<double>(agree) / static_cast<double>(samples.size());
}

}  // namespace skillforge
