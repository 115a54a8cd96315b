#include "skillforge/hdrln.hpp"

#include <algorithm>
#include <string>

#include "skillforge/error.hpp"

namespace skillforge {

using skillforge::detail::require;

void HdrlnPolicy::validate() const {
  require(module != nullptr, "HdrlnPolicy: no skill module");
  require(controller.output_dim() == output_dim(), "HdrlnPolicy: controller outputs must equal 6 + skill count");
  for (const auto& s : skills) require(s.index < module->size(), "HdrlnPolicy: skill index beyond the module");
}

namespace {

double discount_power(double gamma, int k) {
  require(k >= 1, "SMDP target: duration must be at least 1");
  double g = 1.0;
  for (int i = 0; i < k; ++i) g *= gamma;
  return g;
}

}  // namespace

double smdp_target(const Transition& t, double gamma, const QNetwork& target_net) {
  const double gk = discount_power(gamma, t.duration);
  if (t.terminal) return t.reward;
  const ValueVector q = target_net.forward(t.next);
  return t.reward + gk * *std::max_element(q.begin(), q.end());
}

double smdp_target_double(const Transition& t, double gamma, const QNetwork& net, const QNetwork& target_net) {
  const double gk = discount_power(gamma, t.duration);
  if (t.terminal) return t.reward;
  const std::size_t a = argmax(net.forward(t.next));
  return t.reward + gk * target_net.forward(t.next)[a];
}

double UsagePoint::skill_pct() const {
  const auto total = skill_selections + primitive_selections;
  return total == 0 ? 0.0 : 100.0 * static_cast<double>(skill_selections) / static_cast<double>(total);
}

double UsagePoint::primitive_pct() const {
  const auto total = skill_selections + primitive_selections;
  return total == 0 ? 0.0 : 100.0 * static_cast<double>(primitive_selections) / static_cast<double>(total);
}

HdrlnStepResult hdrln_step(const HdrlnPolicy& policy, const WorldState& state, const Observation& obs,
                           const DomainSpec& spec, double eps, Rng& rng, ReplayBuffer* buffer) {
  require(state.steps < spec.step_limit && !task_complete(spec, state), "hdrln_step: state is terminal");
  require(eps >= 0.0 && eps <= 1.0, "hdrln_step: epsilon outside [0, 1]");
  HdrlnStepResult out;
  if (uniform01(rng) < eps) {
    out.choice = uniform_index(rng, policy.output_dim());
    out.explored = true;
  } else {
    out.choice = argmax(policy.controller.forward(obs));
  }

  if (!HdrlnPolicy::is_skill(out.choice)) {
    StepResult r = step(state, spec, static_cast<Action>(out.choice));
    out.state = std::move(r.state);
    out.observation = std::move(r.observation);
    out.reward = r.reward;
    out.terminal = r.terminal;
    out.success = r.success;
  } else {
    const Skill& skill = policy.skills[out.choice - kActionCount];
    SkillExecutionRecord rec = execute_skill(state, spec, skill, *policy.module, policy.gamma);
    out.state = rec.end;
    out.observation = rec.end_observation;
    out.duration = rec.duration;
    out.reward = rec.discounted_return;
    out.terminal = rec.terminal;
    out.success = rec.success;
    out.skill = std::move(rec);
  }
  if (buffer) buffer->push(Transition{obs, out.choice, out.reward, out.observation, out.terminal, out.duration});
  return out;
}

HdrlnEvaluation evaluate_hdrln(const HdrlnPolicy& policy, const DomainSpec& spec, int episodes, std::uint64_t seed,
                               double eval_epsilon) {
  require(episodes >= 1, "evaluate_hdrln: episodes must be at least 1");
  policy.validate();
  HdrlnEvaluation ev;
  std::vector<EpisodeLog> log;
  for (int ep = 0; ep < episodes; ++ep) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(ep)));
    auto [state, obs] = reset(spec, rng);
    EpisodeLog e;
    for (;;) {
      HdrlnStepResult r = hdrln_step(policy, state, obs, spec, eval_epsilon, rng);
      if (!r.explored) {
        (HdrlnPolicy::is_skill(r.choice) ? ev.skill_selections : ev.primitive_selections) += 1;
      }
      e.length += r.duration;
      if (r.skill) {
        for (double x : r.skill->rewards) e.reward += x;
      } else {
        e.reward += r.reward;
      }
      state = std::move(r.state);
      obs = std::move(r.observation);
      if (r.terminal) {
        e.success = r.success;
        break;
      }
    }
    log.push_back(e);
  }
  ev.report = EvaluationReport::from_log(std::move(log));
  return ev;
}

HdrlnTrainingResult train_hdrln(const DomainSpec& spec, std::vector<Skill> skills,
                                std::shared_ptr<const DeepSkillModule> module, const AgentConfig& cfg,
                                TargetVariant variant, std::uint64_t seed, const ProgressFn& progress) {
  cfg.validate();
  require(module != nullptr, "train_hdrln: no skill module");
  HdrlnTrainingResult result;
  HdrlnPolicy& policy = result.policy;
  policy.module = std::move(module);
  policy.skills = std::move(skills);
  policy.gamma = cfg.gamma;
  policy.controller =
      QNetwork::mlp(kObservationLength, cfg.hidden, policy.output_dim(), derive_seed(seed, 1), cfg.optimizer);
  policy.validate();

  QNetwork target = sync_target(policy.controller);
  ReplayBuffer replay(cfg.replay_capacity);
  Rng rng(derive_seed(seed, 0));
  const auto target_fn = [&](const Transition& t) {
    return variant == TargetVariant::ddqn ? smdp_target_double(t, cfg.gamma, policy.controller, target)
                                          : smdp_target(t, cfg.gamma, target);
  };

  int streak = 0;
  auto [state, obs] = reset(spec, rng);
  while (static_cast<int>(result.curve.size()) < cfg.epochs) {
    const double eps = epsilon_at(cfg, result.decisions);
    HdrlnStepResult r = hdrln_step(policy, state, obs, spec, eps, rng, &replay);
    ++result.decisions;
    result.env_steps += static_cast<std::uint64_t>(r.duration);
    if (r.terminal) {
      std::tie(state, obs) = reset(spec, rng);
    } else {
      state = std::move(r.state);
      obs = std::move(r.observation);
    }

    if (replay.size() < cfg.learn_start) continue;
    bool stop = false;
    for (int u = 0; u < cfg.n_replay && !stop; ++u) {
      const auto batch = replay.sample(cfg.batch_size, rng);
      try {
        detail::fit_transitions(policy.controller, batch, target_fn, cfg.lr);
      } catch (const TrainingDiverged& e) {
        throw TrainingDiverged("train_hdrln(" + spec.name + "): " + e.what() + " at optimization step " +
                               std::to_string(result.optimization_steps) + ", epoch " +
                               std::to_string(result.curve.size()));
      }
      ++result.optimization_steps;
      if (result.optimization_steps % cfg.target_sync_interval == 0) target = sync_target(policy.controller);
      if (result.optimization_steps % cfg.epoch_length == 0) {
        const int epoch = static_cast<int>(result.curve.size()) + 1;
        const HdrlnEvaluation ev =
            evaluate_hdrln(policy, spec, cfg.eval_episodes, derive_seed(seed, 1000 + static_cast<std::uint64_t>(epoch)),
                           cfg.eval_epsilon);
        result.curve.push_back(CurvePoint{epoch, result.optimization_steps, ev.report.success_pct,
                                          ev.report.mean_reward, ev.report.mean_length, eps});
        result.usage.epochs.push_back(
            UsagePoint{epoch, ev.skill_selections, ev.primitive_selections, ev.report.mean_reward});
        if (progress) progress(result.curve.back());
        streak = (cfg.target_success > 0.0 && ev.report.success_pct >= cfg.target_success) ? streak + 1 : 0;
        if (static_cast<int>(result.curve.size()) >= cfg.epochs ||
            (cfg.target_success > 0.0 && streak >= cfg.target_streak)) {
          stop = true;
        }
      }
    }
    if (stop) break;
  }
  return result;
}

EvaluationReport zero_shot_eval(const QNetwork& dsn, const DomainSpec& spec, int episodes, std::uint64_t seed,
                                double eval_epsilon) {
  require(dsn.output_dim() == kActionCount, "zero_shot_eval: network must output primitive actions");
  return evaluate(greedy_policy(dsn), spec, episodes, seed, eval_epsilon);
}

}  // namespace skillforge
