#include "skillforge/agent.hpp"

#include <algorithm>
#include <cmath>

#include "skillforge/error.hpp"

namespace skillforge {

using skillforge::detail::require;

void AgentConfig::validate() const {
  if (!(gamma >= 0.0 && gamma < 1.0)) throw ConfigError("gamma must lie in [0, 1)");
  if (!(lr > 0.0)) throw ConfigError("lr must be positive");
  if (!(0.0 <= eps_end && eps_end <= eps_start && eps_start <= 1.0)) {
    throw ConfigError("epsilon schedule must satisfy 0 <= eps_end <= eps_start <= 1");
  }
  if (!(eval_epsilon >= 0.0 && eval_epsilon <= 1.0)) throw ConfigError("eval_epsilon must lie in [0, 1]");
  if (eps_endt == 0 || n_replay <= 0 || target_sync_interval == 0 || batch_size == 0 || replay_capacity == 0 ||
      epoch_length == 0 || epochs <= 0 || eval_episodes <= 0 || target_streak <= 0) {
    throw ConfigError("agent counts must be positive");
  }
  if (hidden.empty()) throw ConfigError("at least one hidden layer is required");
}

EvaluationReport EvaluationReport::from_log(std::vector<EpisodeLog> log) {
  require(!log.empty(), "EvaluationReport: no episodes");
  EvaluationReport r;
  r.episodes = static_cast<int>(log.size());
  int successes = 0;
  double reward = 0.0;
  double length = 0.0;
  for (const auto& e : log) {
    successes += e.success ? 1 : 0;
    reward += e.reward;
    length += e.length;
  }
  r.success_pct = 100.0 * successes / r.episodes;
  r.mean_reward = reward / r.episodes;
  r.mean_length = length / r.episodes;
  r.log = std::move(log);
  return r;
}

double final_window_success(const LearningCurve& curve, std::size_t window) {
  if (curve.empty()) return 0.0;
  const std::size_t n = std::min(window, curve.size());
  double sum = 0.0;
  for (std::size_t i = curve.size() - n; i < curve.size(); ++i) sum += curve[i].success_pct;
  return sum / static_cast<double>(n);
}

Policy greedy_policy(const QNetwork& net) {
  return [&net](const WorldState&, const Observation& obs) { return argmax(net.forward(obs)); };
}

double epsilon_at(const AgentConfig& cfg, std::uint64_t step) {
  if (step >= cfg.eps_endt) return cfg.eps_end;
  const double frac = static_cast<double>(step) / static_cast<double>(cfg.eps_endt);
  return cfg.eps_start + (cfg.eps_end - cfg.eps_start) * frac;
}

std::size_t select_action(std::span<const double> q, double eps, Rng& rng) {
  require(!q.empty(), "select_action: empty value vector");
  require(eps >= 0.0 && eps <= 1.0, "select_action: epsilon outside [0, 1]");
  if (uniform01(rng) < eps) return uniform_index(rng, q.size());
  return argmax(q);
}

double dqn_target(const Transition& t, double gamma, const QNetwork& target_net) {
  require(t.duration == 1, "dqn_target: skill tuple (duration > 1); use smdp_target");
  if (t.terminal) return t.reward;
  const ValueVector q = target_net.forward(t.next);
  return t.reward + gamma * *std::max_element(q.begin(), q.end());
}

double ddqn_target(const Transition& t, double gamma, const QNetwork& net, const QNetwork& target_net) {
  require(t.duration == 1, "ddqn_target: skill tuple (duration > 1); use smdp_target_double");
  if (t.terminal) return t.reward;
  const std::size_t a = argmax(net.forward(t.next));
  return t.reward + gamma * target_net.forward(t.next)[a];
}

EvaluationReport evaluate(const Policy& policy, const DomainSpec& spec, int episodes, std::uint64_t seed,
                          double eval_epsilon) {
  require(episodes >= 1, "evaluate: episodes must be at least 1");
  std::vector<EpisodeLog> log;
  log.reserve(static_cast<std::size_t>(episodes));
  for (int ep = 0; ep < episodes; ++ep) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(ep)));
    auto [state, obs] = reset(spec, rng);
    EpisodeLog e;
    for (;;) {
      std::size_t a;
      if (uniform01(rng) < eval_epsilon) {
        a = uniform_index(rng, kActionCount);
      } else {
        a = policy(state, obs);
      }
      require(a < kActionCount, "evaluate: policy returned an invalid action");
      StepResult r = step(state, spec, static_cast<Action>(a));
      e.reward += r.reward;
      ++e.length;
      state = std::move(r.state);
      obs = std::move(r.observation);
      if (r.terminal) {
        e.success = r.success;
        break;
      }
    }
    log.push_back(e);
  }
  return EvaluationReport::from_log(std::move(log));
}

namespace detail {

double fit_transitions(QNetwork& net, std::span<const Transition* const> batch,
                       const std::function<double(const Transition&)>& target_fn, double lr) {
  Batch b;
  b.inputs.reserve(batch.size());
  b.target_values.reserve(batch.size());
  b.target_indices.reserve(batch.size());
  for (const Transition* t : batch) {
    b.inputs.push_back(t->state);
    b.target_values.push_back(target_fn(*t));
    b.target_indices.push_back(t->action);
  }
  return net.train_step(b, lr);
}

}  // namespace detail

DsnTrainingResult train_dsn(const DomainSpec& spec, const AgentConfig& cfg, std::uint64_t seed,
                            const ProgressFn& progress) {
  cfg.validate();
  Rng rng(derive_seed(seed, 0));
  QNetwork net = QNetwork::mlp(kObservationLength, cfg.hidden, kActionCount, derive_seed(seed, 1), cfg.optimizer);
  QNetwork target = sync_target(net);
  ReplayBuffer replay(cfg.replay_capacity);

  DsnTrainingResult result;
  int streak = 0;
  auto [state, obs] = reset(spec, rng);
  const auto target_fn = [&](const Transition& t) {
    return cfg.double_q ? ddqn_target(t, cfg.gamma, net, target) : dqn_target(t, cfg.gamma, target);
  };

  while (static_cast<int>(result.curve.size()) < cfg.epochs) {
    const double eps = epsilon_at(cfg, result.env_steps);
    const std::size_t a = select_action(net.forward(obs), eps, rng);
    StepResult r = step(state, spec, static_cast<Action>(a));
    replay.push(Transition{obs, a, r.reward, r.observation, r.terminal, 1});
    ++result.env_steps;
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
        detail::fit_transitions(net, batch, target_fn, cfg.lr);
      } catch (const TrainingDiverged& e) {
        throw TrainingDiverged("train_dsn(" + spec.name + "): " + e.what() + " at optimization step " +
                               std::to_string(result.optimization_steps) + ", epoch " +
                               std::to_string(result.curve.size()));
      }
      ++result.optimization_steps;
      if (result.optimization_steps % cfg.target_sync_interval == 0) target = sync_target(net);
      if (result.optimization_steps % cfg.epoch_length == 0) {
        const int epoch = static_cast<int>(result.curve.size()) + 1;
        const EvaluationReport rep = evaluate(greedy_policy(net), spec, cfg.eval_episodes,
                                              derive_seed(seed, 1000 + static_cast<std::uint64_t>(epoch)),
                                              cfg.eval_epsilon);
        result.curve.push_back(CurvePoint{epoch, result.optimization_steps, rep.success_pct, rep.mean_reward,
                                          rep.mean_length, eps});
        if (progress) progress(result.curve.back());
        streak = (cfg.target_success > 0.0 && rep.success_pct >= cfg.target_success) ? streak + 1 : 0;
        if (static_cast<int>(result.curve.size()) >= cfg.epochs ||
            (cfg.target_success > 0.0 && streak >= cfg.target_streak)) {
          stop = true;
        }
      }
    }
    if (stop) break;
  }
  result.net = std::move(net);
  return result;
}

}  // namespace skillforge
