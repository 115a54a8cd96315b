#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "skillforge/gridcraft.hpp"
#include "skillforge/nn.hpp"
#include "skillforge/replay.hpp"
#include "skillforge/rng.hpp"

namespace skillforge {

/// Learner hyperparameters. Defaults follow the tuned DQN settings
/// (n_replay 16, lr 0.0025) with exploration horizon and replay size scaled
/// down tenfold / fivefold for gridworld runs.
struct AgentConfig {
  double gamma = 0.99;
  double lr = 0.0025;
  double eps_start = 1.0;
  double eps_end = 0.1;
  std::uint64_t eps_endt = 40'000;  // decisions over which epsilon anneals
  int n_replay = 16;                // gradient updates per decision
  std::uint64_t target_sync_interval = 2'000;  // optimization steps
  std::size_t batch_size = 32;
  std::size_t replay_capacity = 20'000;
  std::size_t learn_start = 500;  // stored transitions before updates begin
  std::uint64_t epoch_length = 20'000;  // optimization steps per epoch
  int epochs = 300;
  int eval_episodes = 50;
  double eval_epsilon = 0.05;
  bool double_q = false;
  std::vector<std::size_t> hidden = {64, 64};
  RmsPropConfig optimizer{};
  /// Stop once evaluation success is at least this for `target_streak`
  /// consecutive epochs. Zero disables early stopping.
  double target_success = 0.0;
  int target_streak = 1;

  /// Throws ConfigError when an invariant is violated.
  void validate() const;
};

struct EpisodeLog {
  double reward = 0.0;
  int length = 0;
  bool success = false;
  bool operator==(const EpisodeLog&) const = default;
};

struct EvaluationReport {
  double success_pct = 0.0;
  double mean_reward = 0.0;
  double mean_length = 0.0;
  int episodes = 0;
  std::vector<EpisodeLog> log;

  static EvaluationReport from_log(std::vector<EpisodeLog> log);
  bool operator==(const EvaluationReport&) const = default;
};

struct CurvePoint {
  int epoch = 0;
  std::uint64_t optimization_steps = 0;
  double success_pct = 0.0;
  double mean_reward = 0.0;
  double mean_length = 0.0;
  double epsilon = 0.0;

  bool operator==(const CurvePoint&) const = default;
};
using LearningCurve = std::vector<CurvePoint>;

/// Mean success over the last `window` epochs (all epochs if fewer).
double final_window_success(const LearningCurve& curve, std::size_t window = 10);

/// Primitive-action policy. Receives the full world state so scripted and
/// planner policies can be evaluated through the same path as networks.
using Policy = std::function<std::size_t(const WorldState&, const Observation&)>;

Policy greedy_policy(const QNetwork& net);

double epsilon_at(const AgentConfig& cfg, std::uint64_t step);

/// Epsilon-greedy choice; argmax ties resolve to the lowest index.
std::size_t select_action(std::span<const double> q, double eps, Rng& rng);

/// y = r for terminal tuples, else r + gamma * max_a Q_target(s', a).
double dqn_target(const Transition& t, double gamma, const QNetwork& target_net);
/// y = r + gamma * Q_target(s', argmax_a Q_net(s', a)).
double ddqn_target(const Transition& t, double gamma, const QNetwork& net, const QNetwork& target_net);

/// Runs `episodes` episodes with `eval_epsilon`-greedy exploration around
/// `policy`. Episode i draws from its own stream derived from `seed`.
EvaluationReport evaluate(const Policy& policy, const DomainSpec& spec, int episodes, std::uint64_t seed,
                          double eval_epsilon = 0.05);

using ProgressFn = std::function<void(const CurvePoint&)>;

struct DsnTrainingResult {
  QNetwork net;
  LearningCurve curve;
  std::uint64_t env_steps = 0;
  std::uint64_t optimization_steps = 0;
};

/// Flat DQN (or DDQN when cfg.double_q) on one domain with experience replay
/// and a periodically synced target network.
DsnTrainingResult train_dsn(const DomainSpec& spec, const AgentConfig& cfg, std::uint64_t seed,
                            const ProgressFn& progress = {});

namespace detail {
/// One gradient step on sampled transitions using `target_fn` for y.
double fit_transitions(QNetwork& net, std::span<const Transition* const> batch,
                       const std::function<double(const Transition&)>& target_fn, double lr);
}  // namespace detail

}  // namespace skillforge
