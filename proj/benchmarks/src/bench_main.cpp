#include <benchmark/benchmark.h>

#include "skillforge/agent.hpp"
#include "skillforge/gridcraft.hpp"
#include "skillforge/hdrln.hpp"
#include "skillforge/nn.hpp"
#include "skillforge/replay.hpp"

namespace {

using namespace skillforge;

QNetwork desk_net(std::size_t outputs = kActionCount) {
  const std::size_t hidden[] = {64, 64};
  return QNetwork::mlp(kObservationLength, hidden, outputs, 1);
}

/// Replay buffer filled by a uniform-random walk through the complex domain.
ReplayBuffer random_walk_buffer(std::size_t n) {
  const DomainSpec spec = make_domain("complex");
  Rng rng(5);
  ReplayBuffer buf(n);
  auto [state, obs] = reset(spec, rng);
  while (buf.size() < n) {
    const auto a = static_cast<Action>(uniform_index(rng, kActionCount));
    StepResult r = step(state, spec, a);
    buf.push({obs, static_cast<std::size_t>(a), r.reward, r.observation, r.terminal, 1});
    if (r.terminal) {
      std::tie(state, obs) = reset(spec, rng);
    } else {
      state = std::move(r.state);
      obs = std::move(r.observation);
    }
  }
  return buf;
}

void BM_Forward(benchmark::State& state) {
  const QNetwork net = desk_net();
  const ReplayBuffer buf = random_walk_buffer(1);
  for (auto _ : state) benchmark::DoNotOptimize(net.forward(buf.at(0).state));
}
BENCHMARK(BM_Forward);

// One minibatch TD update with DDQN targets, the inner loop of training.
void BM_TrainStep(benchmark::State& state) {
  QNetwork net = desk_net();
  const QNetwork target = net;
  const ReplayBuffer buf = random_walk_buffer(2000);
  Rng rng(9);
  const auto batch_size = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) {
    const auto batch = buf.sample(batch_size, rng);
    benchmark::DoNotOptimize(detail::fit_transitions(
        net, batch, [&](const Transition& t) { return ddqn_target(t, 0.99, net, target); }, 1e-5));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_TrainStep)->Arg(32);

void BM_EnvStep(benchmark::State& state) {
  const DomainSpec spec = make_domain("complex");
  Rng rng(4);
  auto [ws, obs] = reset(spec, rng);
  for (auto _ : state) {
    StepResult r = step(ws, spec, static_cast<Action>(uniform_index(rng, kActionCount)));
    ws = r.terminal ? reset(spec, rng).first : std::move(r.state);
    benchmark::DoNotOptimize(r.observation);
  }
}
BENCHMARK(BM_EnvStep);

void BM_SmdpTarget(benchmark::State& state) {
  const std::size_t hidden[] = {64, 64};
  const QNetwork net = QNetwork::mlp(kObservationLength, hidden, kActionCount + 4, 2);
  const QNetwork target = QNetwork::mlp(kObservationLength, hidden, kActionCount + 4, 3);
  ReplayBuffer buf = random_walk_buffer(1);
  Transition t = buf.at(0);
  t.duration = 7;
  for (auto _ : state) benchmark::DoNotOptimize(smdp_target_double(t, 0.99, net, target));
}
BENCHMARK(BM_SmdpTarget);

void BM_ReplaySample(benchmark::State& state) {
  const ReplayBuffer buf = random_walk_buffer(5000);
  Rng rng(1);
  for (auto _ : state) benchmark::DoNotOptimize(buf.sample(32, rng));
}
BENCHMARK(BM_ReplaySample);

}  // namespace

// The packaged benchmark_main archive is LTO bytecode from another compiler build.
BENCHMARK_MAIN();
