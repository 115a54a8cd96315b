#include <gtest/gtest.h>

#include <cmath>

#include "planner.hpp"
#include "skillforge/error.hpp"
#include "skillforge/hdrln.hpp"

namespace skillforge {
namespace {

using testing::state_at;

QNetwork constant_net(std::size_t input_dim, const std::vector<double>& values) {
  DenseLayer l = DenseLayer::zeros(input_dim, values.size(), Activation::identity);
  l.bias = values;
  return QNetwork({l});
}

QNetwork fixed_action_net(Action action) {
  std::vector<double> v(kActionCount, 0.0);
  v[static_cast<std::size_t>(action)] = 1.0;
  return constant_net(kObservationLength, v);
}

Transition tuple(double reward, int k, bool terminal = false) {
  Transition t;
  t.state = SparseVector(3);
  t.next = SparseVector::from_dense(std::vector<double>{0.2, -0.7, 1.0});
  t.reward = reward;
  t.duration = k;
  t.terminal = terminal;
  return t;
}

Skill skill_at(std::size_t index, SubGoal g = SubGoal::exit) {
  Skill s;
  s.name = "s" + std::to_string(index);
  s.sub_goal = g;
  s.index = index;
  return s;
}

TEST(SmdpTarget, TerminalSkillTuple) {
  const auto net = constant_net(3, {4, 5, 6});
  EXPECT_EQ(smdp_target(tuple(0.9006, 3, true), 0.99, net), 0.9006);
  EXPECT_EQ(smdp_target_double(tuple(0.9006, 3, true), 0.99, net, net), 0.9006);
}

TEST(SmdpTarget, PrimitiveTupleReducesToDqnBitExactly) {
  const std::size_t hidden[] = {8, 8};
  const auto target = QNetwork::mlp(3, hidden, 7, 2);
  const auto online = QNetwork::mlp(3, hidden, 7, 3);
  Rng rng(5);
  for (int i = 0; i < 200; ++i) {
    auto t = tuple(uniform_real(rng, -1, 1), 1, uniform01(rng) < 0.2);
    t.next = SparseVector::from_dense(
        std::vector<double>{uniform_real(rng, -1, 1), uniform_real(rng, -1, 1), uniform_real(rng, -1, 1)});
    const double gamma = uniform_real(rng, 0.0, 0.999);
    EXPECT_EQ(smdp_target(t, gamma, target), dqn_target(t, gamma, target));
    EXPECT_EQ(smdp_target_double(t, gamma, online, target), ddqn_target(t, gamma, online, target));
  }
}

TEST(SmdpTarget, HandArithmetic) {
  const auto net = constant_net(3, {0.2, -0.1, 0.05});
  EXPECT_NEAR(smdp_target(tuple(0.900596, 3), 0.99, net), 1.0946558, 1e-9);
}

TEST(SmdpTarget, ExponentEqualsStoredDuration) {
  const auto net = constant_net(3, {1.0});
  for (int k = 1; k <= 30; ++k) EXPECT_NEAR(smdp_target(tuple(0.0, k), 0.9, net), std::pow(0.9, k), 1e-14);
}

TEST(SmdpTarget, BootstrapMaxIncludesSkillOutputs) {
  // Primitive outputs 0..5 are low; the largest value sits on skill output 7.
  const auto net = constant_net(3, {0.1, 0.0, 0.0, 0.0, 0.0, 0.0, 0.3, 0.8});
  EXPECT_NEAR(smdp_target(tuple(0.0, 2), 0.5, net), 0.25 * 0.8, 1e-15);
}

TEST(SmdpTarget, NonPositiveDurationRejected) {
  const auto net = constant_net(3, {1.0});
  EXPECT_THROW(smdp_target(tuple(0.0, 0), 0.9, net), ContractViolation);
  EXPECT_THROW(smdp_target_double(tuple(0.0, -1), 0.9, net, net), ContractViolation);
}

TEST(SmdpTargetDouble, IdenticalNetworksMatchSingle) {
  const std::size_t hidden[] = {8};
  const auto net = QNetwork::mlp(3, hidden, 8, 9);
  for (int k : {1, 2, 5, 17}) {
    EXPECT_EQ(smdp_target_double(tuple(0.3, k), 0.97, net, net), smdp_target(tuple(0.3, k), 0.97, net));
  }
}

TEST(SmdpTargetDouble, DisagreeingArgmax) {
  const auto online = constant_net(3, {0.2, 0.9});
  const auto target = constant_net(3, {0.8, 0.3});
  EXPECT_NEAR(smdp_target_double(tuple(0.5, 4), 0.9, online, target), 0.5 + std::pow(0.9, 4) * 0.3, 1e-15);
}

struct Fixture {
  DomainSpec spec = make_domain("two_room");
  std::shared_ptr<const DeepSkillModule> module =
      std::make_shared<const DeepSkillModule>(DeepSkillModule::array({fixed_action_net(Action::forward)}));
  HdrlnPolicy policy_preferring(std::size_t output) const {
    HdrlnPolicy p;
    std::vector<double> v(kActionCount + 1, 0.0);
    v[output] = 1.0;
    p.controller = constant_net(kObservationLength, v);
    p.module = module;
    p.skills = {skill_at(0)};
    p.gamma = 0.99;
    return p;
  }
};

TEST(HdrlnStep, SkillRouting) {
  Fixture f;
  const auto policy = f.policy_preferring(6);
  // Walks north from the first room towards the exit in the dividing wall.
  const auto s = state_at(f.spec, 14, 6, 0);
  ReplayBuffer buf(10);
  Rng rng(1);
  const auto r = hdrln_step(policy, s, render(s, f.spec), f.spec, 0.0, rng, &buf);
  ASSERT_TRUE(r.skill.has_value());
  EXPECT_EQ(r.choice, 6u);
  EXPECT_EQ(r.duration, 5);
  EXPECT_EQ(r.state.steps - s.steps, 5);
  EXPECT_EQ(r.state.now.row, 9);
  ASSERT_EQ(buf.size(), 1u);
  const auto& t = buf.at(0);
  EXPECT_EQ(t.action, 6u);
  EXPECT_EQ(t.duration, 5);
  EXPECT_EQ(t.reward, discounted_sum(r.skill->rewards, 0.99));
  EXPECT_EQ(t.next, render(r.state, f.spec));
  EXPECT_FALSE(t.terminal);
}

TEST(HdrlnStep, PrimitiveRouting) {
  Fixture f;
  const auto policy = f.policy_preferring(0);
  const auto s = state_at(f.spec, 14, 6, 0);
  ReplayBuffer buf(10);
  Rng rng(1);
  const auto r = hdrln_step(policy, s, render(s, f.spec), f.spec, 0.0, rng, &buf);
  EXPECT_FALSE(r.skill.has_value());
  EXPECT_EQ(r.duration, 1);
  EXPECT_EQ(r.state.now.row, 13);
  ASSERT_EQ(buf.size(), 1u);
  EXPECT_EQ(buf.at(0).duration, 1);
  EXPECT_EQ(buf.at(0).reward, -0.04);
}

TEST(HdrlnStep, ExplorationIsUniformOverJointOutputs) {
  Fixture f;
  auto policy = f.policy_preferring(0);
  const auto s = state_at(f.spec, 14, 6, 0);
  const auto obs = render(s, f.spec);
  Rng rng(3);
  std::vector<int> counts(7, 0);
  constexpr int kDraws = 7000;
  for (int i = 0; i < kDraws; ++i) ++counts[hdrln_step(policy, s, obs, f.spec, 1.0, rng).choice];
  double chi2 = 0.0;
  for (int c : counts) chi2 += (c - 1000.0) * (c - 1000.0) / 1000.0;
  EXPECT_LT(chi2, 22.46);  // 6 dof, p = 0.001
}

TEST(HdrlnStep, TerminalStateRejected) {
  Fixture f;
  const auto policy = f.policy_preferring(0);
  auto s = state_at(f.spec, 14, 6, 0);
  s.steps = f.spec.step_limit;
  Rng rng(1);
  EXPECT_THROW(hdrln_step(policy, s, render(s, f.spec), f.spec, 0.0, rng), ContractViolation);
}

TEST(HdrlnStep, StoredSkillReturnsMatchExecutionLog) {
  Fixture f;
  const std::size_t hidden[] = {16};
  auto module = std::make_shared<const DeepSkillModule>(DeepSkillModule::array(
      {QNetwork::mlp(kObservationLength, hidden, kActionCount, 1), QNetwork::mlp(kObservationLength, hidden, kActionCount, 2)}));
  HdrlnPolicy p;
  p.controller = QNetwork::mlp(kObservationLength, hidden, kActionCount + 2, 3);
  p.module = module;
  p.skills = {skill_at(0), skill_at(1)};
  Rng rng(4);
  ReplayBuffer buf(1000);
  for (int ep = 0; ep < 10; ++ep) {
    auto [s, obs] = reset(f.spec, rng);
    for (;;) {
      const auto r = hdrln_step(p, s, obs, f.spec, 0.5, rng, &buf);
      const auto& t = buf.at(buf.size() - 1);
      if (r.skill) {
        double naive = 0.0;
        for (std::size_t j = 0; j < r.skill->rewards.size(); ++j) naive += std::pow(0.99, j) * r.skill->rewards[j];
        EXPECT_NEAR(t.reward, naive, 1e-12);
        EXPECT_EQ(t.duration, static_cast<int>(r.skill->rewards.size()));
      }
      if (r.terminal) break;
      s = r.state;
      obs = r.observation;
    }
  }
}

TEST(Usage, Percentages) {
  const UsagePoint p{3, 20, 80, -0.5};
  EXPECT_DOUBLE_EQ(p.skill_pct(), 20.0);
  EXPECT_DOUBLE_EQ(p.primitive_pct(), 80.0);
  EXPECT_EQ(UsagePoint{}.skill_pct(), 0.0);
}

TEST(TrainHdrln, SkillsStayFrozenAndRunIsReproducible) {
  Fixture f;
  const std::size_t hidden[] = {16};
  auto module = std::make_shared<const DeepSkillModule>(
      DeepSkillModule::array({QNetwork::mlp(kObservationLength, hidden, kActionCount, 1)}));
  const auto snapshot = *module;
  AgentConfig cfg;
  cfg.n_replay = 1;
  cfg.epoch_length = 200;
  cfg.epochs = 2;
  cfg.eps_endt = 300;
  cfg.learn_start = 50;
  cfg.target_sync_interval = 100;
  cfg.eval_episodes = 4;
  cfg.hidden = {16};
  const auto a = train_hdrln(f.spec, {skill_at(0)}, module, cfg, TargetVariant::ddqn, 3);
  EXPECT_TRUE(module->same_parameters(snapshot));
  EXPECT_EQ(a.policy.controller.output_dim(), 7u);
  ASSERT_EQ(a.curve.size(), 2u);
  ASSERT_EQ(a.usage.epochs.size(), 2u);
  EXPECT_GE(a.env_steps, a.decisions);
  const auto b = train_hdrln(f.spec, {skill_at(0)}, module, cfg, TargetVariant::ddqn, 3);
  EXPECT_EQ(a.curve, b.curve);
  EXPECT_EQ(a.usage.epochs, b.usage.epochs);
  EXPECT_TRUE(a.policy.controller.same_parameters(b.policy.controller));
  for (const auto& u : a.usage.epochs) EXPECT_NEAR(u.skill_pct() + u.primitive_pct(), u.skill_selections + u.primitive_selections > 0 ? 100.0 : 0.0, 1e-9);
}

TEST(ZeroShot, SameDomainMatchesPlainEvaluation) {
  const std::size_t hidden[] = {16};
  const auto dsn = QNetwork::mlp(kObservationLength, hidden, kActionCount, 4);
  const auto d = make_domain("nav1");
  EXPECT_EQ(zero_shot_eval(dsn, d, 25, 3), evaluate(greedy_policy(dsn), d, 25, 3));
}

TEST(ZeroShot, PlannerBeatsRandomNetworkOnTwoRoom) {
  const std::size_t hidden[] = {16};
  const auto random_dsn = QNetwork::mlp(kObservationLength, hidden, kActionCount, 4);
  const auto d = make_domain("two_room");
  const auto untrained = zero_shot_eval(random_dsn, d, 20, 5);
  const auto planned = evaluate(testing::planner_policy(d), d, 20, 5);
  EXPECT_LT(untrained.success_pct, planned.success_pct);
}

}  // namespace
}  // namespace skillforge
