// Acceptance suite. Each criterion prints one PASS or FAIL line; the exit
// status is nonzero when any selected criterion fails.
//
//   skillforge_acceptance [--criterion A4] [--cache DIR]
//
// Criteria that train networks share DIR, so later ones reuse the skills,
// distilled modules and run outputs produced by earlier ones.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <json.hpp>

#include "skillforge/checkpoint.hpp"
#include "skillforge/cli.hpp"
#include "skillforge/config.hpp"
#include "skillforge/distill.hpp"
#include "skillforge/experiments.hpp"
#include "skillforge/hdrln.hpp"
#include "skillforge/nn.hpp"
#include "skillforge/rng.hpp"

namespace fs = std::filesystem;
using namespace skillforge;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Context {
  fs::path cache;
  ExperimentConfig cfg = replication_defaults();
  LogFn log = [](std::string_view s) { std::cerr << "  " << s << '\n'; };

  fs::path skills() const { return cache / "skills"; }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

/// Rows of a numeric CSV with a header line.
std::vector<std::vector<double>> read_csv(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw std::runtime_error("cannot read " + p.string());
  std::vector<std::vector<double>> rows;
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    rows.push_back(std::move(row));
  }
  return rows;
}

std::map<std::string, std::string> read_kv_csv(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw std::runtime_error("cannot read " + p.string());
  std::map<std::string, std::string> out;
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    const auto comma = line.find(',');
    out[line.substr(0, comma)] = line.substr(comma + 1);
  }
  return out;
}

double max_abs_diff_or_nan(double a, double b) { return std::isfinite(a) && std::isfinite(b) ? std::abs(a - b) : 1e300; }

// ---------------------------------------------------------------------------

Outcome a1_smdp_oracle(const Context&) {
  const DomainSpec spec = make_domain("two_room");
  const std::size_t hidden[] = {32};
  HdrlnPolicy policy;
  policy.gamma = 0.99;
  policy.skills = skills_for({"nav1", "pickup"});
  policy.module = std::make_shared<const DeepSkillModule>(DeepSkillModule::array(
      {QNetwork::mlp(kObservationLength, hidden, kActionCount, 11),
       QNetwork::mlp(kObservationLength, hidden, kActionCount, 12)}));
  policy.controller = QNetwork::mlp(kObservationLength, hidden, policy.output_dim(), 13);
  const QNetwork target = QNetwork::mlp(kObservationLength, hidden, policy.output_dim(), 14);

  double worst = 0.0;
  std::size_t tuples = 0, skill_tuples = 0;
  for (std::uint64_t ep = 0; ep < 100; ++ep) {
    Rng rng(derive_seed(2024, ep));
    auto [state, obs] = reset(spec, rng);
    bool done = false;
    while (!done) {
      ReplayBuffer buffer(1);
      const HdrlnStepResult r = hdrln_step(policy, state, obs, spec, 0.5, rng, &buffer);
      const Transition& t = buffer.at(0);

      // Independent recomputation: rewards from the environment log,
      // discounting by std::pow, explicit loop for the max.
      std::vector<double> rewards = r.skill ? r.skill->rewards : std::vector<double>{r.reward};
      double r_tilde = 0.0;
      for (std::size_t i = 0; i < rewards.size(); ++i) r_tilde += std::pow(policy.gamma, static_cast<double>(i)) * rewards[i];
      const int k = static_cast<int>(rewards.size());
      const ValueVector qt = target.forward(t.next);
      const ValueVector qo = policy.controller.forward(t.next);
      double best = -1e300;
      std::size_t best_online = 0;
      for (std::size_t j = 0; j < qt.size(); ++j) best = std::max(best, qt[j]);
      for (std::size_t j = 1; j < qo.size(); ++j) {
        if (qo[j] > qo[best_online]) best_online = j;
      }
      const double boot = r.terminal ? 0.0 : std::pow(policy.gamma, static_cast<double>(k));
      const double y_single = r_tilde + boot * best;
      const double y_double = r_tilde + boot * qt[best_online];

      worst = std::max(worst, max_abs_diff_or_nan(t.reward, r_tilde));
      worst = std::max(worst, static_cast<double>(t.duration != k));
      worst = std::max(worst, max_abs_diff_or_nan(smdp_target(t, policy.gamma, target), y_single));
      worst = std::max(worst, max_abs_diff_or_nan(smdp_target_double(t, policy.gamma, policy.controller, target), y_double));
      ++tuples;
      skill_tuples += r.skill ? 1 : 0;
      state = r.state;
      obs = r.observation;
      done = r.terminal;
    }
  }
  const bool mixed = skill_tuples > 0 && skill_tuples < tuples;
  return {worst <= 1e-12 && mixed,
          fmt::format("{} tuples ({} skill), max deviation {:.3g}", tuples, skill_tuples, worst)};
}

// ---------------------------------------------------------------------------

double rel_error(double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-6}); }

Outcome a2_gradients(const Context&) {
  Rng rng(77);
  double worst_net = 0.0;
  for (int n = 0; n < 20; ++n) {
    const std::size_t in = 4 + uniform_index(rng, 12);
    std::vector<std::size_t> hidden(1 + uniform_index(rng, 2));
    for (auto& h : hidden) h = 3 + uniform_index(rng, 8);
    const std::size_t out = 2 + uniform_index(rng, 6);
    const QNetwork net = QNetwork::mlp(in, hidden, out, derive_seed(5, n));
    Batch b;
    const std::size_t batch = 1 + uniform_index(rng, 8);
    for (std::size_t i = 0; i < batch; ++i) {
      std::vector<double> x(in);
      for (auto& v : x) v = uniform01(rng) < 0.3 ? 0.0 : uniform_real(rng, -1, 1);
      b.inputs.push_back(SparseVector::from_dense(x));
      b.target_values.push_back(uniform_real(rng, -2, 2));
      b.target_indices.push_back(uniform_index(rng, out));
    }
    std::vector<double> analytic;
    for (const auto& l : net.gradients(b).layers) {
      analytic.insert(analytic.end(), l.weights.begin(), l.weights.end());
      analytic.insert(analytic.end(), l.bias.begin(), l.bias.end());
    }
    auto params = net.parameters();
    QNetwork probe = net;
    constexpr double h = 1e-5;
    for (std::size_t p = 0; p < params.size(); ++p) {
      const double saved = params[p];
      params[p] = saved + h;
      probe.set_parameters(params);
      const double up = probe.gradients(b).loss;
      params[p] = saved - h;
      probe.set_parameters(params);
      const double down = probe.gradients(b).loss;
      params[p] = saved;
      worst_net = std::max(worst_net, rel_error(analytic[p], (up - down) / (2 * h)));
    }
  }

  double worst_distill = 0.0;
  for (int n = 0; n < 20; ++n) {
    std::vector<double> s(kActionCount), q(kActionCount);
    for (auto& x : s) x = uniform_real(rng, -1, 1);
    for (auto& x : q) x = uniform_real(rng, -2, 2);
    const double tau = n % 2 == 0 ? 0.1 : uniform_real(rng, 0.2, 2.0);
    const auto g = distill_loss_and_grad(s, q, tau);
    for (std::size_t i = 0; i < s.size(); ++i) {
      auto up = s, down = s;
      up[i] += 1e-5;
      down[i] -= 1e-5;
      const double fd = (distill_loss_and_grad(up, q, tau).loss - distill_loss_and_grad(down, q, tau).loss) / 2e-5;
      worst_distill = std::max(worst_distill, rel_error(g.grad[i], fd));
    }
  }
  return {worst_net < 1e-4 && worst_distill < 1e-6,
          fmt::format("network max rel err {:.3g} (< 1e-4), distill {:.3g} (< 1e-6)", worst_net, worst_distill)};
}

// ---------------------------------------------------------------------------

const std::vector<std::string> kSkillDomains = {"nav1", "nav2", "pickup", "break", "placement"};
const std::vector<std::uint64_t> kSkillSeeds = {1, 2, 3};

Outcome a3_dsn_trainability(const Context& ctx) {
  bool pass = true;
  std::string detail;
  for (const auto& d : kSkillDomains) {
    double seconds = 0.0;
    int reached = 0;
    int worst_epoch = 0;
    for (const auto s : kSkillSeeds) {
      obtain_dsn(d, ctx.cfg.agent, s, ctx.skills(), ctx.log);
      Metadata meta;
      load_checkpoint(ctx.skills() / fmt::format("{}_seed{}.ckpt", d, s), &meta);
      seconds += std::stod(meta["wall_seconds"]);
      const auto curve = read_csv(ctx.skills() / fmt::format("{}_seed{}.curve.csv", d, s));
      for (const auto& row : curve) {
        if (row[0] <= 300 && row[2] >= 90.0) {
          ++reached;
          worst_epoch = std::max(worst_epoch, static_cast<int>(row[0]));
          break;
        }
      }
    }
    const bool ok = reached == 3 && seconds <= 600.0;
    pass = pass && ok;
    detail += fmt::format("{} {}/3 by epoch {} in {:.0f}s{}; ", d, reached, worst_epoch, seconds, ok ? "" : " (FAIL)");
  }
  return {pass, detail};
}

// ---------------------------------------------------------------------------

ReplicateOptions replicate_options(const Context& ctx, const std::string& sub) {
  ReplicateOptions o;
  o.config = ctx.cfg;
  o.out_dir = ctx.cache / sub;
  o.skill_cache = ctx.skills();
  o.log = ctx.log;
  return o;
}

/// Training time recorded by a replicate run, summed over seeds and methods.
double manifest_seconds(const fs::path& manifest) {
  std::ifstream in(manifest);
  const auto j = nlohmann::json::parse(in);
  double total = 0.0;
  for (const auto& run : j.at("seeds")) total += run.at("wall_seconds").get<double>();
  return total;
}

/// fig6 means for seeds 1..5, computed once and read back afterwards.
std::map<std::string, double> fig6_means(const Context& ctx) {
  const fs::path csv = ctx.cache / "a4" / "fig6" / "fig6.csv";
  if (!fs::exists(csv)) replicate_fig6(replicate_options(ctx, "a4"));
  std::map<std::string, double> out;
  for (const auto& [k, v] : read_kv_csv(csv)) out[k] = std::stod(v);
  return out;
}

Outcome a4_two_room_transfer(const Context& ctx) {
  const auto m = fig6_means(ctx);
  const double gap = m.at("hdrln_end") - m.at("dqn");
  const double secs = manifest_seconds(ctx.cache / "a4" / "fig6" / "manifest.json");
  return {gap >= 15.0 && secs <= 1200.0,
          fmt::format("H-DRLN {:.1f}% vs flat DQN {:.1f}% (gap {:.1f} pp, need >= 15), trained in {:.0f}s (limit 1200)",
                      m.at("hdrln_end"), m.at("dqn"), gap, secs)};
}

Outcome a5_zero_shot(const Context& ctx) {
  const auto m = fig6_means(ctx);
  return {m.at("dsn_zero_shot") >= m.at("dqn"),
          fmt::format("frozen nav1 skill {:.1f}% vs flat DQN {:.1f}%", m.at("dsn_zero_shot"), m.at("dqn"))};
}

// ---------------------------------------------------------------------------

std::vector<QNetwork> complex_teachers(const Context& ctx) {
  std::vector<QNetwork> out;
  for (const auto& d : complex_skill_domains()) {
    out.push_back(obtain_dsn(d, ctx.cfg.agent, ctx.cfg.seeds.front(), ctx.skills(), ctx.log));
  }
  return out;
}

Outcome a6_distillation(const Context& ctx) {
  const auto domains = complex_skill_domains();
  const auto teachers = complex_teachers(ctx);
  const std::uint64_t seed = ctx.cfg.seeds.front();
  const DeepSkillModule student =
      obtain_distilled(teachers, domains, ctx.cfg.distill, 0.1, seed, ctx.skills(), ctx.log);
  Metadata meta;
  load_multi_head(ctx.skills() / fmt::format("distilled_tau0.1_seed{}.ckpt", seed), nullptr, &meta);
  const double distill_secs = std::stod(meta.at("wall_seconds"));
  const auto t0 = std::chrono::steady_clock::now();
  std::vector<DomainSpec> specs;
  for (const auto& d : domains) specs.push_back(make_domain(d));
  const int episodes = ctx.cfg.agent.eval_episodes * 4;
  const std::uint64_t eval_seed = derive_seed(seed, 55);
  const auto orig = evaluate_distilled(DeepSkillModule::array(teachers), specs, episodes, eval_seed);
  const auto dist = evaluate_distilled(student, specs, episodes, eval_seed);
  bool pass = true;
  std::string detail;
  for (std::size_t i = 0; i < domains.size(); ++i) {
    const auto held_out = collect_dataset(teachers[i], specs[i], 1000, derive_seed(seed, 900 + i));
    const double agree = 100.0 * argmax_agreement(student, i, held_out);
    const double retain = orig[i].success_pct > 0 ? 100.0 * dist[i].success_pct / orig[i].success_pct : 0.0;
    const bool ok = retain >= 75.0 && agree >= 85.0;
    pass = pass && ok;
    detail += fmt::format("{} {:.1f}->{:.1f}% (retain {:.0f}%, agree {:.1f}%){}; ", domains[i], orig[i].success_pct,
                          dist[i].success_pct, retain, agree, ok ? "" : " FAIL");
  }
  const double secs = distill_secs + seconds_since(t0);
  detail += fmt::format("distilled and evaluated in {:.0f}s (limit 900)", secs);
  return {pass && secs <= 900.0, detail};
}

// ---------------------------------------------------------------------------

const std::vector<std::string> kA7Methods = {std::string(kMethodHdrlnDdqnArray),
                                             std::string(kMethodHdrlnDdqnDistilled), std::string(kMethodDdqn)};

std::map<std::string, double> fig7_means(const Context& ctx) {
  const fs::path csv = ctx.cache / "a7" / "fig7" / "fig7.csv";
  if (!fs::exists(csv)) replicate_fig7(replicate_options(ctx, "a7"), kA7Methods);
  std::map<std::string, double> out;
  for (const auto& [k, v] : read_kv_csv(csv)) out[k] = std::stod(v.substr(0, v.find(',')));
  return out;
}

Outcome a7_complex(const Context& ctx) {
  const auto m = fig7_means(ctx);
  const double secs = manifest_seconds(ctx.cache / "a7" / "fig7" / "manifest.json");
  const double arr = m.at(std::string(kMethodHdrlnDdqnArray));
  const double dist = m.at(std::string(kMethodHdrlnDdqnDistilled));
  const double flat = m.at(std::string(kMethodDdqn));
  return {arr >= 80.0 && dist >= 80.0 && flat <= 20.0 && secs <= 2700.0,
          fmt::format("H-DRLN array {:.1f}%, distilled {:.1f}% (need >= 80), flat DDQN {:.1f}% (need <= 20), "
                      "trained in {:.0f}s (limit 2700)",
                      arr, dist, flat, secs)};
}

Outcome a8_usage(const Context& ctx) {
  fig7_means(ctx);
  const fs::path dir = ctx.cache / "a7" / "fig7" / std::string(kMethodHdrlnDdqnArray);
  std::vector<double> mean;
  int runs = 0;
  for (const auto s : ctx.cfg.seeds) {
    const auto rows = read_csv(dir / fmt::format("seed_{}", s) / "usage.csv");
    if (mean.empty()) mean.assign(rows.size(), 0.0);
    for (std::size_t e = 0; e < rows.size() && e < mean.size(); ++e) mean[e] += rows[e][1];
    ++runs;
  }
  if (mean.empty()) return {false, "no usage rows"};
  for (auto& v : mean) v /= runs;
  // "Rises early": the peak over the first half of training lies above the
  // first epoch's usage.
  const std::size_t half = std::max<std::size_t>(2, mean.size() / 2);
  const double early_peak = *std::max_element(mean.begin() + 1, mean.begin() + static_cast<long>(std::min(half, mean.size())));
  const double final_usage = mean.back();
  const bool rises = early_peak > mean.front();
  return {rises && final_usage > 0.0 && final_usage < 100.0,
          fmt::format("skill usage epoch 1 {:.1f}%, early peak {:.1f}%, final {:.1f}% (mean of {} seeds)", mean.front(),
                      early_peak, final_usage, runs)};
}

// ---------------------------------------------------------------------------

double gaussian(Rng& rng) {
  const double u1 = 1.0 - uniform01(rng), u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

/// One-hot input, linear output: a Q table in network form.
QNetwork table_network(const std::vector<std::vector<double>>& q) {
  DenseLayer l = DenseLayer::zeros(q.size(), q.front().size(), Activation::identity);
  for (std::size_t s = 0; s < q.size(); ++s) {
    for (std::size_t a = 0; a < q[s].size(); ++a) l.weights[s * l.outputs + a] = q[s][a];
  }
  return QNetwork({l});
}

SparseVector one_hot(std::size_t n, std::size_t i) {
  SparseVector v(n);
  v.push(static_cast<std::uint32_t>(i), 1.0);
  return v;
}

Outcome a9_overestimation(const Context&) {
  constexpr std::size_t kStates = 10, kActions = 4;
  constexpr double gamma = 0.9, noise = 0.5;
  double bias_single = 0.0, bias_double = 0.0;
  int instances_double_lower = 0;
  for (std::uint64_t inst = 0; inst < 20; ++inst) {
    Rng rng(derive_seed(99, inst));
    std::vector<std::vector<std::vector<double>>> p(kStates, std::vector<std::vector<double>>(kActions));
    std::vector<std::vector<double>> r(kStates, std::vector<double>(kActions));
    for (std::size_t s = 0; s < kStates; ++s) {
      for (std::size_t a = 0; a < kActions; ++a) {
        r[s][a] = uniform_real(rng, -1, 1);
        double total = 0.0;
        for (std::size_t t = 0; t < kStates; ++t) total += p[s][a].emplace_back(uniform01(rng));
        for (auto& x : p[s][a]) x /= total;
      }
    }
    // Value iteration to the true action values.
    std::vector<std::vector<double>> q(kStates, std::vector<double>(kActions, 0.0));
    for (int it = 0; it < 2000; ++it) {
      std::vector<double> v(kStates);
      for (std::size_t s = 0; s < kStates; ++s) v[s] = *std::max_element(q[s].begin(), q[s].end());
      for (std::size_t s = 0; s < kStates; ++s) {
        for (std::size_t a = 0; a < kActions; ++a) {
          double e = 0.0;
          for (std::size_t t = 0; t < kStates; ++t) e += p[s][a][t] * v[t];
          q[s][a] = r[s][a] + gamma * e;
        }
      }
    }
    // Online and target estimates carry independent noise.
    auto noisy = [&] {
      auto n = q;
      for (auto& row : n) {
        for (auto& x : row) x += noise * gaussian(rng);
      }
      return n;
    };
    const QNetwork online = table_network(noisy());
    const QNetwork target = table_network(noisy());
    double single = 0.0, dbl = 0.0;
    constexpr int kSamples = 2000;
    for (int i = 0; i < kSamples; ++i) {
      const std::size_t s = uniform_index(rng, kStates), a = uniform_index(rng, kActions);
      double u = uniform01(rng);
      std::size_t next = 0;
      while (next + 1 < kStates && u >= p[s][a][next]) u -= p[s][a][next++];
      const Transition t{one_hot(kStates, s), a, r[s][a], one_hot(kStates, next), false, 1};
      const double truth = r[s][a] + gamma * *std::max_element(q[next].begin(), q[next].end());
      single += dqn_target(t, gamma, target) - truth;
      dbl += ddqn_target(t, gamma, online, target) - truth;
    }
    single /= kSamples;
    dbl /= kSamples;
    bias_single += single / 20;
    bias_double += dbl / 20;
    instances_double_lower += dbl <= single ? 1 : 0;
  }
  return {bias_double <= bias_single,
          fmt::format("mean bias DQN {:+.4f}, DDQN {:+.4f}; DDQN lower on {}/20 instances", bias_single, bias_double,
                      instances_double_lower)};
}

// ---------------------------------------------------------------------------

int run_cli(const std::vector<std::string>& args) {
  std::vector<const char*> argv = {"skillforge"};
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli_main(static_cast<int>(argv.size()), argv.data(), out, err);
  if (code != 0) std::cerr << err.str();
  return code;
}

Outcome a10_determinism(const Context& ctx) {
  const auto t0 = std::chrono::steady_clock::now();
  std::vector<fs::path> roots;
  for (const char* run : {"run1", "run2"}) {
    const fs::path root = ctx.cache / "a10" / run;
    fs::remove_all(root);
    // Separate skill caches so that the nav1 skill is retrained each time.
    const int code = run_cli({"replicate", "fig6", "--seed", "7", "--out", root.string(), "--skill-cache",
                              (root / "skills").string()});
    if (code != 0) return {false, fmt::format("replicate exited with {}", code)};
    roots.push_back(root);
  }
  std::size_t compared = 0;
  std::vector<std::string> differing;
  for (const auto& e : fs::recursive_directory_iterator(roots[0])) {
    if (e.path().extension() != ".csv") continue;
    const fs::path rel = fs::relative(e.path(), roots[0]);
    ++compared;
    if (!fs::exists(roots[1] / rel) || slurp(e.path()) != slurp(roots[1] / rel)) differing.push_back(rel.string());
  }
  std::string detail = fmt::format("{} CSVs compared, {} differ, {:.0f}s", compared, differing.size(), seconds_since(t0));
  for (const auto& d : differing) detail += " " + d;
  return {compared > 0 && differing.empty(), detail};
}

struct Criterion {
  const char* id;
  const char* title;
  std::function<Outcome(const Context&)> run;
};

}  // namespace

int main(int argc, char** argv) {
  std::string only;
  fs::path cache = "acceptance_cache";
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--criterion" && i + 1 < argc) {
      only = argv[++i];
    } else if (a == "--cache" && i + 1 < argc) {
      cache = argv[++i];
    } else {
      std::cerr << "usage: skillforge_acceptance [--criterion A<n>] [--cache DIR]\n";
      return 2;
    }
  }

  const std::vector<Criterion> criteria = {
      {"A1", "SMDP target oracle equivalence", a1_smdp_oracle},
      {"A2", "gradient correctness", a2_gradients},
      {"A3", "skill network trainability", a3_dsn_trainability},
      {"A4", "two-room skill transfer advantage", a4_two_room_transfer},
      {"A5", "zero-shot transfer", a5_zero_shot},
      {"A6", "distillation fidelity", a6_distillation},
      {"A7", "complex-domain hierarchy advantage", a7_complex},
      {"A8", "skill usage signature", a8_usage},
      {"A9", "double target overestimation", a9_overestimation},
      {"A10", "determinism of replicate fig6", a10_determinism},
  };

  Context ctx;
  ctx.cache = cache;
  fs::create_directories(ctx.cache);
  bool all = true, matched = false;
  for (const auto& c : criteria) {
    if (!only.empty() && only != c.id) continue;
    matched = true;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run(ctx);
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    all = all && o.pass;
    std::cout << fmt::format("{:<4}{} {}: {} [{:.1f}s]", c.id, o.pass ? "PASS" : "FAIL", c.title, o.detail,
                             seconds_since(t0))
              << std::endl;
  }
  if (!matched) {
    std::cerr << "unknown criterion " << only << '\n';
    return 2;
  }
  return all ? 0 : 1;
}
