#include "skillforge/experiments.hpp"

#include <chrono>
#include <cmath>
#include <cstring>
#include <future>
#include <mutex>

#include <fmt/format.h>

#include "skillforge/checkpoint.hpp"
#include "skillforge/error.hpp"

namespace skillforge {

namespace fs = std::filesystem;

ExperimentConfig replication_defaults() {
  ExperimentConfig c;
  c.name = "replicate";
  return c;
}

namespace {

void say(const LogFn& log, const std::string& msg) {
  if (log) log(msg);
}

/// FNV-1a over the raw parameter bytes.
std::string fingerprint(const std::vector<QNetwork>& nets) {
  std::uint64_t h = 1469598103934665603ULL;
  for (const auto& n : nets) {
    for (double p : n.parameters()) {
      unsigned char bytes[sizeof(double)];
      std::memcpy(bytes, &p, sizeof p);
      for (unsigned char b : bytes) {
        h ^= b;
        h *= 1099511628211ULL;
      }
    }
  }
  return fmt::format("{:016x}", h);
}

fs::path cache_dir_of(const ReplicateOptions& opts) {
  return opts.skill_cache.empty() ? opts.out_dir / "skills" : opts.skill_cache;
}

std::string pct(double v) { return fmt::format("{:.6f}", v); }

/// Runs fn(i, seed) for every seed, concurrently when asked. Results stay in
/// seed order either way.
template <class Fn>
auto for_each_seed(const std::vector<std::uint64_t>& seeds, bool parallel, Fn fn) {
  using R = decltype(fn(std::size_t{0}, std::uint64_t{0}));
  std::vector<R> out;
  if (!parallel) {
    for (std::size_t i = 0; i < seeds.size(); ++i) out.push_back(fn(i, seeds[i]));
    return out;
  }
  std::vector<std::future<R>> jobs;
  for (std::size_t i = 0; i < seeds.size(); ++i) jobs.push_back(std::async(std::launch::async, fn, i, seeds[i]));
  for (auto& j : jobs) out.push_back(j.get());
  return out;
}

LogFn locked(const LogFn& log) {
  if (!log) return {};
  auto mu = std::make_shared<std::mutex>();
  return [log, mu](std::string_view s) {
    std::lock_guard lock(*mu);
    log(s);
  };
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

double mean_of(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double stddev_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size()));
}

QNetwork obtain_dsn(const std::string& domain, const AgentConfig& cfg, std::uint64_t seed, const fs::path& cache_dir,
                    const LogFn& log) {
  const fs::path path = cache_dir / fmt::format("{}_seed{}.ckpt", domain, seed);
  const std::string settings = serialize_agent(cfg) + fmt::format("render_version = {}\n", kRenderVersion);
  if (fs::exists(path)) {
    try {
      Metadata meta;
      QNetwork net = load_checkpoint(path, &meta);
      if (meta["domain"] == domain && meta["seed"] == std::to_string(seed) && meta["settings"] == settings) {
        say(log, fmt::format("skill {} (seed {}): cached at {}", domain, seed, path.string()));
        return net;
      }
    } catch (const CheckpointError&) {
      // Stale or damaged cache entries are simply retrained.
    }
  }
  say(log, fmt::format("skill {} (seed {}): training", domain, seed));
  const auto t0 = std::chrono::steady_clock::now();
  DsnTrainingResult r = train_dsn(make_domain(domain), cfg, seed, [&](const CurvePoint& p) {
    say(log, fmt::format("  {} epoch {}: success {:.1f}%", domain, p.epoch, p.success_pct));
  });
  fs::create_directories(cache_dir);
  Metadata meta{{"domain", domain},
                {"seed", std::to_string(seed)},
                {"settings", settings},
                {"epochs", std::to_string(r.curve.size())},
                {"final_success", pct(r.curve.empty() ? 0.0 : r.curve.back().success_pct)},
                {"wall_seconds", fmt::format("{:.1f}", seconds_since(t0))}};
  save_checkpoint(r.net, path, meta);
  write_file_atomic(cache_dir / fmt::format("{}_seed{}.curve.csv", domain, seed), curve_csv(r.curve));
  say(log, fmt::format("skill {} (seed {}): done in {:.0f}s", domain, seed, seconds_since(t0)));
  return std::move(r.net);
}

std::vector<std::string> complex_skill_domains() { return {"nav2", "pickup", "break", "placement"}; }

std::vector<Skill> skills_for(const std::vector<std::string>& domains) {
  std::vector<Skill> skills;
  for (std::size_t i = 0; i < domains.size(); ++i) {
    const DomainSpec spec = make_domain(domains[i]);
    skills.push_back(Skill{domains[i], sub_goal_for(spec.task), kDefaultSkillDuration, i, {}});
  }
  return skills;
}

DeepSkillModule obtain_distilled(const std::vector<QNetwork>& teachers, const std::vector<std::string>& domains,
                                 DistillConfig cfg, double tau, std::uint64_t seed, const fs::path& cache_dir,
                                 const LogFn& log) {
  cfg.tau = tau;
  const fs::path path = cache_dir / fmt::format("distilled_tau{}_seed{}.ckpt", format_double(tau), seed);
  ExperimentConfig probe;
  probe.distill = cfg;
  const std::string settings = serialize_config(probe) + "teachers = " + fingerprint(teachers);
  if (fs::exists(path)) {
    try {
      Metadata meta;
      MultiHeadNetwork net = load_multi_head(path, nullptr, &meta);
      if (meta["settings"] == settings && meta["seed"] == std::to_string(seed)) {
        say(log, fmt::format("distilled module (tau {}): cached at {}", format_double(tau), path.string()));
        return DeepSkillModule::distilled(std::move(net));
      }
    } catch (const CheckpointError&) {
    }
  }
  say(log, fmt::format("distilled module (tau {}): training", format_double(tau)));
  std::vector<DomainSpec> specs;
  for (const auto& d : domains) specs.push_back(make_domain(d));
  const auto t0 = std::chrono::steady_clock::now();
  DistillResult r = distill_multi(teachers, specs, cfg, seed);
  fs::create_directories(cache_dir);
  save_multi_head(r.module.multi_head(), domains, path,
                  {{"settings", settings},
                   {"seed", std::to_string(seed)},
                   {"wall_seconds", fmt::format("{:.1f}", seconds_since(t0))}});
  return std::move(r.module);
}

Fig6Result replicate_fig6(const ReplicateOptions& opts) {
  const ExperimentConfig& cfg = opts.config;
  cfg.validate();
  const LogFn log = locked(opts.log);
  const fs::path dir = opts.out_dir / "fig6";
  const DomainSpec two_room = make_domain("two_room");
  const std::uint64_t skill_seed = cfg.seeds.front();
  const QNetwork nav1 = obtain_dsn("nav1", cfg.agent, skill_seed, cache_dir_of(opts), log);
  const auto module = std::make_shared<const DeepSkillModule>(DeepSkillModule::array({nav1}));
  const std::vector<Skill> skills = {Skill{"nav1", SubGoal::exit, kDefaultSkillDuration, 0, {}}};
  const TargetVariant variant = cfg.variant;
  AgentConfig flat_cfg = cfg.hdrln;
  flat_cfg.double_q = variant == TargetVariant::ddqn;

  struct SeedOut {
    Fig6Row row;
    SeedRecord record;
  };
  auto per_seed = [&](std::size_t, std::uint64_t seed) {
    const auto t0 = std::chrono::steady_clock::now();
    const fs::path sdir = dir / fmt::format("seed_{}", seed);
    SeedOut out;
    out.row.seed = seed;
    out.record.seed = seed;

    DsnTrainingResult flat = train_dsn(two_room, flat_cfg, seed, [&](const CurvePoint& p) {
      say(log, fmt::format("fig6 seed {} flat epoch {}: {:.1f}%", seed, p.epoch, p.success_pct));
    });
    out.row.dqn = final_window_success(flat.curve);
    out.record.outputs["flat_curve"] = write_metrics(flat.curve, nullptr, nullptr, sdir / "flat").curve.string();

    const EvaluationReport zs = zero_shot_eval(nav1, two_room, cfg.hdrln.eval_episodes * 4, derive_seed(seed, 77),
                                               cfg.hdrln.eval_epsilon);
    out.row.dsn_zero_shot = zs.success_pct;
    out.record.outputs["zero_shot_report"] =
        write_metrics({}, nullptr, &zs, sdir / "zero_shot").report.string();

    HdrlnTrainingResult h = train_hdrln(two_room, skills, module, cfg.hdrln, variant, seed, [&](const CurvePoint& p) {
      say(log, fmt::format("fig6 seed {} hdrln epoch {}: {:.1f}%", seed, p.epoch, p.success_pct));
    });
    out.row.hdrln_start = h.curve.empty() ? 0.0 : h.curve.front().success_pct;
    out.row.hdrln_end = final_window_success(h.curve);
    const MetricsPaths hp = write_metrics(h.curve, &h.usage, nullptr, sdir / "hdrln");
    out.record.outputs["hdrln_curve"] = hp.curve.string();
    out.record.outputs["hdrln_usage"] = hp.usage.string();

    out.record.wall_seconds = seconds_since(t0);
    out.record.metrics = {{"dqn", out.row.dqn},
                          {"dsn_zero_shot", out.row.dsn_zero_shot},
                          {"hdrln_start", out.row.hdrln_start},
                          {"hdrln_end", out.row.hdrln_end}};
    return out;
  };
  const std::vector<SeedOut> outs = for_each_seed(cfg.seeds, cfg.parallel, per_seed);

  Fig6Result result;
  RunManifest manifest{"replicate fig6", serialize_config(cfg), {}, {}};
  std::vector<double> dqn, zs, start, end;
  std::string per_seed_csv = "seed,dqn,dsn_zero_shot,hdrln_start,hdrln_end\n";
  for (const auto& o : outs) {
    result.rows.push_back(o.row);
    manifest.seeds.push_back(o.record);
    dqn.push_back(o.row.dqn);
    zs.push_back(o.row.dsn_zero_shot);
    start.push_back(o.row.hdrln_start);
    end.push_back(o.row.hdrln_end);
    per_seed_csv += fmt::format("{},{},{},{},{}\n", o.row.seed, pct(o.row.dqn), pct(o.row.dsn_zero_shot),
                                pct(o.row.hdrln_start), pct(o.row.hdrln_end));
  }
  result.mean = Fig6Row{0, mean_of(dqn), mean_of(zs), mean_of(start), mean_of(end)};
  const std::string summary = fmt::format("method,success_pct\ndqn,{}\ndsn_zero_shot,{}\nhdrln_start,{}\nhdrln_end,{}\n",
                                          pct(result.mean.dqn), pct(result.mean.dsn_zero_shot),
                                          pct(result.mean.hdrln_start), pct(result.mean.hdrln_end));
  write_file_atomic(dir / "fig6.csv", summary);
  write_file_atomic(dir / "fig6_seeds.csv", per_seed_csv);
  manifest.summary = {{"dqn", result.mean.dqn},
                      {"dsn_zero_shot", result.mean.dsn_zero_shot},
                      {"hdrln_start", result.mean.hdrln_start},
                      {"hdrln_end", result.mean.hdrln_end}};
  write_manifest(manifest, dir / "manifest.json");
  return result;
}

const MethodRuns* Fig7Result::find(std::string_view method) const {
  for (const auto& m : methods) {
    if (m.method == method) return &m;
  }
  return nullptr;
}

namespace {

struct ComplexSetup {
  std::vector<std::string> domains;
  std::vector<Skill> skills;
  std::shared_ptr<const DeepSkillModule> array;
  std::shared_ptr<const DeepSkillModule> distilled;
};

ComplexSetup complex_setup(const ReplicateOptions& opts, bool need_distilled, const LogFn& log) {
  const ExperimentConfig& cfg = opts.config;
  ComplexSetup s;
  s.domains = complex_skill_domains();
  s.skills = skills_for(s.domains);
  std::vector<QNetwork> nets;
  for (const auto& d : s.domains) nets.push_back(obtain_dsn(d, cfg.agent, cfg.seeds.front(), cache_dir_of(opts), log));
  if (need_distilled) {
    s.distilled = std::make_shared<const DeepSkillModule>(
        obtain_distilled(nets, s.domains, cfg.distill, cfg.distill.tau, cfg.seeds.front(), cache_dir_of(opts), log));
  }
  s.array = std::make_shared<const DeepSkillModule>(DeepSkillModule::array(std::move(nets)));
  return s;
}

Fig7Result run_complex_methods(const ReplicateOptions& opts, std::vector<std::string> methods,
                               const std::string& target) {
  const ExperimentConfig& cfg = opts.config;
  cfg.validate();
  const LogFn log = locked(opts.log);
  if (methods.empty()) {
    methods = {std::string(kMethodHdrlnDqnArray), std::string(kMethodHdrlnDdqnArray),
               std::string(kMethodHdrlnDdqnDistilled), std::string(kMethodDdqn)};
  }
  bool need_distilled = false;
  for (const auto& m : methods) {
    if (m != kMethodHdrlnDqnArray && m != kMethodHdrlnDdqnArray && m != kMethodHdrlnDdqnDistilled && m != kMethodDdqn) {
      throw ConfigError("unknown method '" + m + "'");
    }
    need_distilled = need_distilled || m == kMethodHdrlnDdqnDistilled;
  }
  const ComplexSetup setup = complex_setup(opts, need_distilled, log);
  const DomainSpec complex = make_domain("complex");
  const fs::path dir = opts.out_dir / target;

  Fig7Result result;
  RunManifest manifest{"replicate " + target, serialize_config(cfg), {}, {}};
  std::string seeds_csv = "method,seed,final_success\n";
  std::string summary_csv = "method,mean_final_success,std_final_success\n";
  for (const auto& method : methods) {
    struct SeedOut {
      LearningCurve curve;
      std::optional<SkillUsageStats> usage;
      SeedRecord record;
    };
    auto per_seed = [&](std::size_t, std::uint64_t seed) {
      const auto t0 = std::chrono::steady_clock::now();
      const auto progress = [&](const CurvePoint& p) {
        say(log, fmt::format("{} {} seed {} epoch {}: {:.1f}%", target, method, seed, p.epoch, p.success_pct));
      };
      SeedOut out;
      out.record.seed = seed;
      const fs::path sdir = dir / method / fmt::format("seed_{}", seed);
      if (method == kMethodDdqn) {
        AgentConfig flat = cfg.hdrln;
        flat.double_q = true;
        out.curve = train_dsn(complex, flat, seed, progress).curve;
      } else {
        const bool distilled = method == kMethodHdrlnDdqnDistilled;
        const TargetVariant v = method == kMethodHdrlnDqnArray ? TargetVariant::dqn : TargetVariant::ddqn;
        HdrlnTrainingResult h = train_hdrln(complex, setup.skills, distilled ? setup.distilled : setup.array,
                                            cfg.hdrln, v, seed, progress);
        out.curve = std::move(h.curve);
        out.usage = std::move(h.usage);
      }
      const MetricsPaths p = write_metrics(out.curve, out.usage ? &*out.usage : nullptr, nullptr, sdir);
      out.record.outputs[method + "_curve"] = p.curve.string();
      if (out.usage) out.record.outputs[method + "_usage"] = p.usage.string();
      out.record.wall_seconds = seconds_since(t0);
      out.record.metrics[method] = final_window_success(out.curve);
      return out;
    };
    std::vector<SeedOut> outs = for_each_seed(cfg.seeds, cfg.parallel, per_seed);
    MethodRuns runs;
    runs.method = method;
    for (std::size_t i = 0; i < outs.size(); ++i) {
      runs.seeds.push_back(cfg.seeds[i]);
      runs.final_success.push_back(final_window_success(outs[i].curve));
      runs.curves.push_back(std::move(outs[i].curve));
      if (outs[i].usage) runs.usage.push_back(std::move(*outs[i].usage));
      manifest.seeds.push_back(std::move(outs[i].record));
      seeds_csv += fmt::format("{},{},{}\n", method, cfg.seeds[i], pct(runs.final_success.back()));
    }
    runs.mean = mean_of(runs.final_success);
    runs.stddev = stddev_of(runs.final_success);
    summary_csv += fmt::format("{},{},{}\n", method, pct(runs.mean), pct(runs.stddev));
    manifest.summary[method + "_mean"] = runs.mean;
    manifest.summary[method + "_std"] = runs.stddev;
    result.methods.push_back(std::move(runs));
  }
  write_file_atomic(dir / (target + ".csv"), summary_csv);
  write_file_atomic(dir / (target + "_seeds.csv"), seeds_csv);
  write_manifest(manifest, dir / "manifest.json");
  return result;
}

}  // namespace

Fig7Result replicate_fig7(const ReplicateOptions& opts, const std::vector<std::string>& methods) {
  return run_complex_methods(opts, methods, "fig7");
}

SkillUsageStats replicate_fig8(const ReplicateOptions& opts) {
  const Fig7Result r = run_complex_methods(opts, {std::string(kMethodHdrlnDdqnArray)}, "fig8");
  const MethodRuns& runs = r.methods.front();
  SkillUsageStats mean;
  std::string csv(kUsageHeader);
  csv += '\n';
  const std::size_t epochs = runs.usage.empty() ? 0 : runs.usage.front().epochs.size();
  for (std::size_t e = 0; e < epochs; ++e) {
    UsagePoint p;
    p.epoch = static_cast<int>(e + 1);
    double skill = 0.0, prim = 0.0, reward = 0.0;
    for (const auto& u : runs.usage) {
      p.skill_selections += u.epochs[e].skill_selections;
      p.primitive_selections += u.epochs[e].primitive_selections;
      skill += u.epochs[e].skill_pct();
      prim += u.epochs[e].primitive_pct();
      reward += u.epochs[e].mean_reward;
    }
    const double n = static_cast<double>(runs.usage.size());
    p.mean_reward = reward / n;
    mean.epochs.push_back(p);
    csv += fmt::format("{},{},{},{}\n", p.epoch, pct(skill / n), pct(prim / n), pct(p.mean_reward));
  }
  write_file_atomic(opts.out_dir / "fig8" / "fig8.csv", csv);
  return mean;
}

std::vector<Table2Row> replicate_table2(const ReplicateOptions& opts) {
  const ExperimentConfig& cfg = opts.config;
  cfg.validate();
  const LogFn log = locked(opts.log);
  const std::vector<std::string> domains = complex_skill_domains();
  const std::uint64_t seed = cfg.seeds.front();
  std::vector<QNetwork> teachers;
  std::vector<DomainSpec> specs;
  for (const auto& d : domains) {
    teachers.push_back(obtain_dsn(d, cfg.agent, seed, cache_dir_of(opts), log));
    specs.push_back(make_domain(d));
  }
  const int episodes = cfg.agent.eval_episodes * 4;
  const std::uint64_t eval_seed = derive_seed(seed, 55);
  const DeepSkillModule original = DeepSkillModule::array(teachers);
  const auto orig = evaluate_distilled(original, specs, episodes, eval_seed, cfg.agent.eval_epsilon);

  std::vector<Table2Row> rows(domains.size());
  for (const double tau : {0.1, 1.0}) {
    const DeepSkillModule student = obtain_distilled(teachers, domains, cfg.distill, tau, seed, cache_dir_of(opts), log);
    const auto reps = evaluate_distilled(student, specs, episodes, eval_seed, cfg.agent.eval_epsilon);
    for (std::size_t i = 0; i < domains.size(); ++i) {
      // Held-out states: fresh teacher rollouts, not the training dataset.
      const auto held_out = collect_dataset(teachers[i], specs[i], 1000, derive_seed(seed, 900 + i));
      const double agree = 100.0 * argmax_agreement(student, i, held_out);
      (tau < 0.5 ? rows[i].distilled_sharp : rows[i].distilled_soft) = reps[i].success_pct;
      (tau < 0.5 ? rows[i].agreement_sharp : rows[i].agreement_soft) = agree;
    }
  }
  std::string csv = "task,original,distilled_tau_0.1,distilled_tau_1,agreement_tau_0.1,agreement_tau_1\n";
  for (std::size_t i = 0; i < domains.size(); ++i) {
    rows[i].task = domains[i];
    rows[i].original = orig[i].success_pct;
    csv += fmt::format("{},{},{},{},{},{}\n", rows[i].task, pct(rows[i].original), pct(rows[i].distilled_sharp),
                       pct(rows[i].distilled_soft), pct(rows[i].agreement_sharp), pct(rows[i].agreement_soft));
  }
  write_file_atomic(opts.out_dir / "table2" / "table2.csv", csv);
  return rows;
}

}  // namespace skillforge
