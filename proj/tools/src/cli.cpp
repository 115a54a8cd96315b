#include "skillforge/cli.hpp"

#include <chrono>
#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "skillforge/checkpoint.hpp"
#include "skillforge/config.hpp"
#include "skillforge/error.hpp"
#include "skillforge/experiments.hpp"
#include "skillforge/metrics.hpp"

namespace skillforge {

namespace fs = std::filesystem;

namespace {

/// A missing input file; reported as a configuration problem.
class MissingInput : public std::runtime_error {
 public:
  explicit MissingInput(const fs::path& p) : std::runtime_error("no such file: " + p.string()) {}
};

void require_file(const fs::path& p) {
  if (!fs::is_regular_file(p)) throw MissingInput(p);
}

struct Common {
  std::string config;
  std::vector<std::uint64_t> seeds;
  std::string out;
  bool parallel = false;
};

ExperimentConfig resolve_config(const Common& c) {
  ExperimentConfig cfg;
  if (!c.config.empty()) {
    require_file(c.config);
    cfg = load_config(c.config);
  }
  if (!c.seeds.empty()) cfg.seeds = c.seeds;
  if (c.parallel) cfg.parallel = true;
  return cfg;
}

/// --out, then SKILLFORGE_OUT, then the config's output_dir.
fs::path resolve_out(const Common& c, const ExperimentConfig& cfg) {
  if (!c.out.empty()) return c.out;
  return output_root(cfg.output_dir);
}

void add_common(CLI::App* app, Common& c, bool many_seeds) {
  app->add_option("--config", c.config, "INI configuration file");
  if (many_seeds) {
    app->add_option("--seed", c.seeds, "Seed (repeatable)");
  } else {
    app->add_option("--seed", c.seeds, "Seed")->expected(1);
  }
  app->add_option("--out", c.out, "Output directory (default: $SKILLFORGE_OUT or the config's output_dir)");
}

std::string join_seeds(const std::vector<std::uint64_t>& s) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) out += (i ? "," : "") + std::to_string(s[i]);
  return out;
}

double elapsed(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream in(s);
  for (std::string item; std::getline(in, item, ',');) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Hierarchical deep RL with reusable skill networks on gridworld rooms", "skillforge"};
  app.set_version_flag("--version", std::string(tool_version()));
  app.require_subcommand(1);
  const LogFn log = [&err](std::string_view s) { err << s << '\n' << std::flush; };

  // train-dsn
  Common dsn_c;
  std::string dsn_domain = "nav1";
  std::string dsn_ckpt;
  auto* dsn = app.add_subcommand("train-dsn", "Train a skill network on one domain");
  add_common(dsn, dsn_c, false);
  dsn->add_option("--domain", dsn_domain, "Domain name or layout file")->capture_default_str();
  dsn->add_option("--checkpoint", dsn_ckpt, "Where to write the trained network (default: <out>/<domain>.ckpt)");

  // distill
  Common dis_c;
  std::string dis_skills;
  std::string dis_domains;
  std::optional<double> dis_tau;
  auto* dis = app.add_subcommand("distill", "Distill several skill networks into one multi-head network");
  add_common(dis, dis_c, false);
  dis->add_option("--skills", dis_skills, "Skill manifest listing the teacher checkpoints")->required();
  dis->add_option("--domains", dis_domains, "Comma-separated teacher domains (default: the skill names)");
  dis->add_option("--tau", dis_tau, "Softmax temperature (overrides [distill] tau)");

  // train-hdrln
  Common hd_c;
  std::string hd_domain = "complex";
  std::string hd_skills;
  std::string hd_variant;
  auto* hd = app.add_subcommand("train-hdrln", "Train a controller over primitives and frozen skills");
  add_common(hd, hd_c, false);
  hd->add_option("--domain", hd_domain, "Domain name or layout file")->capture_default_str();
  hd->add_option("--skills", hd_skills, "Skill manifest")->required();
  hd->add_option("--variant", hd_variant, "dqn or ddqn (overrides [experiment] variant)")
      ->check(CLI::IsMember({"dqn", "ddqn"}));

  // evaluate / zero-shot
  Common ev_c;
  std::string ev_ckpt;
  std::string ev_domain = "nav1";
  std::string ev_skills;
  int ev_episodes = 100;
  double ev_eps = 0.05;
  auto* ev = app.add_subcommand("evaluate", "Evaluate a trained network");
  add_common(ev, ev_c, false);
  ev->add_option("--checkpoint", ev_ckpt, "Network checkpoint")->required();
  ev->add_option("--domain", ev_domain, "Domain name or layout file")->capture_default_str();
  ev->add_option("--episodes", ev_episodes, "Episodes")->capture_default_str()->check(CLI::PositiveNumber);
  ev->add_option("--epsilon", ev_eps, "Evaluation epsilon")->capture_default_str()->check(CLI::Range(0.0, 1.0));
  ev->add_option("--skills", ev_skills, "Skill manifest, when the checkpoint is a controller");

  Common zs_c;
  std::string zs_ckpt;
  std::string zs_domain = "two_room";
  int zs_episodes = 200;
  double zs_eps = 0.05;
  auto* zs = app.add_subcommand("zero-shot", "Run a skill network on another domain without training");
  add_common(zs, zs_c, false);
  zs->add_option("--checkpoint", zs_ckpt, "Skill network checkpoint")->required();
  zs->add_option("--domain", zs_domain, "Target domain")->capture_default_str();
  zs->add_option("--episodes", zs_episodes, "Episodes")->capture_default_str()->check(CLI::PositiveNumber);
  zs->add_option("--epsilon", zs_eps, "Evaluation epsilon")->capture_default_str()->check(CLI::Range(0.0, 1.0));

  // replicate
  Common rep_c;
  std::string rep_target;
  std::string rep_methods;
  std::string rep_cache;
  auto* rep = app.add_subcommand("replicate", "Run a canned comparison at desk scale");
  add_common(rep, rep_c, true);
  rep->add_option("target", rep_target, "fig6, fig7, fig8 or table2")
      ->required()
      ->check(CLI::IsMember({"fig6", "fig7", "fig8", "table2"}));
  rep->add_flag("--parallel", rep_c.parallel, "Run seeds concurrently");
  rep->add_option("--methods", rep_methods, "fig7 only: comma-separated subset of methods");
  rep->add_option("--skill-cache", rep_cache, "Directory for cached skill networks (default: <out>/skills)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << tool_version() << '\n';
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitConfigError;
  }

  try {
    if (dsn->parsed()) {
      ExperimentConfig cfg = resolve_config(dsn_c);
      const fs::path dir = resolve_out(dsn_c, cfg);
      const DomainSpec spec = load_domain(dsn_domain);
      const std::uint64_t seed = cfg.seeds.front();
      const auto t0 = std::chrono::steady_clock::now();
      DsnTrainingResult r = train_dsn(spec, cfg.agent, seed, [&](const CurvePoint& p) {
        log(fmt::format("{} epoch {}: success {:.1f}%", spec.name, p.epoch, p.success_pct));
      });
      const fs::path ckpt = dsn_ckpt.empty() ? dir / (spec.name + ".ckpt") : fs::path(dsn_ckpt);
      if (ckpt.has_parent_path()) fs::create_directories(ckpt.parent_path());
      save_checkpoint(r.net, ckpt,
                      {{"domain", spec.name}, {"seed", std::to_string(seed)},
                       {"optimization_steps", std::to_string(r.optimization_steps)}});
      const MetricsPaths paths = write_metrics(r.curve, nullptr, nullptr, dir / spec.name);
      const double final_success = r.curve.empty() ? 0.0 : r.curve.back().success_pct;
      write_manifest(RunManifest{"train-dsn", serialize_config(cfg),
                                 {SeedRecord{seed,
                                             {{"checkpoint", ckpt.string()}, {"curve", paths.curve.string()}},
                                             elapsed(t0),
                                             {{"final_success", final_success}}}},
                                 {}},
                     dir / spec.name / "manifest.json");
      out << fmt::format("{}: {} epochs, final success {:.1f}%, checkpoint {}\n", spec.name, r.curve.size(),
                         final_success, ckpt.string());
      return kExitOk;
    }

    if (dis->parsed()) {
      ExperimentConfig cfg = resolve_config(dis_c);
      if (dis_tau) cfg.distill.tau = *dis_tau;
      cfg.validate();
      const fs::path dir = resolve_out(dis_c, cfg);
      require_file(dis_skills);
      const SkillManifest manifest = read_skill_manifest(dis_skills);
      if (manifest.entries.front().head) throw ConfigError("distill needs checkpoint sources, not heads");
      std::vector<std::string> domains = split_list(dis_domains);
      if (domains.empty()) {
        for (const auto& e : manifest.entries) domains.push_back(e.name);
      }
      if (domains.size() != manifest.entries.size()) throw ConfigError("--domains must name one domain per skill");
      const fs::path base = fs::path(dis_skills).parent_path();
      std::vector<QNetwork> teachers;
      std::vector<DomainSpec> specs;
      for (std::size_t i = 0; i < domains.size(); ++i) {
        const fs::path p = manifest.entries[i].checkpoint.is_absolute() ? manifest.entries[i].checkpoint
                                                                        : base / manifest.entries[i].checkpoint;
        require_file(p);
        teachers.push_back(load_checkpoint(p));
        specs.push_back(load_domain(domains[i]));
      }
      const std::uint64_t seed = cfg.seeds.front();
      log(fmt::format("distilling {} teachers at tau {}", teachers.size(), format_double(cfg.distill.tau)));
      DistillResult r = distill_multi(teachers, specs, cfg.distill, seed);
      fs::create_directories(dir);
      const fs::path ckpt = dir / "distilled.ckpt";
      std::vector<std::string> names;
      for (const auto& e : manifest.entries) names.push_back(e.name);
      save_multi_head(r.module.multi_head(), names, ckpt, {{"tau", format_double(cfg.distill.tau)}});
      SkillManifest heads;
      heads.module = "distilled.ckpt";
      for (std::size_t i = 0; i < manifest.entries.size(); ++i) {
        SkillManifestEntry e = manifest.entries[i];
        e.checkpoint.clear();
        e.head = i;
        heads.entries.push_back(e);
      }
      write_skill_manifest(heads, dir / "distilled.skills");
      const auto reports = evaluate_distilled(r.module, specs, cfg.agent.eval_episodes, derive_seed(seed, 55));
      std::string csv = "task,success_pct\n";
      for (std::size_t i = 0; i < reports.size(); ++i) {
        csv += fmt::format("{},{:.6f}\n", names[i], reports[i].success_pct);
        out << fmt::format("{}: {:.1f}%\n", names[i], reports[i].success_pct);
      }
      write_file_atomic(dir / "distill_report.csv", csv);
      out << "distilled module: " << ckpt.string() << "\n";
      return kExitOk;
    }

    if (hd->parsed()) {
      ExperimentConfig cfg = resolve_config(hd_c);
      if (hd_variant == "dqn") cfg.variant = TargetVariant::dqn;
      if (hd_variant == "ddqn") cfg.variant = TargetVariant::ddqn;
      const fs::path dir = resolve_out(hd_c, cfg);
      require_file(hd_skills);
      const SkillManifest manifest = read_skill_manifest(hd_skills);
      const fs::path base = fs::path(hd_skills).parent_path();
      if (!manifest.module.empty()) require_file(manifest.module.is_absolute() ? manifest.module : base / manifest.module);
      for (const auto& e : manifest.entries) {
        if (!e.checkpoint.empty()) require_file(e.checkpoint.is_absolute() ? e.checkpoint : base / e.checkpoint);
      }
      SkillSet set = load_skill_set(manifest, base);
      const DomainSpec spec = load_domain(hd_domain);
      const std::uint64_t seed = cfg.seeds.front();
      const auto t0 = std::chrono::steady_clock::now();
      HdrlnTrainingResult r = train_hdrln(spec, set.skills, std::make_shared<const DeepSkillModule>(std::move(set.module)),
                                          cfg.hdrln, cfg.variant, seed, [&](const CurvePoint& p) {
                                            log(fmt::format("{} epoch {}: success {:.1f}%", spec.name, p.epoch,
                                                            p.success_pct));
                                          });
      const fs::path run_dir = dir / (spec.name + "_hdrln");
      const MetricsPaths paths = write_metrics(r.curve, &r.usage, nullptr, run_dir);
      save_checkpoint(r.policy.controller, run_dir / "controller.ckpt",
                      {{"domain", spec.name}, {"seed", std::to_string(seed)}, {"skills", hd_skills}});
      const double fw = final_window_success(r.curve);
      write_manifest(RunManifest{"train-hdrln", serialize_config(cfg),
                                 {SeedRecord{seed,
                                             {{"curve", paths.curve.string()},
                                              {"usage", paths.usage.string()},
                                              {"controller", (run_dir / "controller.ckpt").string()}},
                                             elapsed(t0),
                                             {{"final_window_success", fw}}}},
                                 {}},
                     run_dir / "manifest.json");
      out << fmt::format("{}: final-window success {:.1f}%, outputs in {}\n", spec.name, fw, run_dir.string());
      return kExitOk;
    }

    if (ev->parsed() || zs->parsed()) {
      const bool zero = zs->parsed();
      Common& c = zero ? zs_c : ev_c;
      const ExperimentConfig cfg = resolve_config(c);
      const fs::path dir = resolve_out(c, cfg);
      const fs::path ckpt = zero ? zs_ckpt : ev_ckpt;
      require_file(ckpt);
      const DomainSpec spec = load_domain(zero ? zs_domain : ev_domain);
      const int episodes = zero ? zs_episodes : ev_episodes;
      const double eps = zero ? zs_eps : ev_eps;
      const std::uint64_t seed = cfg.seeds.front();
      QNetwork net = load_checkpoint(ckpt);
      EvaluationReport report;
      if (!zero && !ev_skills.empty()) {
        require_file(ev_skills);
        SkillSet set = load_skill_set(read_skill_manifest(ev_skills), fs::path(ev_skills).parent_path());
        HdrlnPolicy policy{std::move(net), std::make_shared<const DeepSkillModule>(std::move(set.module)),
                           std::move(set.skills), cfg.hdrln.gamma};
        report = evaluate_hdrln(policy, spec, episodes, seed, eps).report;
      } else if (zero) {
        report = zero_shot_eval(net, spec, episodes, seed, eps);
      } else {
        if (net.output_dim() != kActionCount) {
          throw ConfigError("checkpoint has " + std::to_string(net.output_dim()) +
                            " outputs; pass --skills to evaluate a controller");
        }
        report = evaluate(greedy_policy(net), spec, episodes, seed, eps);
      }
      const fs::path report_path = dir / (zero ? "zero_shot_report.json" : "evaluation_report.json");
      write_file_atomic(report_path, report_json(report));
      out << fmt::format("success {:.2f}% over {} episodes (mean reward {:.3f}, mean length {:.1f}); report {}\n",
                         report.success_pct, report.episodes, report.mean_reward, report.mean_length,
                         report_path.string());
      return kExitOk;
    }

    if (rep->parsed()) {
      ReplicateOptions opts;
      opts.config = rep_c.config.empty() ? replication_defaults() : resolve_config(rep_c);
      if (!rep_c.seeds.empty()) opts.config.seeds = rep_c.seeds;
      if (rep_c.parallel) opts.config.parallel = true;
      opts.out_dir = resolve_out(rep_c, opts.config);
      opts.skill_cache = rep_cache;
      opts.log = log;
      log(fmt::format("replicate {} with seeds {} into {}", rep_target, join_seeds(opts.config.seeds),
                      opts.out_dir.string()));
      if (rep_target == "fig6") {
        const Fig6Result r = replicate_fig6(opts);
        out << fmt::format("dqn {:.2f}%  dsn_zero_shot {:.2f}%  hdrln_start {:.2f}%  hdrln_end {:.2f}%\n", r.mean.dqn,
                           r.mean.dsn_zero_shot, r.mean.hdrln_start, r.mean.hdrln_end);
      } else if (rep_target == "fig7") {
        const Fig7Result r = replicate_fig7(opts, split_list(rep_methods));
        for (const auto& m : r.methods) out << fmt::format("{}: {:.2f} +- {:.2f}%\n", m.method, m.mean, m.stddev);
      } else if (rep_target == "fig8") {
        const SkillUsageStats u = replicate_fig8(opts);
        if (!u.epochs.empty()) {
          out << fmt::format("final skill usage {:.2f}% over {} epochs\n", u.epochs.back().skill_pct(),
                             u.epochs.size());
        }
      } else {
        for (const auto& row : replicate_table2(opts)) {
          out << fmt::format("{}: original {:.1f}%  tau=0.1 {:.1f}%  tau=1 {:.1f}%\n", row.task, row.original,
                             row.distilled_sharp, row.distilled_soft);
        }
      }
      out << "outputs in " << (opts.out_dir / rep_target).string() << "\n";
      return kExitOk;
    }
  } catch (const MissingInput& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const DomainError& e) {
    err << "domain error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const CheckpointError& e) {
    err << "checkpoint error: " << e.what() << '\n';
    return kExitRuntimeError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntimeError;
  }
  err << app.help();
  return kExitConfigError;
}

}  // namespace skillforge
