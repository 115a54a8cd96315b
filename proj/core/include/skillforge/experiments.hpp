#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "skillforge/config.hpp"
#include "skillforge/distill.hpp"
#include "skillforge/hdrln.hpp"
#include "skillforge/metrics.hpp"

namespace skillforge {

using LogFn = std::function<void(std::string_view)>;

/// Desk-scale settings used by `replicate` unless a config file overrides
/// them.
ExperimentConfig replication_defaults();

struct ReplicateOptions {
  ExperimentConfig config = replication_defaults();
  std::filesystem::path out_dir = "runs";
  /// Trained skill networks are cached here and reused when the domain, seed
  /// and training settings match. Empty means `out_dir / "skills"`.
  std::filesystem::path skill_cache;
  LogFn log;
};

/// Trains a skill network on `domain`, or loads it from `cache_dir` when a
/// checkpoint made with identical settings exists there.
QNetwork obtain_dsn(const std::string& domain, const AgentConfig& cfg, std::uint64_t seed,
                    const std::filesystem::path& cache_dir, const LogFn& log = {});

/// Skills of the complex domain, in head order.
std::vector<std::string> complex_skill_domains();
std::vector<Skill> skills_for(const std::vector<std::string>& domains);

struct Fig6Row {
  std::uint64_t seed = 0;
  double dqn = 0.0;            // flat learner, final window
  double dsn_zero_shot = 0.0;  // nav1 skill run directly
  double hdrln_start = 0.0;    // controller after its first epoch
  double hdrln_end = 0.0;      // controller, final window
};

struct Fig6Result {
  std::vector<Fig6Row> rows;
  Fig6Row mean;  // seed field unused
};

/// Two-room comparison: flat learner vs frozen nav1 skill vs controller with
/// the nav1 skill, all at the same optimization budget.
Fig6Result replicate_fig6(const ReplicateOptions& opts);

struct MethodRuns {
  std::string method;
  std::vector<std::uint64_t> seeds;
  std::vector<LearningCurve> curves;
  std::vector<SkillUsageStats> usage;  // empty for flat methods
  std::vector<double> final_success;
  double mean = 0.0;
  double stddev = 0.0;
};

inline constexpr std::string_view kMethodHdrlnDqnArray = "hdrln_dqn_array";
inline constexpr std::string_view kMethodHdrlnDdqnArray = "hdrln_ddqn_array";
inline constexpr std::string_view kMethodHdrlnDdqnDistilled = "hdrln_ddqn_distilled";
inline constexpr std::string_view kMethodDdqn = "ddqn";

struct Fig7Result {
  std::vector<MethodRuns> methods;
  const MethodRuns* find(std::string_view method) const;
};

/// Complex-domain learning curves. `methods` empty means all four.
Fig7Result replicate_fig7(const ReplicateOptions& opts, const std::vector<std::string>& methods = {});

/// Skill usage of the DDQN controller with the skill array on the complex
/// domain, averaged over seeds.
SkillUsageStats replicate_fig8(const ReplicateOptions& opts);

struct Table2Row {
  std::string task;
  double original = 0.0;
  double distilled_sharp = 0.0;  // tau = 0.1
  double distilled_soft = 0.0;   // tau = 1
  double agreement_sharp = 0.0;
  double agreement_soft = 0.0;
};

/// Per-task success of the skill networks and of students distilled from
/// them at two temperatures.
std::vector<Table2Row> replicate_table2(const ReplicateOptions& opts);

/// Builds the distilled module for the complex-domain skills at `tau`,
/// caching it next to the skill networks.
DeepSkillModule obtain_distilled(const std::vector<QNetwork>& teachers, const std::vector<std::string>& domains,
                                 DistillConfig cfg, double tau, std::uint64_t seed,
                                 const std::filesystem::path& cache_dir, const LogFn& log = {});

double mean_of(const std::vector<double>& v);
double stddev_of(const std::vector<double>& v);

}  // namespace skillforge
