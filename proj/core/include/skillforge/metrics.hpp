#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "skillforge/agent.hpp"
#include "skillforge/hdrln.hpp"

namespace skillforge {

inline constexpr std::string_view kCurveHeader = "epoch,optimization_steps,success_pct,mean_reward,mean_length,epsilon";
inline constexpr std::string_view kUsageHeader = "epoch,skill_pct,primitive_pct,mean_reward";

std::string curve_csv(const LearningCurve& curve);
std::string usage_csv(const SkillUsageStats& usage);
/// JSON object with the aggregate numbers and the per-episode log.
std::string report_json(const EvaluationReport& report);

/// Writes via a temporary file and a rename so readers never see a partial
/// file. Throws std::runtime_error naming the path on failure.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

struct MetricsPaths {
  std::filesystem::path curve;
  std::filesystem::path usage;   // empty when no usage was given
  std::filesystem::path report;  // empty when no report was given
};

/// curve.csv, usage.csv and report.json inside `dir` (created if missing).
MetricsPaths write_metrics(const LearningCurve& curve, const SkillUsageStats* usage, const EvaluationReport* report,
                           const std::filesystem::path& dir);

struct SeedRecord {
  std::uint64_t seed = 0;
  std::map<std::string, std::string> outputs;  // label -> path
  double wall_seconds = 0.0;
  std::map<std::string, double> metrics;
};

/// Ties a run's outputs to the configuration that produced them.
struct RunManifest {
  std::string command;
  std::string config;  // serialized ExperimentConfig
  std::vector<SeedRecord> seeds;
  std::map<std::string, double> summary;
};

std::string manifest_json(const RunManifest& manifest);
void write_manifest(const RunManifest& manifest, const std::filesystem::path& path);

std::string_view tool_version();

/// `SKILLFORGE_OUT` when set, else `fallback`.
std::filesystem::path output_root(const std::filesystem::path& fallback);

}  // namespace skillforge
