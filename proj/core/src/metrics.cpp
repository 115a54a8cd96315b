#include "skillforge/metrics.hpp"

#include <cstdlib>
#include <fstream>

#include <fmt/format.h>
#include "json.hpp"

#include "skillforge/version.hpp"

namespace skillforge {

namespace {

// Fixed precision keeps the files stable across libc float printers.
std::string num(double v) { return fmt::format("{:.6f}", v); }

}  // namespace

std::string curve_csv(const LearningCurve& curve) {
  std::string out(kCurveHeader);
  out += '\n';
  for (const auto& p : curve) {
    out += fmt::format("{},{},{},{},{},{}\n", p.epoch, p.optimization_steps, num(p.success_pct), num(p.mean_reward),
                       num(p.mean_length), num(p.epsilon));
  }
  return out;
}

std::string usage_csv(const SkillUsageStats& usage) {
  std::string out(kUsageHeader);
  out += '\n';
  for (const auto& u : usage.epochs) {
    out += fmt::format("{},{},{},{}\n", u.epoch, num(u.skill_pct()), num(u.primitive_pct()), num(u.mean_reward));
  }
  return out;
}

std::string report_json(const EvaluationReport& report) {
  nlohmann::ordered_json j;
  j["episodes"] = report.episodes;
  j["success_pct"] = report.success_pct;
  j["mean_reward"] = report.mean_reward;
  j["mean_length"] = report.mean_length;
  auto& log = j["log"] = nlohmann::ordered_json::array();
  for (const auto& e : report.log) log.push_back({{"reward", e.reward}, {"length", e.length}, {"success", e.success}});
  return j.dump(2) + "\n";
}

void write_file_atomic(const std::filesystem::path& path, std::string_view contents) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw std::runtime_error("cannot write " + path.string() + ": " + ec.message());
  }
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw std::runtime_error("cannot move " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

MetricsPaths write_metrics(const LearningCurve& curve, const SkillUsageStats* usage, const EvaluationReport* report,
                           const std::filesystem::path& dir) {
  MetricsPaths paths;
  paths.curve = dir / "curve.csv";
  write_file_atomic(paths.curve, curve_csv(curve));
  if (usage) {
    paths.usage = dir / "usage.csv";
    write_file_atomic(paths.usage, usage_csv(*usage));
  }
  if (report) {
    paths.report = dir / "report.json";
    write_file_atomic(paths.report, report_json(*report));
  }
  return paths;
}

std::string manifest_json(const RunManifest& manifest) {
  nlohmann::ordered_json j;
  j["tool_version"] = std::string(tool_version());
  j["command"] = manifest.command;
  j["config"] = manifest.config;
  auto& seeds = j["seeds"] = nlohmann::ordered_json::array();
  for (const auto& s : manifest.seeds) {
    nlohmann::ordered_json e;
    e["seed"] = s.seed;
    e["wall_seconds"] = s.wall_seconds;
    e["outputs"] = s.outputs;
    e["metrics"] = s.metrics;
    seeds.push_back(std::move(e));
  }
  j["summary"] = manifest.summary;
  return j.dump(2) + "\n";
}

void write_manifest(const RunManifest& manifest, const std::filesystem::path& path) {
  write_file_atomic(path, manifest_json(manifest));
}

std::string_view tool_version() { return kVersion; }

std::filesystem::path output_root(const std::filesystem::path& fallback) {
  if (const char* env = std::getenv("SKILLFORGE_OUT"); env && *env) return env;
  return fallback;
}

}  // namespace skillforge
