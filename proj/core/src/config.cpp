#include "skillforge/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include <fmt/format.h>

#include "skillforge/error.hpp"

namespace skillforge {

bool operator==(const AgentConfig& a, const AgentConfig& b) {
  return a.gamma == b.gamma && a.lr == b.lr && a.eps_start == b.eps_start && a.eps_end == b.eps_end &&
         a.eps_endt == b.eps_endt && a.n_replay == b.n_replay && a.target_sync_interval == b.target_sync_interval &&
         a.batch_size == b.batch_size && a.replay_capacity == b.replay_capacity && a.learn_start == b.learn_start &&
         a.epoch_length == b.epoch_length && a.epochs == b.epochs && a.eval_episodes == b.eval_episodes &&
         a.eval_epsilon == b.eval_epsilon && a.double_q == b.double_q && a.hidden == b.hidden &&
         a.optimizer.decay == b.optimizer.decay && a.optimizer.epsilon == b.optimizer.epsilon &&
         a.target_success == b.target_success && a.target_streak == b.target_streak;
}

bool operator==(const DistillConfig& a, const DistillConfig& b) {
  return a.tau == b.tau && a.switch_interval == b.switch_interval && a.steps_per_teacher == b.steps_per_teacher &&
         a.batch_size == b.batch_size && a.lr == b.lr && a.dataset_size == b.dataset_size &&
         a.rollout_epsilon == b.rollout_epsilon && a.hidden == b.hidden &&
         a.optimizer.decay == b.optimizer.decay && a.optimizer.epsilon == b.optimizer.epsilon;
}

bool operator==(const ExperimentConfig& a, const ExperimentConfig& b) {
  return a.name == b.name && a.domain == b.domain && a.seeds == b.seeds && a.output_dir == b.output_dir &&
         a.variant == b.variant && a.module == b.module && a.skills == b.skills && a.parallel == b.parallel &&
         a.agent == b.agent && a.hdrln == b.hdrln && a.distill == b.distill;
}

AgentConfig desk_skill_config() {
  AgentConfig a;
  a.lr = 1e-4;
  a.n_replay = 1;
  a.eps_endt = 20'000;
  a.target_sync_interval = 500;
  a.epoch_length = 4'000;
  a.epochs = 60;
  a.double_q = true;
  a.target_success = 95.0;
  a.target_streak = 3;
  return a;
}

AgentConfig desk_hdrln_config() {
  AgentConfig h = desk_skill_config();
  h.epoch_length = 2'000;
  h.epochs = 50;
  h.eps_endt = 10'000;
  h.target_success = 0.0;
  h.target_streak = 1;
  return h;
}

DistillConfig desk_distill_config() {
  DistillConfig d;
  d.lr = 3e-4;
  d.optimizer.epsilon = 0.01;
  d.steps_per_teacher = 60'000;
  d.dataset_size = 60'000;
  d.rollout_epsilon = 0.2;
  return d;
}

std::string_view variant_name(TargetVariant v) { return v == TargetVariant::ddqn ? "ddqn" : "dqn"; }
std::string_view module_kind_name(ModuleKind k) { return k == ModuleKind::distilled ? "distilled" : "array"; }

std::string format_double(double v) { return fmt::format("{}", v); }

void ExperimentConfig::validate() const {
  if (name.empty()) throw ConfigError("experiment name must not be empty");
  if (domain.empty()) throw ConfigError("domain must not be empty");
  if (seeds.empty()) throw ConfigError("seed list must not be empty");
  agent.validate();
  hdrln.validate();
  distill.validate();
}

namespace {

struct Field {
  std::function<void(const std::string&)> parse;
  std::function<std::string()> format;
};
using Section = std::vector<std::pair<std::string, Field>>;

[[noreturn]] void bad_value(const std::string& value, const char* expected) {
  throw ConfigError("'" + value + "' is not " + expected);
}

template <class T>
T parse_number(const std::string& s, const char* expected) {
  T v{};
  const auto* end = s.data() + s.size();
  auto [p, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || p != end) bad_value(s, expected);
  return v;
}

double parse_real(const std::string& s) {
  // from_chars for double is missing from some standard libraries; strtod
  // with a full-consumption check is equivalent here.
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size()) bad_value(s, "a number");
  return v;
}

bool parse_bool(const std::string& s) {
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  bad_value(s, "a boolean");
}

template <class T>
std::vector<T> parse_list(const std::string& s) {
  std::vector<T> out;
  std::stringstream in(s);
  for (std::string item; std::getline(in, item, ',');) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    if (b == std::string::npos) bad_value(s, "a comma-separated list of integers");
    out.push_back(parse_number<T>(item.substr(b, e - b + 1), "a comma-separated list of integers"));
  }
  if (out.empty()) bad_value(s, "a non-empty list");
  return out;
}

template <class T>
std::string join(const std::vector<T>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + std::to_string(v[i]);
  return out;
}

Field real(double& x) {
  return {[&x](const std::string& s) { x = parse_real(s); }, [&x] { return format_double(x); }};
}
template <class T>
Field integer(T& x) {
  // Every integer setting is a count, so negatives are caught here where the
  // line number is still known.
  return {[&x](const std::string& s) {
            x = parse_number<T>(s, "a non-negative integer");
            if (x < 0) bad_value(s, "a non-negative integer");
          },
          [&x] { return std::to_string(x); }};
}
Field boolean(bool& x) {
  return {[&x](const std::string& s) { x = parse_bool(s); }, [&x] { return std::string(x ? "true" : "false"); }};
}
Field sizes(std::vector<std::size_t>& x) {
  return {[&x](const std::string& s) { x = parse_list<std::size_t>(s); }, [&x] { return join(x); }};
}

Section agent_fields(AgentConfig& a) {
  return {
      {"gamma", real(a.gamma)},
      {"lr", real(a.lr)},
      {"eps_start", real(a.eps_start)},
      {"eps_end", real(a.eps_end)},
      {"eps_endt", integer(a.eps_endt)},
      {"n_replay", integer(a.n_replay)},
      {"target_sync_interval", integer(a.target_sync_interval)},
      {"batch_size", integer(a.batch_size)},
      {"replay_capacity", integer(a.replay_capacity)},
      {"learn_start", integer(a.learn_start)},
      {"epoch_length", integer(a.epoch_length)},
      {"epochs", integer(a.epochs)},
      {"eval_episodes", integer(a.eval_episodes)},
      {"eval_epsilon", real(a.eval_epsilon)},
      {"double_q", boolean(a.double_q)},
      {"hidden", sizes(a.hidden)},
      {"rmsprop_decay", real(a.optimizer.decay)},
      {"rmsprop_epsilon", real(a.optimizer.epsilon)},
      {"target_success", real(a.target_success)},
      {"target_streak", integer(a.target_streak)},
  };
}

Section distill_fields(DistillConfig& d) {
  return {
      {"tau", real(d.tau)},
      {"switch_interval", integer(d.switch_interval)},
      {"steps_per_teacher", integer(d.steps_per_teacher)},
      {"batch_size", integer(d.batch_size)},
      {"lr", real(d.lr)},
      {"dataset_size", integer(d.dataset_size)},
      {"rollout_epsilon", real(d.rollout_epsilon)},
      {"hidden", sizes(d.hidden)},
      {"rmsprop_decay", real(d.optimizer.decay)},
      {"rmsprop_epsilon", real(d.optimizer.epsilon)},
  };
}

Section experiment_fields(ExperimentConfig& c) {
  return {
      {"name", {[&c](const std::string& s) { c.name = s; }, [&c] { return c.name; }}},
      {"domain", {[&c](const std::string& s) { c.domain = s; }, [&c] { return c.domain; }}},
      {"seeds", {[&c](const std::string& s) { c.seeds = parse_list<std::uint64_t>(s); }, [&c] { return join(c.seeds); }}},
      {"output_dir",
       {[&c](const std::string& s) { c.output_dir = s; }, [&c] { return c.output_dir.generic_string(); }}},
      {"variant",
       {[&c](const std::string& s) {
          if (s == "dqn") {
            c.variant = TargetVariant::dqn;
          } else if (s == "ddqn") {
            c.variant = TargetVariant::ddqn;
          } else {
            bad_value(s, "dqn or ddqn");
          }
        },
        [&c] { return std::string(variant_name(c.variant)); }}},
      {"module",
       {[&c](const std::string& s) {
          if (s == "array") {
            c.module = ModuleKind::array;
          } else if (s == "distilled") {
            c.module = ModuleKind::distilled;
          } else {
            bad_value(s, "array or distilled");
          }
        },
        [&c] { return std::string(module_kind_name(c.module)); }}},
      {"skills", {[&c](const std::string& s) { c.skills = s; }, [&c] { return c.skills.generic_string(); }}},
      {"parallel", boolean(c.parallel)},
  };
}

std::map<std::string, Section> sections(ExperimentConfig& c) {
  return {{"experiment", experiment_fields(c)},
          {"agent", agent_fields(c.agent)},
          {"hdrln", agent_fields(c.hdrln)},
          {"distill", distill_fields(c.distill)}};
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

}  // namespace

ExperimentConfig parse_config(std::string_view text) {
  ExperimentConfig cfg;
  auto table = sections(cfg);
  Section* current = nullptr;
  std::string current_name;
  std::istringstream in{std::string(text)};
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    std::string line = raw;
    if (const auto hash = line.find_first_of("#;"); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("unterminated section header", lineno);
      current_name = trim(std::string_view(line).substr(1, line.size() - 2));
      const auto it = table.find(current_name);
      if (it == table.end()) throw ConfigError("unknown section [" + current_name + "]", lineno);
      current = &it->second;
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("expected 'key = value'", lineno);
    if (!current) throw ConfigError("key outside of any section", lineno);
    const std::string key = trim(std::string_view(line).substr(0, eq));
    const std::string value = trim(std::string_view(line).substr(eq + 1));
    const auto f = std::find_if(current->begin(), current->end(), [&](const auto& kv) { return kv.first == key; });
    if (f == current->end()) throw ConfigError("unknown key '" + key + "' in [" + current_name + "]", lineno);
    try {
      f->second.parse(value);
    } catch (const ConfigError& e) {
      throw ConfigError(current_name + "." + key + ": " + e.what(), lineno);
    }
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string serialize_agent(const AgentConfig& cfg) {
  AgentConfig copy = cfg;
  std::string out;
  for (const auto& [key, field] : agent_fields(copy)) out += fmt::format("{} = {}\n", key, field.format());
  return out;
}

std::string serialize_config(const ExperimentConfig& cfg) {
  ExperimentConfig copy = cfg;
  std::string out;
  for (const char* name : {"experiment", "agent", "hdrln", "distill"}) {
    auto table = sections(copy);
    out += fmt::format("[{}]\n", name);
    for (const auto& [key, field] : table.at(name)) out += fmt::format("{} = {}\n", key, field.format());
    out += '\n';
  }
  return out;
}

}  // namespace skillforge
