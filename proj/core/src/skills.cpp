#include "skillforge/skills.hpp"

#include <fstream>
#include <sstream>

#include "skillforge/checkpoint.hpp"
#include "skillforge/error.hpp"

namespace skillforge {

using skillforge::detail::require;

std::string_view sub_goal_name(SubGoal g) {
  switch (g) {
    case SubGoal::exit: return "exit";
    case SubGoal::carrying: return "carrying";
    case SubGoal::door_broken: return "door_broken";
    case SubGoal::placed: return "placed";
  }
  return "?";
}

std::optional<SubGoal> parse_sub_goal(std::string_view text) {
  for (SubGoal g : {SubGoal::exit, SubGoal::carrying, SubGoal::door_broken, SubGoal::placed}) {
    if (sub_goal_name(g) == text) return g;
  }
  return std::nullopt;
}

SubGoal sub_goal_for(Task task) {
  switch (task) {
    case Task::reach_exit: return SubGoal::exit;
    case Task::pickup: return SubGoal::carrying;
    case Task::break_door: return SubGoal::door_broken;
    case Task::place_block: return SubGoal::placed;
  }
  return SubGoal::exit;
}

bool sub_goal_reached(SubGoal g, const WorldState& state, const DomainSpec& spec) {
  const Snapshot& s = state.now;
  switch (g) {
    case SubGoal::exit: return spec.at(s.row, s.col) == Tile::exit;
    case SubGoal::carrying: return s.carrying;
    case SubGoal::door_broken: return s.door_broken;
    case SubGoal::placed: return state.block_placed;
  }
  return false;
}

DeepSkillModule DeepSkillModule::array(std::vector<QNetwork> networks) {
  require(!networks.empty(), "DeepSkillModule: no networks");
  for (const auto& n : networks) {
    require(n.output_dim() == kActionCount && n.input_dim() == kObservationLength,
            "DeepSkillModule: network does not map observations to primitive actions");
  }
  return DeepSkillModule(std::move(networks));
}

DeepSkillModule DeepSkillModule::distilled(MultiHeadNetwork network) {
  require(network.head_count() > 0, "DeepSkillModule: no heads");
  require(network.output_dim() == kActionCount && network.input_dim() == kObservationLength,
          "DeepSkillModule: network does not map observations to primitive actions");
  return DeepSkillModule(std::move(network));
}

std::size_t DeepSkillModule::size() const noexcept {
  if (const auto* nets = std::get_if<std::vector<QNetwork>>(&impl_)) return nets->size();
  return std::get<MultiHeadNetwork>(impl_).head_count();
}

ValueVector DeepSkillModule::values(std::size_t skill, const Observation& obs) const {
  require(skill < size(), "skill index out of range");
  if (const auto* nets = std::get_if<std::vector<QNetwork>>(&impl_)) return (*nets)[skill].forward(obs);
  return std::get<MultiHeadNetwork>(impl_).forward(skill, obs);
}

const std::vector<QNetwork>& DeepSkillModule::networks() const {
  require(kind() == Kind::dsn_array, "DeepSkillModule: not a network array");
  return std::get<std::vector<QNetwork>>(impl_);
}

const MultiHeadNetwork& DeepSkillModule::multi_head() const {
  require(kind() == Kind::distilled, "DeepSkillModule: not a distilled module");
  return std::get<MultiHeadNetwork>(impl_);
}

bool DeepSkillModule::same_parameters(const DeepSkillModule& other) const {
  if (kind() != other.kind() || size() != other.size()) return false;
  if (kind() == Kind::distilled) return multi_head().same_parameters(other.multi_head());
  for (std::size_t i = 0; i < size(); ++i) {
    if (!networks()[i].same_parameters(other.networks()[i])) return false;
  }
  return true;
}

std::size_t skill_act(const DeepSkillModule& module, std::size_t skill, const Observation& obs) {
  return argmax(module.values(skill, obs));
}

bool beta_terminate(const Skill& skill, const WorldState& state, const DomainSpec& spec, int elapsed) {
  require(elapsed >= 0, "beta_terminate: negative elapsed time");
  if (elapsed >= skill.max_duration) return true;
  if (task_complete(spec, state) || state.steps >= spec.step_limit) return true;
  return sub_goal_reached(skill.sub_goal, state, spec);
}

double discounted_sum(std::span<const double> rewards, double gamma) {
  require(!rewards.empty(), "discounted_sum: empty reward sequence");
  double acc = 0.0;
  for (std::size_t j = rewards.size(); j-- > 0;) acc = rewards[j] + gamma * acc;
  return acc;
}

SkillExecutionRecord execute_skill(const WorldState& state, const DomainSpec& spec, const Skill& skill,
                                   const DeepSkillModule& module, double gamma) {
  require(skill.can_start(state), "execute_skill: state outside the skill's initiation set");
  require(skill.index < module.size(), "execute_skill: skill index out of range");
  require(skill.max_duration >= 1, "execute_skill: max duration must be at least 1");

  SkillExecutionRecord rec;
  rec.start = state;
  rec.skill = skill.index;
  WorldState cur = state;
  Observation obs = render(cur, spec);
  for (;;) {
    const auto a = static_cast<Action>(skill_act(module, skill.index, obs));
    StepResult r = step(cur, spec, a);
    rec.actions.push_back(a);
    rec.rewards.push_back(r.reward);
    cur = std::move(r.state);
    obs = std::move(r.observation);
    rec.terminal = r.terminal;
    rec.success = r.success;
    const int elapsed = static_cast<int>(rec.actions.size());
    if (r.terminal || beta_terminate(skill, cur, spec, elapsed)) break;
  }
  rec.duration = static_cast<int>(rec.actions.size());
  rec.discounted_return = discounted_sum(rec.rewards, gamma);
  rec.end = std::move(cur);
  rec.end_observation = std::move(obs);
  return rec;
}

namespace {

[[noreturn]] void manifest_error(int line, const std::string& what) {
  throw ConfigError("skill manifest: " + what, line);
}

}  // namespace

SkillManifest parse_skill_manifest(std::string_view text) {
  SkillManifest m;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    std::vector<std::string> tok;
    for (std::string t; fields >> t;) tok.push_back(t);
    if (tok.empty()) continue;
    if (tok[0] == "module") {
      if (tok.size() != 2) manifest_error(lineno, "expected 'module <path>'");
      m.module = tok[1];
      continue;
    }
    if (tok.size() != 4) manifest_error(lineno, "expected 'name sub_goal max_duration source'");
    SkillManifestEntry e;
    e.name = tok[0];
    const auto g = parse_sub_goal(tok[1]);
    if (!g) manifest_error(lineno, "unknown sub-goal '" + tok[1] + "'");
    e.sub_goal = *g;
    try {
      std::size_t used = 0;
      e.max_duration = std::stoi(tok[2], &used);
      if (used != tok[2].size() || e.max_duration < 1) throw std::invalid_argument(tok[2]);
    } catch (const std::exception&) {
      manifest_error(lineno, "max_duration must be a positive integer");
    }
    const std::string& src = tok[3];
    if (src.starts_with("checkpoint:") && src.size() > 11) {
      e.checkpoint = src.substr(11);
    } else if (src.starts_with("head:")) {
      try {
        std::size_t used = 0;
        const unsigned long h = std::stoul(src.substr(5), &used);
        if (used != src.size() - 5) throw std::invalid_argument(src);
        e.head = h;
      } catch (const std::exception&) {
        manifest_error(lineno, "bad head index in '" + src + "'");
      }
    } else {
      manifest_error(lineno, "source must be checkpoint:<path> or head:<index>");
    }
    m.entries.push_back(std::move(e));
  }
  if (m.entries.empty()) throw ConfigError("skill manifest: no skills listed");
  const bool heads = m.entries.front().head.has_value();
  for (const auto& e : m.entries) {
    if (e.head.has_value() != heads) throw ConfigError("skill manifest: cannot mix checkpoint and head sources");
  }
  if (heads && m.module.empty()) throw ConfigError("skill manifest: head sources need a 'module' line");
  return m;
}

std::string format_skill_manifest(const SkillManifest& manifest) {
  std::ostringstream out;
  if (!manifest.module.empty()) out << "module " << manifest.module.generic_string() << '\n';
  for (const auto& e : manifest.entries) {
    out << e.name << ' ' << sub_goal_name(e.sub_goal) << ' ' << e.max_duration << ' ';
    if (e.head) {
      out << "head:" << *e.head;
    } else {
      out << "checkpoint:" << e.checkpoint.generic_string();
    }
    out << '\n';
  }
  return out.str();
}

SkillManifest read_skill_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read skill manifest " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_skill_manifest(buf.str());
}

void write_skill_manifest(const SkillManifest& manifest, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write skill manifest " + path.string());
  out << format_skill_manifest(manifest);
}

SkillSet load_skill_set(const SkillManifest& manifest, const std::filesystem::path& base_dir) {
  const auto resolve = [&](const std::filesystem::path& p) { return p.is_absolute() ? p : base_dir / p; };
  std::vector<Skill> skills;
  for (std::size_t i = 0; i < manifest.entries.size(); ++i) {
    const auto& e = manifest.entries[i];
    skills.push_back(Skill{e.name, e.sub_goal, e.max_duration, e.head.value_or(i), {}});
  }
  for (const auto& e : manifest.entries) {
    if (e.head.has_value() != manifest.entries.front().head.has_value()) {
      throw ConfigError("skill manifest: checkpoint: and head: sources cannot be mixed");
    }
  }
  if (manifest.entries.front().head) {
    MultiHeadNetwork net = load_multi_head(resolve(manifest.module));
    for (const auto& s : skills) {
      if (s.index >= net.head_count()) throw ConfigError("skill manifest: head index beyond the module's heads");
    }
    return SkillSet{std::move(skills), DeepSkillModule::distilled(std::move(net))};
  }
  std::vector<QNetwork> nets;
  for (const auto& e : manifest.entries) nets.push_back(load_checkpoint(resolve(e.checkpoint)));
  return SkillSet{std::move(skills), DeepSkillModule::array(std::move(nets))};
}

}  // namespace skillforge
