#include "valvebench/harness/train_config.hpp"

#include <fstream>
#include <functional>
#include <limits>
#include <sstream>

#include "valvebench/common/archive.hpp"
#include "valvebench/common/errors.hpp"

namespace valvebench::harness {

std::string_view env_kind_name(EnvKind kind) {
  return kind == EnvKind::Toy ? "toy" : "gripper";
}

EnvKind env_kind_from_string(std::string_view name) {
  if (name == "gripper") return EnvKind::Gripper;
  if (name == "toy") return EnvKind::Toy;
  throw FormatError("unknown environment '" + std::string(name) + "' (expected gripper, toy)");
}

namespace {

struct Field {
  const char* key;
  std::function<std::string(const TrainConfig&)> get;
  std::function<void(TrainConfig&, std::string_view)> set;
};

int parse_count(std::string_view v) {
  const auto x = parse_int(v);
  if (x < std::numeric_limits<int>::min() || x > std::numeric_limits<int>::max()) {
    throw FormatError("integer out of range: '" + std::string(v) + "'");
  }
  return static_cast<int>(x);
}

std::string join_ints(const std::vector<int>& xs) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(xs[i]);
  }
  return out;
}

std::vector<int> split_ints(std::string_view v) {
  std::vector<int> out;
  while (!v.empty()) {
    const auto comma = v.find(',');
    out.push_back(parse_count(v.substr(0, comma)));
    if (comma == std::string_view::npos) break;
    v.remove_prefix(comma + 1);
  }
  return out;
}

#define VB_REAL(name)                                                       \
  Field {                                                                   \
    #name, [](const TrainConfig& c) { return format_exact(c.name); },       \
        [](TrainConfig& c, std::string_view v) { c.name = parse_double(v); } \
  }
#define VB_INT(name)                                                         \
  Field {                                                                    \
    #name, [](const TrainConfig& c) { return std::to_string(c.name); },      \
        [](TrainConfig& c, std::string_view v) { c.name = parse_count(v); }  \
  }

const std::vector<Field>& fields() {
  static const std::vector<Field> table{
      {"algorithm", [](const TrainConfig& c) { return std::string(agents::algorithm_name(c.algorithm)); },
       [](TrainConfig& c, std::string_view v) { c.algorithm = agents::algorithm_from_string(v); }},
      {"task", [](const TrainConfig& c) { return std::string(env::task_name(c.task)); },
       [](TrainConfig& c, std::string_view v) { c.task = env::task_from_string(v); }},
      {"environment", [](const TrainConfig& c) { return std::string(env_kind_name(c.environment)); },
       [](TrainConfig& c, std::string_view v) { c.environment = env_kind_from_string(v); }},
      VB_REAL(epsilon),
      VB_REAL(actor_lr),
      VB_REAL(critic_lr),
      VB_INT(batch),
      {"capacity", [](const TrainConfig& c) { return std::to_string(c.capacity); },
       [](TrainConfig& c, std::string_view v) { c.capacity = parse_uint(v); }},
      VB_INT(g),
      {"seed", [](const TrainConfig& c) { return std::to_string(c.seed); },
       [](TrainConfig& c, std::string_view v) { c.seed = parse_uint(v); }},
      VB_INT(steps_per_episode),
      VB_INT(exploration_steps),
      VB_INT(training_steps),
      VB_INT(eval_every_episodes),
      VB_INT(final_eval_steps),
      VB_INT(checkpoint_every_episodes),
      VB_REAL(gamma),
      VB_REAL(tau),
      {"hidden", [](const TrainConfig& c) { return join_ints(c.hidden); },
       [](TrainConfig& c, std::string_view v) { c.hidden = split_ints(v); }},
      VB_INT(policy_delay),
      VB_REAL(target_noise_sigma),
      VB_REAL(target_noise_clip),
      VB_REAL(exploration_noise_sigma),
      VB_REAL(initial_alpha),
      VB_REAL(alpha_lr),
      {"target_entropy",
       [](const TrainConfig& c) {
         return c.target_entropy ? format_exact(*c.target_entropy) : std::string("auto");
       },
       [](TrainConfig& c, std::string_view v) {
         if (v == "auto") {
           c.target_entropy.reset();
         } else {
           c.target_entropy = parse_double(v);
         }
       }},
      VB_REAL(base_radius),
      VB_REAL(base_height),
      VB_REAL(link1),
      VB_REAL(link2),
      VB_REAL(prong_length),
      VB_REAL(contact_radius),
      VB_REAL(contact_height),
      VB_REAL(hub_radius),
      VB_REAL(max_valve_step),
      VB_REAL(max_joint_step),
      {"output_dir", [](const TrainConfig& c) { return c.output_dir; },
       [](TrainConfig& c, std::string_view v) { c.output_dir = std::string(v); }},
  };
  return table;
}

#undef VB_REAL
#undef VB_INT

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

}  // namespace

void TrainConfig::validate() const {
  require(batch > 0, "config: batch must be positive");
  require(capacity > 0, "config: capacity must be positive");
  require(g >= 1, "config: g must be >= 1");
  require(steps_per_episode > 0, "config: steps_per_episode must be positive");
  require(exploration_steps >= 0, "config: exploration_steps must be non-negative");
  require(training_steps > 0, "config: training_steps must be positive");
  require(eval_every_episodes > 0, "config: eval_every_episodes must be positive");
  require(final_eval_steps >= steps_per_episode,
          "config: final_eval_steps must cover at least one episode");
  require(checkpoint_every_episodes > 0, "config: checkpoint_every_episodes must be positive");
  require(epsilon > 0, "config: epsilon must be positive");
  require(output_dir.find_first_of(" \t\n") == std::string::npos,
          "config: output_dir must not contain whitespace");
  if (environment == EnvKind::Gripper) env_config().validate();
  agent_config(1, 1).validate();
}

env::EnvConfig TrainConfig::env_config() const {
  env::EnvConfig e;
  e.geometry.base_radius = base_radius;
  e.geometry.base_height = base_height;
  e.geometry.link1 = link1;
  e.geometry.link2 = link2;
  e.contact.prong_length = prong_length;
  e.contact.contact_radius = contact_radius;
  e.contact.contact_height = contact_height;
  e.contact.hub_radius = hub_radius;
  e.contact.max_valve_step = max_valve_step;
  e.max_joint_step = max_joint_step;
  e.steps_per_episode = steps_per_episode;
  e.task = env::TaskSpec{task, epsilon};
  return e;
}

agents::AgentConfig TrainConfig::agent_config(int observation_dim, int action_dim) const {
  agents::AgentConfig a;
  a.observation_dim = observation_dim;
  a.action_dim = action_dim;
  a.hidden = hidden;
  a.actor_lr = actor_lr;
  a.critic_lr = critic_lr;
  a.gamma = gamma;
  a.tau = tau;
  a.policy_delay = policy_delay;
  a.target_noise_sigma = target_noise_sigma;
  a.target_noise_clip = target_noise_clip;
  a.exploration_noise_sigma = exploration_noise_sigma;
  a.initial_alpha = initial_alpha;
  a.alpha_lr = alpha_lr;
  a.target_entropy = target_entropy;
  return a;
}

void set_config_value(TrainConfig& config, std::string_view key, std::string_view value) {
  for (const auto& f : fields()) {
    if (key == f.key) {
      f.set(config, value);
      return;
    }
  }
  throw FormatError("unknown key '" + std::string(key) + "'");
}

TrainConfig parse_config(std::string_view text, TrainConfig base) {
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string where = "config line " + std::to_string(line_no) + ": ";
    if (eq == std::string_view::npos) throw FormatError(where + "expected 'key = value'");
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    if (value.empty()) throw FormatError(where + "empty value for '" + std::string(key) + "'");
    try {
      set_config_value(base, key, value);
    } catch (const FormatError& e) {
      throw FormatError(where + e.what());
    }
  }
  return base;
}

TrainConfig load_config_file(const std::string& path, TrainConfig base) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot read config file '" + path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str(), std::move(base));
}

std::vector<std::pair<std::string, std::string>> config_entries(const TrainConfig& config) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& f : fields()) out.emplace_back(f.key, f.get(config));
  return out;
}

std::string config_echo(const TrainConfig& config) {
  std::string out;
  for (const auto& [k, v] : config_entries(config)) out += k + " = " + v + "\n";
  return out;
}

}  // namespace valvebench::harness
