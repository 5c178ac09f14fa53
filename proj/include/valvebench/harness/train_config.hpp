#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "valvebench/agents/agent.hpp"
#include "valvebench/env/gripper_env.hpp"

namespace valvebench::harness {

enum class EnvKind { Gripper, Toy };

std::string_view env_kind_name(EnvKind kind);  // "gripper", "toy"
EnvKind env_kind_from_string(std::string_view name);

/// Everything a run needs. Defaults are the benchmark hyperparameters.
struct TrainConfig {
  agents::Algorithm algorithm = agents::Algorithm::Td3;
  env::TaskKind task = env::TaskKind::Fixed90;
  EnvKind environment = EnvKind::Gripper;
  double epsilon = 3.0;

  double actor_lr = 1e-4;
  double critic_lr = 1e-3;
  int batch = 32;
  std::uint64_t capacity = 1'000'000;
  int g = 7;  // gradient updates per environment step
  std::uint64_t seed = 10;
  int steps_per_episode = 50;
  int exploration_steps = 1000;
  int training_steps = 60000;
  int eval_every_episodes = 10;
  int final_eval_steps = 1000;
  int checkpoint_every_episodes = 100;

  double gamma = 0.99;
  double tau = 0.005;
  std::vector<int> hidden{256, 256};
  int policy_delay = 2;
  double target_noise_sigma = 0.2;
  double target_noise_clip = 0.5;
  double exploration_noise_sigma = 0.1;
  double initial_alpha = 1.0;
  double alpha_lr = 1e-3;
  std::optional<double> target_entropy;  // unset: -action_dim

  // Surrogate geometry overrides.
  double base_radius = 100.0;
  double base_height = 60.0;
  double link1 = 60.0;
  double link2 = 50.0;
  double prong_length = 50.0;
  double contact_radius = 15.0;
  double contact_height = 20.0;
  double hub_radius = 10.0;
  double max_valve_step = 20.0;
  double max_joint_step = 15.0;

  std::string output_dir = "runs";

  void validate() const;
  env::EnvConfig env_config() const;
  agents::AgentConfig agent_config(int observation_dim, int action_dim) const;
};

/// Parses flat `key = value` text. Blank lines and `#` comments are skipped;
/// missing keys keep their defaults. Unknown keys and bad values throw
/// FormatError naming the key and line.
TrainConfig parse_config(std::string_view text, TrainConfig base = {});
TrainConfig load_config_file(const std::string& path, TrainConfig base = {});
/// Applies one assignment; throws FormatError for unknown keys.
void set_config_value(TrainConfig& config, std::string_view key, std::string_view value);

/// Every key in canonical order with exact values. Parsing the echo gives
/// back an identical config.
std::vector<std::pair<std::string, std::string>> config_entries(const TrainConfig& config);
std::string config_echo(const TrainConfig& config);

}  // namespace valvebench::harness
