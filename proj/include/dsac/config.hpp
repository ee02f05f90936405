#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dsac/variants.hpp"

namespace dsac {

/// Every knob of a training run. Defaults are the published DSAC-T settings
/// where those exist, conventional values otherwise.
struct RunConfig {
  // algorithm and refinement toggles (unset flags take the family default)
  CriticFamily algorithm = CriticFamily::dsact;
  std::optional<bool> expected_value_substitution;
  std::optional<bool> twin;
  std::optional<bool> variance_adjustment;
  double fixed_boundary_b = 20.0;

  std::string env = "pendulum-swingup";
  nlohmann::json env_overrides = nlohmann::json::object();

  double gamma = 0.99;
  double tau = 0.005;
  double lr_critic = 1e-4;
  double lr_actor = 1e-4;
  double lr_alpha = 3e-4;
  double alpha_init = 0.2;
  std::optional<double> target_entropy;  // default -act_dim
  double xi = 3.0;
  double eps = 0.1;
  double eps_omega = 0.1;
  int policy_delay = 2;
  int samples_per_iteration = 20;
  std::optional<int> updates_per_iteration;  // default samples_per_iteration
  long warm_size = 10000;
  long buffer_capacity = 1000000;
  int batch_size = 256;
  std::vector<int> hidden_sizes{256, 256, 256};
  long total_iterations = 1000;
  long eval_interval = 50;
  int eval_episodes = 5;
  std::uint64_t seed = 12345;
  double reward_scale = 1.0;
  std::string out_dir = "runs/default";
  long checkpoint_interval = 0;  // 0: initial and final checkpoints only
  int bias_samples = 0;          // 0: no bias column
  int bias_rollouts = 100;

  VariantConfig variant() const;
  int resolved_updates_per_iteration() const { return updates_per_iteration.value_or(samples_per_iteration); }

  /// Throws ConfigError on any invalid value.
  void validate() const;
};

inline const std::vector<std::uint64_t> kReferenceSeeds{12345, 22345, 32345, 42345, 52345};

/// Unknown keys and wrong types throw ConfigError.
RunConfig config_from_json(const nlohmann::json& doc);
nlohmann::json config_to_json(const RunConfig& cfg);
RunConfig load_config(const std::string& path);

}  // namespace dsac
