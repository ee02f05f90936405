#include "dsac/config.hpp"

#include <cmath>
#include <fstream>
#include <set>

#include "dsac/environments.hpp"
#include "dsac/errors.hpp"

namespace dsac {

using nlohmann::json;

VariantConfig RunConfig::variant() const {
  VariantConfig v;
  switch (algorithm) {
    case CriticFamily::dsact:
      v = VariantConfig::dsact();
      break;
    case CriticFamily::dsacv1:
      v = VariantConfig::dsacv1();
      break;
    case CriticFamily::sac:
      v = VariantConfig::sac();
      break;
  }
  if (expected_value_substitution) v.expected_value_substitution = *expected_value_substitution;
  if (twin) v.twin_distributions = *twin;
  if (variance_adjustment) v.variance_adjustment = *variance_adjustment;
  v.fixed_boundary_b = fixed_boundary_b;
  return v;
}

void RunConfig::validate() const {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw ConfigError("config: " + what);
  };
  require(gamma >= 0.0 && gamma < 1.0, "gamma must lie in [0, 1)");
  require(tau > 0.0 && tau <= 1.0, "tau must lie in (0, 1]");
  require(lr_critic > 0.0 && lr_actor > 0.0 && lr_alpha > 0.0, "learning rates must be positive");
  require(alpha_init > 0.0 && std::isfinite(alpha_init), "alpha_init must be positive");
  require(xi > 0.0, "xi must be positive");
  require(eps > 0.0 && eps_omega > 0.0, "eps and eps_omega must be positive");
  require(policy_delay >= 1, "policy_delay must be >= 1");
  require(samples_per_iteration >= 1, "samples_per_iteration must be >= 1");
  require(resolved_updates_per_iteration() >= 0, "updates_per_iteration must be >= 0");
  require(warm_size >= 0, "warm_size must be >= 0");
  require(buffer_capacity >= 1, "buffer_capacity must be >= 1");
  require(batch_size >= 1 && batch_size <= buffer_capacity, "batch_size must lie in [1, buffer_capacity]");
  require(!hidden_sizes.empty(), "hidden_sizes must not be empty");
  for (int h : hidden_sizes) require(h >= 1, "hidden sizes must be positive");
  require(total_iterations >= 0, "total_iterations must be >= 0");
  require(eval_interval >= 1, "eval_interval must be >= 1");
  require(eval_episodes >= 1, "eval_episodes must be >= 1");
  require(reward_scale > 0.0 && std::isfinite(reward_scale), "reward_scale must be positive");
  require(checkpoint_interval >= 0, "checkpoint_interval must be >= 0");
  require(bias_samples >= 0 && bias_rollouts >= 1, "bias sampling counts must be positive");
  build_variant(variant());
  make_environment(env, env_overrides);  // unknown names and overrides throw
}

namespace {

const std::set<std::string> kKeys{
    "algorithm",     "expected_value_substitution", "twin",          "variance_adjustment", "fixed_boundary_b",
    "env",           "env_overrides",               "gamma",         "tau",                 "lr_critic",
    "lr_actor",      "lr_alpha",                    "alpha_init",    "target_entropy",      "xi",
    "eps",           "eps_omega",                   "policy_delay",  "samples_per_iteration",
    "updates_per_iteration",                        "warm_size",     "buffer_capacity",     "batch_size",
    "hidden_sizes",  "total_iterations",            "eval_interval", "eval_episodes",       "seed",
    "reward_scale",  "out_dir",                     "checkpoint_interval",                  "bias_samples",
    "bias_rollouts"};

template <typename T>
void read(const json& doc, const char* key, T& out) {
  if (!doc.contains(key)) return;
  out = doc.at(key).get<T>();
}

template <typename T>
void read_optional(const json& doc, const char* key, std::optional<T>& out) {
  if (!doc.contains(key)) return;
  if (doc.at(key).is_null()) {
    out.reset();
    return;
  }
  out = doc.at(key).get<T>();
}

template <typename T>
json optional_json(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

}  // namespace

RunConfig config_from_json(const json& doc) {
  if (!doc.is_object()) throw ConfigError("config: top level must be a JSON object");
  for (const auto& [k, v] : doc.items())
    if (!kKeys.contains(k)) throw ConfigError("config: unknown key '" + k + "'");
  RunConfig cfg;
  try {
    if (doc.contains("algorithm")) cfg.algorithm = parse_critic_family(doc.at("algorithm").get<std::string>());
    read_optional(doc, "expected_value_substitution", cfg.expected_value_substitution);
    read_optional(doc, "twin", cfg.twin);
    read_optional(doc, "variance_adjustment", cfg.variance_adjustment);
    read(doc, "fixed_boundary_b", cfg.fixed_boundary_b);
    read(doc, "env", cfg.env);
    if (doc.contains("env_overrides")) cfg.env_overrides = doc.at("env_overrides");
    read(doc, "gamma", cfg.gamma);
    read(doc, "tau", cfg.tau);
    read(doc, "lr_critic", cfg.lr_critic);
    read(doc, "lr_actor", cfg.lr_actor);
    read(doc, "lr_alpha", cfg.lr_alpha);
    read(doc, "alpha_init", cfg.alpha_init);
    read_optional(doc, "target_entropy", cfg.target_entropy);
    read(doc, "xi", cfg.xi);
    read(doc, "eps", cfg.eps);
    read(doc, "eps_omega", cfg.eps_omega);
    read(doc, "policy_delay", cfg.policy_delay);
    read(doc, "samples_per_iteration", cfg.samples_per_iteration);
    read_optional(doc, "updates_per_iteration", cfg.updates_per_iteration);
    read(doc, "warm_size", cfg.warm_size);
    read(doc, "buffer_capacity", cfg.buffer_capacity);
    read(doc, "batch_size", cfg.batch_size);
    read(doc, "hidden_sizes", cfg.hidden_sizes);
    read(doc, "total_iterations", cfg.total_iterations);
    read(doc, "eval_interval", cfg.eval_interval);
    read(doc, "eval_episodes", cfg.eval_episodes);
    read(doc, "seed", cfg.seed);
    read(doc, "reward_scale", cfg.reward_scale);
    read(doc, "out_dir", cfg.out_dir);
    read(doc, "checkpoint_interval", cfg.checkpoint_interval);
    read(doc, "bias_samples", cfg.bias_samples);
    read(doc, "bias_rollouts", cfg.bias_rollouts);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: wrong type: ") + e.what());
  }
  if (!cfg.env_overrides.is_object()) throw ConfigError("config: env_overrides must be an object");
  cfg.validate();
  return cfg;
}

json config_to_json(const RunConfig& cfg) {
  return {{"algorithm", to_string(cfg.algorithm)},
          {"expected_value_substitution", optional_json(cfg.expected_value_substitution)},
          {"twin", optional_json(cfg.twin)},
          {"variance_adjustment", optional_json(cfg.variance_adjustment)},
          {"fixed_boundary_b", cfg.fixed_boundary_b},
          {"env", cfg.env},
          {"env_overrides", cfg.env_overrides},
          {"gamma", cfg.gamma},
          {"tau", cfg.tau},
          {"lr_critic", cfg.lr_critic},
          {"lr_actor", cfg.lr_actor},
          {"lr_alpha", cfg.lr_alpha},
          {"alpha_init", cfg.alpha_init},
          {"target_entropy", optional_json(cfg.target_entropy)},
          {"xi", cfg.xi},
          {"eps", cfg.eps},
          {"eps_omega", cfg.eps_omega},
          {"policy_delay", cfg.policy_delay},
          {"samples_per_iteration", cfg.samples_per_iteration},
          {"updates_per_iteration", optional_json(cfg.updates_per_iteration)},
          {"warm_size", cfg.warm_size},
          {"buffer_capacity", cfg.buffer_capacity},
          {"batch_size", cfg.batch_size},
          {"hidden_sizes", cfg.hidden_sizes},
          {"total_iterations", cfg.total_iterations},
          {"eval_interval", cfg.eval_interval},
          {"eval_episodes", cfg.eval_episodes},
          {"seed", cfg.seed},
          {"reward_scale", cfg.reward_scale},
          {"out_dir", cfg.out_dir},
          {"checkpoint_interval", cfg.checkpoint_interval},
          {"bias_samples", cfg.bias_samples},
          {"bias_rollouts", cfg.bias_rollouts}};
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw ConfigError("config file '" + path + "' is not valid JSON: " + e.what());
  }
  return config_from_json(doc);
}

}  // namespace dsac
