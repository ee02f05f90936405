#pragma once

// The sample/update loop, evaluation, bias measurement, checkpoints and run
// artifacts (metrics.csv, summary.json, checkpoint_<iter>.json, curves.svg).

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dsac/actor.hpp"
#include "dsac/config.hpp"
#include "dsac/critic.hpp"
#include "dsac/environments.hpp"
#include "dsac/oracles.hpp"
#include "dsac/replay.hpp"
#include "dsac/variants.hpp"

namespace dsac {

struct AgentState {
  ParamSet actor;  // s -> [mu; raw log_std]
  ParamSet actor_target;
  AdamState actor_adam;
  CriticPairState critics;
  Temperature temperature;
  long critic_updates = 0;
  long actor_updates = 0;
};

AgentState make_agent(const RunConfig& cfg, const EnvSpec& spec);

struct MetricsRow {
  long iteration = 0;
  long env_steps = 0;
  double avg_return = 0.0;
  double q_mean = 0.0;
  double sigma_mean = 0.0;
  double alpha = 0.0;
  double b1 = 0.0;
  double b2 = 0.0;
  double omega1 = 0.0;
  double omega2 = 0.0;
  double entropy_estimate = 0.0;
  std::optional<double> bias_estimate;
};

std::string metrics_csv_header();
std::string to_csv(const MetricsRow& row);

struct EvalResult {
  double mean = 0.0;
  double std = 0.0;  // population std over episodes
  std::vector<double> returns;
};

/// Called after every evaluation step with the post-step state.
using StepObserver = std::function<void(int episode, const EnvState& state, const StepResult& step)>;

/// Undiscounted raw-reward returns. deterministic: a = tanh(mu). Episode k
/// starts from reset(derive(seed, k)), so arms sharing a seed see the same
/// initial states.
EvalResult evaluate_policy(const ParamSet& actor, const Environment& env, int episodes, bool deterministic,
                           std::uint64_t seed, const StepObserver& observer = {});

/// (s, a) pairs from fresh on-policy rollouts; estimate = min_i Q_i (or Q_1
/// for single-critic variants); truth from mc_true_q.
BiasReport measure_bias(const AgentState& agent, bool twin, const Environment& env, int n_samples, int n_rollouts,
                        double gamma, double reward_scale, Rng& rng);

struct Checkpoint {
  RunConfig config;
  AgentState agent;
  long iteration = 0;
  long env_steps = 0;
};

nlohmann::json checkpoint_to_json(const Checkpoint& ckpt);
Checkpoint checkpoint_from_json(const nlohmann::json& doc);
void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

/// One training run. Owns its environment, buffer and rng streams (env,
/// policy, replay, target, actor, eval, bias), all derived from cfg.seed.
class Trainer {
 public:
  explicit Trainer(RunConfig cfg);

  /// Collect samples_per_iteration steps, then (once warm) run the update phase.
  void run_iteration();
  /// Evaluation row for the current state.
  MetricsRow snapshot_metrics();

  const RunConfig& config() const { return cfg_; }
  const Environment& env() const { return *env_; }
  const AgentState& agent() const { return agent_; }
  const ReplayBuffer& buffer() const { return buffer_; }
  long iteration() const { return iteration_; }
  long env_steps() const { return env_steps_; }
  Checkpoint checkpoint() const;

 private:
  void update_step();

  RunConfig cfg_;
  std::unique_ptr<Environment> env_;
  CriticUpdateProcedure procedure_;
  AgentState agent_;
  ReplayBuffer buffer_;
  Rng env_rng_, policy_rng_, replay_rng_, target_rng_, actor_rng_, bias_rng_;
  EnvState env_state_;
  long episode_ = 0;
  long iteration_ = 0;
  long env_steps_ = 0;
  CriticUpdateStats last_critic_{};
  double last_entropy_ = 0.0;
};

struct TrainResult {
  RunConfig config;
  std::vector<MetricsRow> metrics;
  Checkpoint final_checkpoint;
  nlohmann::json summary;
};

/// Full sample/update training run. When write_outputs is set, metrics.csv,
/// summary.json, checkpoints and curves.svg go to cfg.out_dir. A numerical
/// failure writes diagnostics.json and rethrows NumericalError.
TrainResult train(const RunConfig& cfg, bool write_outputs = true);

struct AblationArm {
  std::string name;
  RunConfig config;
};

/// "refinements": full / no-evs / single-distribution.
/// "reward-scale": scales {0.01, 0.1, 1, 10, 100} x {adaptive, fixed-b}.
std::vector<AblationArm> ablation_arms(const std::string& study, const RunConfig& base);

struct AblationReport {
  std::string study;
  std::vector<AblationArm> arms;
  std::vector<TrainResult> results;
  nlohmann::json summary;
};

AblationReport run_ablation(const std::string& study, const RunConfig& base, bool write_outputs = true);

/// Area under the avg_return curve (trapezoid over env_steps, divided by span).
double learning_curve_area(const std::vector<MetricsRow>& rows);

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

/// Stacked line charts, one panel per entry.
std::string render_svg(const std::vector<std::pair<std::string, std::vector<Series>>>& panels);

}  // namespace dsac
