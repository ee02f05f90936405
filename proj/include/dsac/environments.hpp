#pragma once

// Desk-scale continuous-control tasks behind one interface. Environment
// objects are immutable; all mutable state lives in EnvState, which is a plain
// copyable value (copy it to branch a rollout).

#include <array>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "dsac/rng.hpp"

namespace dsac {

struct EnvSpec {
  std::string name;
  int obs_dim = 1;
  int act_dim = 1;
  int max_episode_steps = 1;
  std::vector<double> action_scale;  // physical units per unit action
};

struct EnvState {
  Eigen::VectorXd physical;
  int step_count = 0;
  Rng rng;
};

struct StepResult {
  Eigen::VectorXd obs;
  double reward = 0.0;
  bool done = false;       // true terminal
  bool truncated = false;  // step limit reached
};

class Environment {
 public:
  virtual ~Environment() = default;

  virtual const EnvSpec& spec() const = 0;
  virtual EnvState reset(std::uint64_t seed) const = 0;
  virtual Eigen::VectorXd observe(const EnvState& state) const = 0;
  /// Advances one step. Actions outside [-1, 1] are clamped.
  virtual StepResult step(EnvState& state, const Eigen::VectorXd& action) const = 0;
  /// Fixture constants, echoed into run summaries.
  virtual nlohmann::json fixture() const = 0;
};

/// "pendulum-swingup" | "point-robot-track" | "noisy-bandit-chain".
/// Unknown names or override keys throw ConfigError.
std::unique_ptr<Environment> make_environment(const std::string& name,
                                              const nlohmann::json& overrides = nlohmann::json::object());

/// Wraps to [-pi, pi].
double normalize_angle(double theta);

// --- pendulum-swingup -------------------------------------------------------
// physical = (theta, theta_dot), theta = 0 upright.
struct PendulumParams {
  double g = 10.0;
  double m = 1.0;
  double l = 1.0;
  double dt = 0.05;
  double max_speed = 8.0;
  double max_torque = 2.0;
  int max_episode_steps = 200;
  // Forced initial state; both must be set together.
  bool fixed_init = false;
  double init_theta = 0.0;
  double init_theta_dot = 0.0;
};

class PendulumEnv final : public Environment {
 public:
  explicit PendulumEnv(PendulumParams params = {});
  const EnvSpec& spec() const override { return spec_; }
  EnvState reset(std::uint64_t seed) const override;
  Eigen::VectorXd observe(const EnvState& state) const override;
  StepResult step(EnvState& state, const Eigen::VectorXd& action) const override;
  nlohmann::json fixture() const override;
  const PendulumParams& params() const { return params_; }

  EnvState make_state(double theta, double theta_dot) const;
  /// Rod mechanical energy (pivot at the base, theta = 0 upright).
  double energy(const EnvState& state) const;

 private:
  PendulumParams params_;
  EnvSpec spec_;
};

// --- point-robot-track ------------------------------------------------------
// Unicycle with acceleration / angular-acceleration control following the
// x-axis at a desired speed while one obstacle crosses the path.
// physical = (x, y, psi, v, omega, ox, oy, ovx, ovy).
struct PointRobotParams {
  double dt = 0.02;
  int max_episode_steps = 500;
  double target_speed = 0.28;
  double max_accel = 1.0;          // m/s^2 per unit action
  double max_angular_accel = 3.0;  // rad/s^2 per unit action
  double min_speed = -0.2;
  double max_speed = 1.0;
  double max_turn_rate = 1.5;
  double robot_radius = 0.2;
  double obstacle_radius = 0.15;
  double c_p = 1.0;
  double c_v = 1.0;
  double c_a = 0.05;
  double c_col = 100.0;
  double init_lateral = 0.1;  // |y0| bound
  double init_heading = 0.1;  // |psi0| bound
  double crossing_time_min = 2.5;
  double crossing_time_max = 5.0;
  double obstacle_speed_min = 0.2;
  double obstacle_speed_max = 0.35;
  double crossing_jitter = 0.05;  // m, along the path
};

class PointRobotEnv final : public Environment {
 public:
  explicit PointRobotEnv(PointRobotParams params = {});
  const EnvSpec& spec() const override { return spec_; }
  EnvState reset(std::uint64_t seed) const override;
  Eigen::VectorXd observe(const EnvState& state) const override;
  StepResult step(EnvState& state, const Eigen::VectorXd& action) const override;
  nlohmann::json fixture() const override;
  const PointRobotParams& params() const { return params_; }

  /// Center distance below the sum of radii.
  bool in_collision(const EnvState& state) const;
  static bool collides(double rx, double ry, double ox, double oy, double radius_sum);
  double lateral_error(const EnvState& state) const;

  /// Pure-pursuit steering with speed scheduling around the obstacle's
  /// crossing window. Reads the full state.
  Eigen::VectorXd reference_action(const EnvState& state) const;

 private:
  PointRobotParams params_;
  EnvSpec spec_;
};

// --- noisy-bandit-chain -----------------------------------------------------
// Three states visited in a cycle 0 -> 1 -> 2 -> 0. Reward
// -(a - a*_s)^2 + eta, eta ~ N(0, nu^2). Observation is one-hot.
struct BanditChainParams {
  std::array<double, 3> optimal_actions{-0.5, 0.1, 0.6};
  double nu = 0.3;
  int max_episode_steps = 50;
};

class BanditChainEnv final : public Environment {
 public:
  explicit BanditChainEnv(BanditChainParams params = {});
  const EnvSpec& spec() const override { return spec_; }
  EnvState reset(std::uint64_t seed) const override;
  Eigen::VectorXd observe(const EnvState& state) const override;
  StepResult step(EnvState& state, const Eigen::VectorXd& action) const override;
  nlohmann::json fixture() const override;
  const BanditChainParams& params() const { return params_; }

  EnvState make_state(int index) const;
  static int state_index(const EnvState& state) { return static_cast<int>(state.physical(0)); }

 private:
  BanditChainParams params_;
  EnvSpec spec_;
};

}  // namespace dsac
