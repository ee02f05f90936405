#include "dsac/environments.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

#include "dsac/errors.hpp"

namespace dsac {

using nlohmann::json;

double normalize_angle(double theta) {
  const double two_pi = 2.0 * std::numbers::pi;
  double r = std::fmod(theta + std::numbers::pi, two_pi);
  if (r < 0.0) r += two_pi;
  return r - std::numbers::pi;
}

namespace {

Eigen::VectorXd clamp_action(const Eigen::VectorXd& action, int act_dim) {
  if (action.size() != act_dim) throw ConfigError("env step: action has wrong dimension");
  return action.cwiseMax(-1.0).cwiseMin(1.0);
}

void reject_unknown(const json& overrides, const std::set<std::string>& allowed, const std::string& env) {
  if (!overrides.is_object()) throw ConfigError("env overrides must be a JSON object");
  for (const auto& [k, v] : overrides.items())
    if (!allowed.contains(k)) throw ConfigError("unknown override '" + k + "' for environment " + env);
}

template <typename T>
void read(const json& o, const char* key, T& out) {
  if (o.contains(key)) {
    try {
      out = o.at(key).get<T>();
    } catch (const json::exception&) {
      throw ConfigError(std::string("env override '") + key + "' has the wrong type");
    }
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// pendulum-swingup

PendulumEnv::PendulumEnv(PendulumParams params) : params_(params) {
  if (params_.max_episode_steps < 1) throw ConfigError("pendulum: max_episode_steps must be >= 1");
  spec_ = {"pendulum-swingup", 3, 1, params_.max_episode_steps, {params_.max_torque}};
}

EnvState PendulumEnv::make_state(double theta, double theta_dot) const {
  EnvState s;
  s.physical = Eigen::Vector2d(theta, theta_dot);
  return s;
}

EnvState PendulumEnv::reset(std::uint64_t seed) const {
  EnvState s;
  s.rng = derive_rng(seed, "pendulum-reset");
  if (params_.fixed_init) {
    s.physical = Eigen::Vector2d(params_.init_theta, params_.init_theta_dot);
  } else {
    const double theta = uniform(s.rng, -std::numbers::pi, std::numbers::pi);
    const double theta_dot = uniform(s.rng, -1.0, 1.0);
    s.physical = Eigen::Vector2d(theta, theta_dot);
  }
  return s;
}

Eigen::VectorXd PendulumEnv::observe(const EnvState& state) const {
  const double th = state.physical(0);
  return Eigen::Vector3d(std::cos(th), std::sin(th), state.physical(1));
}

StepResult PendulumEnv::step(EnvState& state, const Eigen::VectorXd& action) const {
  const Eigen::VectorXd a = clamp_action(action, 1);
  const double u = params_.max_torque * a(0);
  const double th = state.physical(0);
  const double thdot = state.physical(1);
  const double th_n = normalize_angle(th);
  const double cost = th_n * th_n + 0.1 * thdot * thdot + 0.001 * u * u;

  // Velocity first, then position with the new velocity.
  const double accel = 3.0 * params_.g / (2.0 * params_.l) * std::sin(th) + 3.0 / (params_.m * params_.l * params_.l) * u;
  const double new_thdot = std::clamp(thdot + accel * params_.dt, -params_.max_speed, params_.max_speed);
  const double new_th = th + new_thdot * params_.dt;
  state.physical(0) = new_th;
  state.physical(1) = new_thdot;
  state.step_count += 1;

  StepResult r;
  r.obs = observe(state);
  r.reward = -cost;
  r.done = false;
  r.truncated = state.step_count >= params_.max_episode_steps;
  return r;
}

double PendulumEnv::energy(const EnvState& state) const {
  const double inertia = params_.m * params_.l * params_.l / 3.0;
  const double thdot = state.physical(1);
  return 0.5 * inertia * thdot * thdot + params_.m * params_.g * 0.5 * params_.l * std::cos(state.physical(0));
}

json PendulumEnv::fixture() const {
  json j = {{"name", spec_.name},
            {"g", params_.g},
            {"m", params_.m},
            {"l", params_.l},
            {"dt", params_.dt},
            {"max_speed", params_.max_speed},
            {"max_torque", params_.max_torque},
            {"max_episode_steps", params_.max_episode_steps},
            {"reward", "-(theta_norm^2 + 0.1 theta_dot^2 + 0.001 u^2)"},
            {"integrator", "semi-implicit Euler"}};
  if (params_.fixed_init) {
    j["init_theta"] = params_.init_theta;
    j["init_theta_dot"] = params_.init_theta_dot;
  }
  return j;
}

// ---------------------------------------------------------------------------
// point-robot-track

namespace {
enum RobotIdx { kX = 0, kY, kPsi, kV, kOmega, kOx, kOy, kOvx, kOvy };
}

PointRobotEnv::PointRobotEnv(PointRobotParams params) : params_(params) {
  if (params_.max_episode_steps < 1) throw ConfigError("point-robot: max_episode_steps must be >= 1");
  if (params_.crossing_time_min > params_.crossing_time_max || params_.obstacle_speed_min > params_.obstacle_speed_max)
    throw ConfigError("point-robot: empty obstacle sampling range");
  spec_ = {"point-robot-track", 7, 2, params_.max_episode_steps, {params_.max_accel, params_.max_angular_accel}};
}

EnvState PointRobotEnv::reset(std::uint64_t seed) const {
  EnvState s;
  s.rng = derive_rng(seed, "point-robot-reset");
  const auto& p = params_;
  s.physical = Eigen::VectorXd::Zero(9);
  s.physical(kY) = uniform(s.rng, -p.init_lateral, p.init_lateral);
  s.physical(kPsi) = uniform(s.rng, -p.init_heading, p.init_heading);
  const double side = uniform(s.rng, 0.0, 1.0) < 0.5 ? -1.0 : 1.0;
  const double t_cross = uniform(s.rng, p.crossing_time_min, p.crossing_time_max);
  const double speed = uniform(s.rng, p.obstacle_speed_min, p.obstacle_speed_max);
  const double jitter = uniform(s.rng, -p.crossing_jitter, p.crossing_jitter);
  // Crossing point is where a robot ramping up to target speed would be.
  const double ramp = p.target_speed / p.max_accel;
  const double x_cross = p.target_speed * std::max(t_cross - 0.5 * ramp, 0.0) + jitter;
  s.physical(kOx) = x_cross;
  s.physical(kOy) = side * speed * t_cross;
  s.physical(kOvx) = 0.0;
  s.physical(kOvy) = -side * speed;
  return s;
}

Eigen::VectorXd PointRobotEnv::observe(const EnvState& state) const {
  const auto& x = state.physical;
  const double psi_obs = std::atan2(x(kOvy), x(kOvx));
  Eigen::VectorXd obs(7);
  obs << x(kY), normalize_angle(x(kPsi)), x(kV), x(kOmega), x(kOx) - x(kX), x(kOy) - x(kY),
      normalize_angle(psi_obs - x(kPsi));
  return obs;
}

bool PointRobotEnv::collides(double rx, double ry, double ox, double oy, double radius_sum) {
  const double dx = rx - ox;
  const double dy = ry - oy;
  return std::sqrt(dx * dx + dy * dy) < radius_sum;
}

bool PointRobotEnv::in_collision(const EnvState& state) const {
  const auto& x = state.physical;
  return collides(x(kX), x(kY), x(kOx), x(kOy), params_.robot_radius + params_.obstacle_radius);
}

double PointRobotEnv::lateral_error(const EnvState& state) const { return std::abs(state.physical(kY)); }

StepResult PointRobotEnv::step(EnvState& state, const Eigen::VectorXd& action) const {
  const Eigen::VectorXd a = clamp_action(action, 2);
  const auto& p = params_;
  auto& x = state.physical;
  const double dt = p.dt;
  const double v = x(kV);
  const double psi = x(kPsi);
  x(kX) += dt * v * std::cos(psi);
  x(kY) += dt * v * std::sin(psi);
  x(kPsi) += dt * x(kOmega);
  x(kV) = std::clamp(v + dt * p.max_accel * a(0), p.min_speed, p.max_speed);
  x(kOmega) = std::clamp(x(kOmega) + dt * p.max_angular_accel * a(1), -p.max_turn_rate, p.max_turn_rate);
  x(kOx) += dt * x(kOvx);
  x(kOy) += dt * x(kOvy);
  state.step_count += 1;

  const bool hit = in_collision(state);
  const double y = x(kY);
  const double dv = x(kV) - p.target_speed;
  StepResult r;
  r.obs = observe(state);
  r.reward = -(p.c_p * y * y + p.c_v * dv * dv + p.c_a * a.squaredNorm()) - (hit ? p.c_col : 0.0);
  r.done = hit;
  r.truncated = !hit && state.step_count >= p.max_episode_steps;
  return r;
}

Eigen::VectorXd PointRobotEnv::reference_action(const EnvState& state) const {
  const auto& p = params_;
  const auto& x = state.physical;

  // Speed schedule: roll each candidate speed forward under the acceleration
  // limit (robot along x, obstacle at constant velocity) and keep the first
  // one whose predicted clearance stays above the collision distance.
  const double safe = p.robot_radius + p.obstacle_radius + 0.08;
  auto clearance = [&](double v_cmd) {
    double rx = x(kX), v = x(kV), ox = x(kOx), oy = x(kOy);
    double worst = std::hypot(rx - ox, x(kY) - oy);
    for (int k = 0; k < 300; ++k) {
      v += std::clamp(4.0 * (v_cmd - v) / p.max_accel, -1.0, 1.0) * p.max_accel * p.dt;
      v = std::clamp(v, p.min_speed, p.max_speed);
      rx += v * p.dt;
      ox += x(kOvx) * p.dt;
      oy += x(kOvy) * p.dt;
      worst = std::min(worst, std::hypot(rx - ox, x(kY) - oy));
    }
    return worst;
  };
  double v_des = p.target_speed;
  double best = -1.0;
  for (double candidate : {p.target_speed, 0.5, 0.6, 0.15, 0.05, 0.0, p.min_speed}) {
    const double c = clearance(candidate);
    if (c > safe) {
      v_des = candidate;
      break;
    }
    if (c > best) best = c, v_des = candidate;
  }

  // Pure pursuit towards a look-ahead point on the path.
  const double lookahead = 0.5;
  const double alpha = normalize_angle(std::atan2(-x(kY), lookahead) - x(kPsi));
  const double curvature = 2.0 * std::sin(alpha) / lookahead;
  const double omega_des = std::max(x(kV), 0.1) * curvature;

  Eigen::VectorXd a(2);
  a(0) = std::clamp(4.0 * (v_des - x(kV)) / p.max_accel, -1.0, 1.0);
  a(1) = std::clamp(6.0 * (omega_des - x(kOmega)) / p.max_angular_accel, -1.0, 1.0);
  return a;
}

json PointRobotEnv::fixture() const {
  const auto& p = params_;
  return {{"name", spec_.name},
          {"dt", p.dt},
          {"max_episode_steps", p.max_episode_steps},
          {"target_speed", p.target_speed},
          {"max_accel", p.max_accel},
          {"max_angular_accel", p.max_angular_accel},
          {"speed_range", {p.min_speed, p.max_speed}},
          {"max_turn_rate", p.max_turn_rate},
          {"robot_radius", p.robot_radius},
          {"obstacle_radius", p.obstacle_radius},
          {"c_p", p.c_p},
          {"c_v", p.c_v},
          {"c_a", p.c_a},
          {"c_col", p.c_col},
          {"init_lateral", p.init_lateral},
          {"init_heading", p.init_heading},
          {"crossing_time", {p.crossing_time_min, p.crossing_time_max}},
          {"obstacle_speed", {p.obstacle_speed_min, p.obstacle_speed_max}},
          {"crossing_jitter", p.crossing_jitter},
          {"integrator", "explicit Euler"}};
}

// ---------------------------------------------------------------------------
// noisy-bandit-chain

BanditChainEnv::BanditChainEnv(BanditChainParams params) : params_(params) {
  if (params_.max_episode_steps < 1) throw ConfigError("bandit-chain: max_episode_steps must be >= 1");
  if (!(params_.nu >= 0.0)) throw ConfigError("bandit-chain: nu must be non-negative");
  for (double a : params_.optimal_actions)
    if (!(a > -1.0 && a < 1.0)) throw ConfigError("bandit-chain: optimal actions must lie in (-1, 1)");
  spec_ = {"noisy-bandit-chain", 3, 1, params_.max_episode_steps, {1.0}};
}

EnvState BanditChainEnv::make_state(int index) const {
  if (index < 0 || index > 2) throw ConfigError("bandit-chain: state index must be 0, 1 or 2");
  EnvState s;
  s.physical = Eigen::VectorXd::Constant(1, static_cast<double>(index));
  return s;
}

EnvState BanditChainEnv::reset(std::uint64_t seed) const {
  EnvState s;
  s.rng = derive_rng(seed, "bandit-chain-reset");
  std::uniform_int_distribution<int> pick(0, 2);
  s.physical = Eigen::VectorXd::Constant(1, static_cast<double>(pick(s.rng)));
  return s;
}

Eigen::VectorXd BanditChainEnv::observe(const EnvState& state) const {
  Eigen::VectorXd obs = Eigen::VectorXd::Zero(3);
  obs(state_index(state)) = 1.0;
  return obs;
}

StepResult BanditChainEnv::step(EnvState& state, const Eigen::VectorXd& action) const {
  const Eigen::VectorXd a = clamp_action(action, 1);
  const int s = state_index(state);
  const double diff = a(0) - params_.optimal_actions[static_cast<std::size_t>(s)];
  const double noise = params_.nu > 0.0 ? params_.nu * standard_normal(state.rng) : 0.0;
  state.physical(0) = static_cast<double>((s + 1) % 3);
  state.step_count += 1;
  StepResult r;
  r.obs = observe(state);
  r.reward = -diff * diff + noise;
  r.done = false;
  r.truncated = state.step_count >= params_.max_episode_steps;
  return r;
}

json BanditChainEnv::fixture() const {
  return {{"name", spec_.name},
          {"optimal_actions", params_.optimal_actions},
          {"nu", params_.nu},
          {"max_episode_steps", params_.max_episode_steps},
          {"transitions", "0 -> 1 -> 2 -> 0"}};
}

// ---------------------------------------------------------------------------

std::unique_ptr<Environment> make_environment(const std::string& name, const json& overrides) {
  if (name == "pendulum-swingup") {
    reject_unknown(overrides, {"max_episode_steps", "init_theta", "init_theta_dot"}, name);
    PendulumParams p;
    read(overrides, "max_episode_steps", p.max_episode_steps);
    if (overrides.contains("init_theta") != overrides.contains("init_theta_dot"))
      throw ConfigError("pendulum: init_theta and init_theta_dot must be given together");
    if (overrides.contains("init_theta")) {
      p.fixed_init = true;
      read(overrides, "init_theta", p.init_theta);
      read(overrides, "init_theta_dot", p.init_theta_dot);
    }
    return std::make_unique<PendulumEnv>(p);
  }
  if (name == "point-robot-track") {
    reject_unknown(overrides, {"max_episode_steps", "c_p", "c_v", "c_a", "c_col", "target_speed"}, name);
    PointRobotParams p;
    read(overrides, "max_episode_steps", p.max_episode_steps);
    read(overrides, "c_p", p.c_p);
    read(overrides, "c_v", p.c_v);
    read(overrides, "c_a", p.c_a);
    read(overrides, "c_col", p.c_col);
    read(overrides, "target_speed", p.target_speed);
    return std::make_unique<PointRobotEnv>(p);
  }
  if (name == "noisy-bandit-chain") {
    reject_unknown(overrides, {"max_episode_steps", "nu", "optimal_actions"}, name);
    BanditChainParams p;
    read(overrides, "max_episode_steps", p.max_episode_steps);
    read(overrides, "nu", p.nu);
    read(overrides, "optimal_actions", p.optimal_actions);
    return std::make_unique<BanditChainEnv>(p);
  }
  throw ConfigError("unknown environment '" + name + "'");
}

}  // namespace dsac
