#include <doctest.h>

#include <cmath>
#include <numbers>

#include "dsac/environments.hpp"
#include "dsac/errors.hpp"
#include "helpers.hpp"

using namespace dsac;
using std::numbers::pi;

namespace {

Eigen::VectorXd act1(double a) { return Eigen::VectorXd::Constant(1, a); }

}  // namespace

TEST_CASE("pendulum: upright fixed point") {
  const PendulumEnv env;
  EnvState s = env.make_state(0.0, 0.0);
  const StepResult r = env.step(s, act1(0.0));
  CHECK(r.reward == 0.0);
  CHECK(s.physical(0) == 0.0);
  CHECK(s.physical(1) == 0.0);
  CHECK(r.obs(0) == 1.0);
  CHECK(r.obs(1) == 0.0);
}

TEST_CASE("pendulum: hanging reward and dynamics") {
  const PendulumEnv env;
  EnvState s = env.make_state(pi, 0.0);
  const StepResult r = env.step(s, act1(0.0));
  CHECK(r.reward == doctest::Approx(-pi * pi).epsilon(1e-15));
  CHECK(r.reward == doctest::Approx(-9.8696).epsilon(1e-5));
  CHECK(std::abs(s.physical(1)) < 1e-14);  // sin(pi) = 0 up to rounding
}

TEST_CASE("pendulum: torque and reward terms") {
  const PendulumEnv env;
  EnvState s = env.make_state(0.5, -1.0);
  const StepResult r = env.step(s, act1(1.0));
  CHECK(r.reward == doctest::Approx(-(0.25 + 0.1 * 1.0 + 0.001 * 4.0)).epsilon(1e-14));
  // semi-implicit Euler: velocity first, position with the new velocity
  const double acc = 1.5 * 10.0 * std::sin(0.5) + 3.0 * 2.0;
  const double w = -1.0 + 0.05 * acc;
  CHECK(s.physical(1) == doctest::Approx(w).epsilon(1e-14));
  CHECK(s.physical(0) == doctest::Approx(0.5 + 0.05 * w).epsilon(1e-14));
  // out-of-range actions are clamped
  EnvState a = env.make_state(0.5, -1.0), b = env.make_state(0.5, -1.0);
  env.step(a, act1(7.0));
  env.step(b, act1(1.0));
  CHECK(a.physical == b.physical);
}

TEST_CASE("pendulum: speed clamp") {
  const PendulumEnv env;
  EnvState s = env.make_state(pi / 2, 7.9);
  env.step(s, act1(1.0));
  CHECK(s.physical(1) == 8.0);
}

TEST_CASE("pendulum: energy drift under 1% over an episode") {
  const PendulumEnv env;
  for (double theta0 : {2.9, 3.0, 3.1}) {
    EnvState s = env.make_state(theta0, 0.0);
    const double e0 = env.energy(s);
    for (int t = 0; t < 200; ++t) {
      env.step(s, act1(0.0));
      REQUIRE(std::abs(s.physical(1)) < 8.0);
    }
    CHECK(std::abs(env.energy(s) - e0) / std::abs(e0) < 0.01);
  }
}

TEST_CASE("pendulum: reset distribution, determinism and truncation") {
  const PendulumEnv env;
  for (std::uint64_t seed = 0; seed < 500; ++seed) {
    const EnvState s = env.reset(seed);
    CHECK(std::abs(s.physical(0)) <= pi);
    CHECK(std::abs(s.physical(1)) <= 1.0);
    CHECK(s.step_count == 0);
  }
  CHECK(env.observe(env.reset(42)) == env.observe(env.reset(42)));
  CHECK(env.observe(env.reset(42)) != env.observe(env.reset(43)));

  EnvState s = env.reset(1);
  for (int t = 1; t <= 200; ++t) {
    const StepResult r = env.step(s, act1(0.3));
    CHECK_FALSE(r.done);
    CHECK(r.truncated == (t == 200));
  }
}

TEST_CASE("pendulum: forced initial state override") {
  const auto env = make_environment("pendulum-swingup", {{"init_theta", 0.0}, {"init_theta_dot", 0.0}});
  const EnvState s = env->reset(9);
  CHECK(s.physical(0) == 0.0);
  CHECK(s.physical(1) == 0.0);
  CHECK_THROWS_AS(make_environment("pendulum-swingup", {{"init_theta", 0.0}}), ConfigError);
}

TEST_CASE("environment registry") {
  CHECK(make_environment("pendulum-swingup")->spec().obs_dim == 3);
  CHECK(make_environment("point-robot-track")->spec().act_dim == 2);
  CHECK(make_environment("noisy-bandit-chain")->spec().obs_dim == 3);
  CHECK_THROWS_AS(make_environment("cartpole"), ConfigError);
  CHECK_THROWS_AS(make_environment("pendulum-swingup", {{"gravity", 9.8}}), ConfigError);
  for (const char* name : {"pendulum-swingup", "point-robot-track", "noisy-bandit-chain"}) {
    const auto env = make_environment(name);
    CHECK(env->fixture().is_object());
    CHECK(env->spec().max_episode_steps >= 1);
  }
}

TEST_CASE("identical seed and actions give identical trajectories (all envs)") {
  for (const char* name : {"pendulum-swingup", "point-robot-track", "noisy-bandit-chain"}) {
    const auto env = make_environment(name);
    Rng rng(5);
    std::vector<Eigen::VectorXd> actions;
    for (int t = 0; t < 100; ++t) actions.push_back(testgen::uniform_matrix(env->spec().act_dim, 1, rng).col(0));
    EnvState a = env->reset(77), b = env->reset(77);
    for (const auto& act : actions) {
      const StepResult ra = env->step(a, act), rb = env->step(b, act);
      CHECK(ra.obs == rb.obs);
      CHECK(ra.reward == rb.reward);
      if (ra.done) break;
    }
  }
}

TEST_CASE("point robot: collision test is symmetric and exact") {
  Rng rng(6);
  for (int k = 0; k < 1000; ++k) {
    const double rx = uniform(rng, -1, 1), ry = uniform(rng, -1, 1), ox = uniform(rng, -1, 1), oy = uniform(rng, -1, 1);
    CHECK(PointRobotEnv::collides(rx, ry, ox, oy, 0.35) == PointRobotEnv::collides(ox, oy, rx, ry, 0.35));
    CHECK(PointRobotEnv::collides(rx, ry, ox, oy, 0.35) == (std::hypot(rx - ox, ry - oy) < 0.35));
  }
  CHECK(PointRobotEnv::collides(0, 0, 0.3499, 0, 0.35));
  CHECK_FALSE(PointRobotEnv::collides(0, 0, 0.35, 0, 0.35));
}

TEST_CASE("point robot: reward terms and collision termination") {
  const PointRobotEnv env;
  EnvState s = env.reset(3);
  // on the path at the target speed, obstacle parked far away
  s.physical.setZero();
  s.physical(3) = 0.28;
  s.physical(5) = 50.0;
  s.physical(6) = 50.0;
  StepResult r = env.step(s, Eigen::VectorXd::Zero(2));
  CHECK(r.reward == doctest::Approx(0.0).scale(1e-12));
  CHECK_FALSE(r.done);

  EnvState hit = env.reset(3);
  hit.physical(5) = hit.physical(0) + 0.1;
  hit.physical(6) = hit.physical(1);
  hit.physical(7) = hit.physical(8) = 0.0;
  r = env.step(hit, Eigen::VectorXd::Zero(2));
  CHECK(r.done);
  CHECK_FALSE(r.truncated);
  CHECK(r.reward <= -100.0);
}

TEST_CASE("point robot: observation layout") {
  const PointRobotEnv env;
  const EnvState s = env.reset(11);
  const Eigen::VectorXd o = env.observe(s);
  REQUIRE(o.size() == 7);
  CHECK(o(0) == s.physical(1));                  // lateral offset
  CHECK(o(1) == normalize_angle(s.physical(2)));  // heading
  CHECK(o(4) == s.physical(5) - s.physical(0));  // obstacle dx
  CHECK(o(5) == s.physical(6) - s.physical(1));  // obstacle dy
  CHECK(env.lateral_error(s) == std::abs(s.physical(1)));
}

TEST_CASE("point robot: obstacle timing is fixed by the reset seed") {
  const PointRobotEnv env;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const EnvState a = env.reset(seed), b = env.reset(seed);
    CHECK(a.physical == b.physical);
    CHECK(std::abs(a.physical(1)) <= 0.1);
    CHECK(std::abs(a.physical(2)) <= 0.1);
  }
}

TEST_CASE("point robot: pure-pursuit reference controller clears the fixture") {
  const PointRobotEnv env;
  int collisions = 0;
  double lateral_sum = 0.0;
  long steps = 0;
  double speed_tail = 0.0;
  int tail_n = 0;
  for (int ep = 0; ep < 100; ++ep) {
    EnvState s = env.reset(splitmix64(1000 + ep));
    for (;;) {
      const StepResult r = env.step(s, env.reference_action(s));
      lateral_sum += env.lateral_error(s);
      ++steps;
      if (s.step_count > 400) speed_tail += s.physical(3), ++tail_n;
      if (r.done) ++collisions;
      if (r.done || r.truncated) break;
    }
  }
  CHECK(collisions == 0);
  CHECK(lateral_sum / steps <= 0.1);
  CHECK(speed_tail / tail_n == doctest::Approx(0.28).epsilon(0.1));
}

TEST_CASE("bandit chain: cycle, one-hot observation, noiseless optimum") {
  const auto env = make_environment("noisy-bandit-chain", {{"nu", 0.0}});
  const auto& chain = dynamic_cast<const BanditChainEnv&>(*env);
  const std::array<double, 3> best{-0.5, 0.1, 0.6};
  for (int s0 = 0; s0 < 3; ++s0) {
    EnvState s = chain.make_state(s0);
    const Eigen::VectorXd o = chain.observe(s);
    CHECK(o.sum() == 1.0);
    CHECK(o(s0) == 1.0);
    const StepResult r = chain.step(s, act1(best[static_cast<std::size_t>(s0)]));
    CHECK(r.reward == 0.0);
    CHECK(BanditChainEnv::state_index(s) == (s0 + 1) % 3);
    CHECK_FALSE(r.done);
  }
  EnvState s = chain.make_state(1);
  CHECK(chain.step(s, act1(0.1 + 0.5)).reward == doctest::Approx(-0.25));
}

TEST_CASE("bandit chain: reward noise has the configured spread") {
  const BanditChainEnv env(BanditChainParams{{-0.5, 0.1, 0.6}, 0.3, 50});
  EnvState s = env.reset(5);
  double s1 = 0, s2 = 0;
  const int n = 200000;
  for (int k = 0; k < n; ++k) {
    const int idx = BanditChainEnv::state_index(s);
    const double a = env.params().optimal_actions[static_cast<std::size_t>(idx)];
    const double r = env.step(s, act1(a)).reward;
    s1 += r, s2 += r * r;
    s.step_count = 0;
  }
  const double mean = s1 / n, sd = std::sqrt(s2 / n - mean * mean);
  CHECK(std::abs(mean) < 4 * 0.3 / std::sqrt(static_cast<double>(n)));
  CHECK(sd == doctest::Approx(0.3).epsilon(0.01));
}

TEST_CASE("angle normalization") {
  CHECK(normalize_angle(0.0) == 0.0);
  CHECK(std::abs(std::abs(normalize_angle(3 * pi)) - pi) < 1e-12);
  Rng rng(8);
  for (int k = 0; k < 1000; ++k) {
    const double x = uniform(rng, -50, 50);
    const double y = normalize_angle(x);
    CHECK(std::abs(y) <= pi);
    CHECK(std::abs(std::remainder(x - y, 2 * pi)) < 1e-9);
  }
}
