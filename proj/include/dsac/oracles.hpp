#pragma once

// Ground truth used by tests and acceptance runs: central finite differences,
// Monte-Carlo soft returns, and a quadrature solution of the bandit chain.

#include <array>
#include <cstddef>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "dsac/environments.hpp"
#include "dsac/numerics.hpp"
#include "dsac/rng.hpp"

namespace dsac {

/// (f(p + h e_k) - f(p - h e_k)) / (2h) for every parameter k.
GradSet finite_diff_grad(const std::function<double(const ParamSet&)>& fn, const ParamSet& params, double h);

/// max_k |a_k - b_k| / max(|a_k|, |b_k|, floor).
double max_relative_error(const GradSet& a, const GradSet& b, double floor = 1e-6);

/// Batched stochastic policy: observations (obs_dim x n) -> actions
/// (act_dim x n) and log-densities.
struct PolicyDraw {
  Eigen::MatrixXd actions;
  Eigen::VectorXd logp;
};
using BatchPolicy = std::function<PolicyDraw(const Eigen::MatrixXd& obs, Rng& rng)>;

/// Stochastic policy of an actor network.
BatchPolicy network_policy(const ParamSet& actor);

/// Smallest T >= 1 with gamma^T < 1e-3.
int truth_horizon(double gamma);

struct McEstimate {
  double mean = 0.0;
  double sem = 0.0;  // standard error of the mean
  int n_rollouts = 0;
  int horizon = 0;
};

/// Mean over rollouts of sum_t gamma^t (r_t - alpha log pi(a_t|s_t)), with a_0
/// forced to `action` and no entropy term at t = 0. Rollouts ignore the step
/// limit and stop only at true terminals. Rewards are multiplied by
/// reward_scale.
McEstimate mc_true_q(const Environment& env, const EnvState& start, const Eigen::VectorXd& action,
                     const BatchPolicy& policy, int n_rollouts, double gamma, double alpha, Rng& rng,
                     double reward_scale = 1.0);

struct BiasSample {
  double estimate = 0.0;
  double truth = 0.0;
  double truth_sem = 0.0;
};

struct BiasReport {
  double mean_bias = 0.0;  // estimate - truth; negative = underestimation
  double sem = 0.0;        // across samples
  std::vector<BiasSample> samples;
  int n_rollouts = 0;
  int horizon = 0;
};

nlohmann::json to_json(const BiasReport& report);
BiasReport make_bias_report(std::vector<BiasSample> samples, int n_rollouts, int horizon);

/// Soft-optimal solution of the bandit chain on a uniform action grid over [-1, 1].
struct SoftQTable {
  std::vector<double> grid;                 // action grid
  std::array<std::vector<double>, 3> q;     // Q*(s, grid)
  std::array<std::vector<double>, 3> ret_std;  // std of the soft return per (s, a)
  std::array<double, 3> value{};            // V*(s)
  double alpha = 0.0;
  double gamma = 0.0;

  /// Linear interpolation on the grid.
  double q_at(int s, double a) const;
  double std_at(int s, double a) const;
  /// log pi*(a|s) = (Q*(s,a) - V*(s)) / alpha.
  double log_policy(int s, double a) const;
};

/// Backward induction with trapezoid quadrature. Requires grid_step <= 1e-3;
/// refuses (ConfigError) when halving the step changes Q* or the std by more
/// than 1e-6.
SoftQTable numeric_soft_q(const BanditChainParams& chain, double alpha, double gamma, double grid_step = 1e-3);

/// Samples the soft-optimal policy of the table by inverse CDF.
BatchPolicy soft_q_policy(const SoftQTable& table);

}  // namespace dsac
