#pragma once

// Critic side of the distributional actor-critic: bootstrap targets, target
// clipping, the variance-adjusted gradient kernel, adaptive clipping boundary
// and gradient scale, and the twin critic update.

#include <array>
#include <span>

#include <Eigen/Dense>

#include "dsac/numerics.hpp"
#include "dsac/replay.hpp"
#include "dsac/rng.hpp"

namespace dsac {

/// Critic networks map [s; a] to [raw_mean; raw_spread].
struct CriticPairState {
  std::array<ParamSet, 2> theta;
  std::array<ParamSet, 2> theta_bar;
  std::array<double, 2> b{0.0, 0.0};      // clipping boundary, reward units
  std::array<double, 2> omega{0.0, 0.0};  // gradient scale, squared reward units
  std::array<AdamState, 2> adam;
  std::array<bool, 2> stats_initialized{false, false};
};

CriticPairState make_critic_pair(int obs_dim, int act_dim, std::span<const int> hidden, Rng& rng);

struct TargetPair {
  double y_q = 0.0;
  double y_z = 0.0;
  int chosen_index = 1;
};

struct GradCoeffs {
  double g_q = 0.0;      // multiplies grad Q
  double g_sigma = 0.0;  // multiplies grad sigma
};

/// 1 if q1_next <= q2_next, else 2.
int select_min_target(double q1_next, double q2_next);

TargetPair compute_targets(double r, bool done, double q_next, double z_draw, double logp_next, double alpha,
                           double gamma);

double clip_target(double y_z, double q_current, double b);

/// g_q = -(y_q - q) / (sigma^2 + eps)
/// g_sigma = -((y_z_clipped - q)^2 - sigma^2) / (sigma^3 + eps)
GradCoeffs grad_coeffs_dsact(double y_q, double y_z_clipped, double q, double sigma, double eps);

struct BoundaryScale {
  double b = 0.0;
  double omega = 0.0;
};

/// Moving averages b <- tau*xi*mean(sigma) + (1-tau)*b, omega <- tau*mean(sigma^2) + (1-tau)*omega.
BoundaryScale update_boundary_scale(double b, double omega, std::span<const double> sigma_batch, double tau,
                                    double xi);

struct CriticSettings {
  double gamma = 0.99;
  double tau = 0.005;
  double lr = 1e-4;
  double xi = 3.0;
  double eps = 0.1;
  double eps_omega = 0.1;
};

/// Which refinements a critic update applies. The default is the full method.
struct CriticRule {
  bool distributional = true;               // false: scalar TD regression (SAC)
  bool expected_value_substitution = true;  // y_q (true) or y_z (false) in the mean term
  bool twin = true;
  bool variance_adjustment = true;  // adaptive b and omega scaling, eps guards
  double fixed_boundary_b = 20.0;   // used when variance_adjustment is off
};

struct CriticUpdateStats {
  double q_mean = 0.0;
  double sigma_mean = 0.0;
  double sigma_min = 0.0;
  double sigma_max = 0.0;
  double y_q_mean = 0.0;
  double abs_td_mean = 0.0;
};

/// Per-sample quantities of the target side, shared by both critics.
struct TargetBatch {
  Eigen::VectorXd y_q;
  Eigen::VectorXd y_z;
  Eigen::VectorXi chosen_index;
};

/// Draws one a' ~ pi_target(.|s') and one z ~ Z_target(.|s', a') per sample.
TargetBatch compute_target_batch(const CriticPairState& critics, const Batch& batch, const ParamSet& policy_target,
                                 double alpha, double gamma, bool twin, Rng& rng);

/// Per-sample output gradient (rows: raw_mean, raw_spread) for critic `index`
/// and the batch sigma values it saw. Already divided by batch size and
/// multiplied by the gradient scale.
struct CriticGradient {
  GradSet grads;
  Eigen::VectorXd q;
  Eigen::VectorXd sigma;
};

CriticGradient critic_gradient(const ParamSet& theta, const Batch& batch, const TargetBatch& targets, double b,
                               double omega, const CriticSettings& settings, const CriticRule& rule);

/// One update step of the active critics (both when twin, else the first).
/// Throws NumericalError with batch diagnostics on a non-finite gradient.
CriticUpdateStats critic_update(CriticPairState& state, const Batch& batch, const ParamSet& policy_target,
                                double alpha, const CriticSettings& settings, Rng& rng,
                                const CriticRule& rule = CriticRule{});

/// Q and sigma of a critic on stacked [s; a] columns.
struct CriticEval {
  Eigen::VectorXd q;
  Eigen::VectorXd sigma;
};
CriticEval evaluate_critic(const ParamSet& theta, const Eigen::MatrixXd& states, const Eigen::MatrixXd& actions);

Eigen::MatrixXd stack_inputs(const Eigen::MatrixXd& states, const Eigen::MatrixXd& actions);

}  // namespace dsac
