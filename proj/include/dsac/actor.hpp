#pragma once

#include <array>
#include <span>

#include <Eigen/Dense>

#include "dsac/numerics.hpp"
#include "dsac/rng.hpp"

namespace dsac {

inline constexpr double kAlphaMin = 1e-6;

struct Temperature {
  double alpha = 0.2;
  double target_entropy = -1.0;  // nats
  double lr_alpha = 3e-4;
};

struct ActorGradient {
  GradSet ascent;            // gradient of the objective (to be maximised)
  double objective = 0.0;    // batch mean of min Q - alpha * log pi
  double q_mean = 0.0;       // batch mean of the selected Q
  Eigen::VectorXd logp;      // per-state log pi of the sampled action
  Eigen::VectorXi chosen;    // critic index (1 or 2) used per state
};

/// Reparameterised gradient of mean_s [min_i Q_i(s, a) - alpha * log pi(a|s)],
/// a = tanh(mu + std * zeta), one zeta column per state (act_dim x n).
/// With twin == false only critics[0] is used.
ActorGradient actor_gradient(const ParamSet& actor, const Eigen::MatrixXd& states,
                             std::span<const ParamSet> critics, bool twin, double alpha,
                             const Eigen::MatrixXd& zeta);

/// Same, drawing zeta from rng.
ActorGradient actor_gradient(const ParamSet& actor, const Eigen::MatrixXd& states,
                             std::span<const ParamSet> critics, bool twin, double alpha, Rng& rng);

/// alpha <- max(kAlphaMin, alpha - lr_alpha * mean(-logp - target_entropy)).
Temperature temperature_update(const Temperature& temp, std::span<const double> logp_batch);

/// Scalar objective with fixed zeta; used by gradient checks.
double actor_objective(const ParamSet& actor, const Eigen::MatrixXd& states, std::span<const ParamSet> critics,
                       bool twin, double alpha, const Eigen::MatrixXd& zeta);

}  // namespace dsac
