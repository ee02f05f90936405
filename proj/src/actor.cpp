#include "dsac/actor.hpp"

#include <algorithm>
#include <cmath>

#include "dsac/critic.hpp"
#include "dsac/distributions.hpp"
#include "dsac/errors.hpp"

namespace dsac {

namespace {

void check_critics(std::span<const ParamSet> critics, bool twin) {
  if (critics.empty() || (twin && critics.size() < 2))
    throw ContractViolation("actor_gradient: not enough critic networks supplied");
}

}  // namespace

ActorGradient actor_gradient(const ParamSet& actor, const Eigen::MatrixXd& states,
                             std::span<const ParamSet> critics, bool twin, double alpha,
                             const Eigen::MatrixXd& zeta) {
  check_critics(critics, twin);
  const Eigen::Index n = states.cols();
  if (n == 0) throw ContractViolation("actor_gradient: empty batch");

  ForwardPass actor_pass = mlp_forward(actor, states);
  const Eigen::Index d = actor_pass.output.rows() / 2;
  const PolicyBatch pb = policy_sample_batch(actor_pass.output, zeta);
  const Eigen::MatrixXd x = stack_inputs(states, pb.a);

  const int active = twin ? 2 : 1;
  std::array<ForwardPass, 2> critic_pass;
  for (int i = 0; i < active; ++i) critic_pass[i] = mlp_forward(critics[i], x);

  ActorGradient out;
  out.logp = pb.logp;
  out.chosen.resize(n);
  const double inv_n = 1.0 / static_cast<double>(n);
  std::array<Eigen::MatrixXd, 2> q_grad;
  for (int i = 0; i < active; ++i) q_grad[i] = Eigen::MatrixXd::Zero(2, n);
  double q_sum = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    int idx = 1;
    if (twin) idx = select_min_target(critic_pass[0].output(0, j), critic_pass[1].output(0, j));
    out.chosen(j) = idx;
    q_grad[idx - 1](0, j) = inv_n;
    q_sum += critic_pass[idx - 1].output(0, j);
  }
  out.q_mean = q_sum * inv_n;
  out.objective = out.q_mean - alpha * pb.logp.mean();

  // dJ/da through whichever critic was selected per sample.
  Eigen::MatrixXd dq_da = Eigen::MatrixXd::Zero(d, n);
  for (int i = 0; i < active; ++i) {
    const BackwardPass bp = mlp_backward(critics[i], critic_pass[i].cache, q_grad[i]);
    dq_da += bp.input_grad.bottomRows(d);
  }

  Eigen::MatrixXd actor_out_grad(2 * d, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index k = 0; k < d; ++k) {
      const double t = pb.a(k, j);
      const double one_minus_t2 = 1.0 - t * t;
      const double std_k = std::exp(pb.log_std(k, j));
      // d log pi / d u through the squash correction only.
      const double dlogp_du = 2.0 * t * one_minus_t2 / (one_minus_t2 + kTanhEps);
      const double dj_du = dq_da(k, j) * one_minus_t2 - alpha * inv_n * dlogp_du;
      actor_out_grad(k, j) = dj_du;
      const double raw_ls = actor_pass.output(d + k, j);
      const bool inside = raw_ls >= kLogStdMin && raw_ls <= kLogStdMax;
      actor_out_grad(d + k, j) = inside ? dj_du * std_k * zeta(k, j) + alpha * inv_n : 0.0;
    }
  }
  out.ascent = mlp_backward(actor, actor_pass.cache, actor_out_grad).grads;
  if (!out.ascent.all_finite()) throw NumericalError("actor_gradient: non-finite gradient");
  return out;
}

ActorGradient actor_gradient(const ParamSet& actor, const Eigen::MatrixXd& states,
                             std::span<const ParamSet> critics, bool twin, double alpha, Rng& rng) {
  const Eigen::MatrixXd zeta = standard_normal_matrix(actor.out_dim() / 2, states.cols(), rng);
  return actor_gradient(actor, states, critics, twin, alpha, zeta);
}

double actor_objective(const ParamSet& actor, const Eigen::MatrixXd& states, std::span<const ParamSet> critics,
                       bool twin, double alpha, const Eigen::MatrixXd& zeta) {
  check_critics(critics, twin);
  const PolicyBatch pb = policy_sample_batch(mlp_predict(actor, states), zeta);
  const Eigen::MatrixXd x = stack_inputs(states, pb.a);
  Eigen::VectorXd q = mlp_predict(critics[0], x).row(0).transpose();
  if (twin) q = q.cwiseMin(mlp_predict(critics[1], x).row(0).transpose());
  return (q - alpha * pb.logp).mean();
}

Temperature temperature_update(const Temperature& temp, std::span<const double> logp_batch) {
  if (logp_batch.empty()) throw ContractViolation("temperature_update: empty batch");
  double mean = 0.0;
  for (double lp : logp_batch) mean += -lp - temp.target_entropy;
  mean /= static_cast<double>(logp_batch.size());
  Temperature next = temp;
  next.alpha = std::max(kAlphaMin, temp.alpha - temp.lr_alpha * mean);
  return next;
}

}  // namespace dsac
