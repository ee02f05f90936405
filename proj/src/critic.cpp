#include "dsac/critic.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "dsac/distributions.hpp"
#include "dsac/errors.hpp"

namespace dsac {

CriticPairState make_critic_pair(int obs_dim, int act_dim, std::span<const int> hidden, Rng& rng) {
  CriticPairState s;
  for (int i = 0; i < 2; ++i) {
    s.theta[i] = make_mlp(obs_dim + act_dim, hidden, 2, rng);
    s.theta_bar[i] = s.theta[i];
    s.adam[i] = AdamState::for_params(s.theta[i]);
  }
  return s;
}

int select_min_target(double q1_next, double q2_next) { return q1_next <= q2_next ? 1 : 2; }

TargetPair compute_targets(double r, bool done, double q_next, double z_draw, double logp_next, double alpha,
                           double gamma) {
  const double mask = done ? 0.0 : 1.0;
  TargetPair t;
  t.y_q = r + mask * gamma * (q_next - alpha * logp_next);
  t.y_z = r + mask * gamma * (z_draw - alpha * logp_next);
  return t;
}

double clip_target(double y_z, double q_current, double b) {
  return std::clamp(y_z, q_current - b, q_current + b);
}

GradCoeffs grad_coeffs_dsact(double y_q, double y_z_clipped, double q, double sigma, double eps) {
  const double s2 = sigma * sigma;
  const double dev = y_z_clipped - q;
  return {-(y_q - q) / (s2 + eps), -(dev * dev - s2) / (s2 * sigma + eps)};
}

BoundaryScale update_boundary_scale(double b, double omega, std::span<const double> sigma_batch, double tau,
                                    double xi) {
  if (sigma_batch.empty()) throw ContractViolation("update_boundary_scale: empty sigma batch");
  double mean = 0.0;
  double mean_sq = 0.0;
  for (double s : sigma_batch) {
    mean += s;
    mean_sq += s * s;
  }
  mean /= static_cast<double>(sigma_batch.size());
  mean_sq /= static_cast<double>(sigma_batch.size());
  return {tau * xi * mean + (1.0 - tau) * b, tau * mean_sq + (1.0 - tau) * omega};
}

Eigen::MatrixXd stack_inputs(const Eigen::MatrixXd& states, const Eigen::MatrixXd& actions) {
  if (states.cols() != actions.cols()) throw ContractViolation("stack_inputs: column counts differ");
  Eigen::MatrixXd x(states.rows() + actions.rows(), states.cols());
  x.topRows(states.rows()) = states;
  x.bottomRows(actions.rows()) = actions;
  return x;
}

CriticEval evaluate_critic(const ParamSet& theta, const Eigen::MatrixXd& states, const Eigen::MatrixXd& actions) {
  const Eigen::MatrixXd out = mlp_predict(theta, stack_inputs(states, actions));
  CriticEval e;
  e.q = out.row(0).transpose();
  e.sigma.resize(out.cols());
  for (Eigen::Index j = 0; j < out.cols(); ++j) e.sigma(j) = value_head(out(0, j), out(1, j)).sigma;
  return e;
}

TargetBatch compute_target_batch(const CriticPairState& critics, const Batch& batch, const ParamSet& policy_target,
                                 double alpha, double gamma, bool twin, Rng& rng) {
  const Eigen::Index n = batch.size();
  const Eigen::MatrixXd raw = mlp_predict(policy_target, batch.next_states);
  const Eigen::MatrixXd zeta = standard_normal_matrix(raw.rows() / 2, n, rng);
  const PolicyBatch next = policy_sample_batch(raw, zeta);
  const Eigen::VectorXd z_noise = standard_normal_matrix(n, 1, rng).col(0);

  const CriticEval first = evaluate_critic(critics.theta_bar[0], batch.next_states, next.a);
  CriticEval second;
  if (twin) second = evaluate_critic(critics.theta_bar[1], batch.next_states, next.a);

  TargetBatch out;
  out.y_q.resize(n);
  out.y_z.resize(n);
  out.chosen_index.resize(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const int idx = twin ? select_min_target(first.q(j), second.q(j)) : 1;
    const CriticEval& chosen = idx == 1 ? first : second;
    const double z = sample_value({chosen.q(j), chosen.sigma(j)}, z_noise(j));
    const TargetPair t =
        compute_targets(batch.rewards(j), batch.done(j) != 0.0, chosen.q(j), z, next.logp(j), alpha, gamma);
    out.y_q(j) = t.y_q;
    out.y_z(j) = t.y_z;
    out.chosen_index(j) = idx;
  }
  return out;
}

CriticGradient critic_gradient(const ParamSet& theta, const Batch& batch, const TargetBatch& targets, double b,
                               double omega, const CriticSettings& settings, const CriticRule& rule) {
  const Eigen::Index n = batch.size();
  ForwardPass pass = mlp_forward(theta, stack_inputs(batch.states, batch.actions));

  CriticGradient out;
  out.q = pass.output.row(0).transpose();
  out.sigma.resize(n);
  Eigen::MatrixXd output_grad = Eigen::MatrixXd::Zero(2, n);

  const double boundary = rule.variance_adjustment ? b : rule.fixed_boundary_b;
  const double eps = rule.variance_adjustment ? settings.eps : 0.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    const double raw_spread = pass.output(1, j);
    const ValueDistParams head = value_head(pass.output(0, j), raw_spread);
    out.sigma(j) = head.sigma;
    if (!rule.distributional) {
      output_grad(0, j) = -(targets.y_q(j) - head.q);
      continue;
    }
    const double mean_target = rule.expected_value_substitution ? targets.y_q(j) : targets.y_z(j);
    const double clipped = clip_target(targets.y_z(j), head.q, boundary);
    const GradCoeffs g = grad_coeffs_dsact(mean_target, clipped, head.q, head.sigma, eps);
    output_grad(0, j) = g.g_q;
    output_grad(1, j) = g.g_sigma * sigmoid(raw_spread);
  }

  double scale = 1.0 / static_cast<double>(n);
  if (rule.distributional && rule.variance_adjustment) scale *= omega + settings.eps_omega;
  output_grad *= scale;
  out.grads = mlp_backward(theta, pass.cache, output_grad).grads;
  return out;
}

namespace {

std::string diagnostics(const Batch& batch, const CriticGradient& g, int index) {
  std::ostringstream os;
  os << "critic " << index << ": non-finite gradient; batch size " << batch.size() << ", reward range ["
     << batch.rewards.minCoeff() << ", " << batch.rewards.maxCoeff() << "], sigma range [" << g.sigma.minCoeff()
     << ", " << g.sigma.maxCoeff() << "], q range [" << g.q.minCoeff() << ", " << g.q.maxCoeff() << "]";
  return os.str();
}

}  // namespace

CriticUpdateStats critic_update(CriticPairState& state, const Batch& batch, const ParamSet& policy_target,
                                double alpha, const CriticSettings& settings, Rng& rng, const CriticRule& rule) {
  if (batch.size() == 0) throw ContractViolation("critic_update: empty batch");
  const TargetBatch targets = compute_target_batch(state, batch, policy_target, alpha, settings.gamma, rule.twin, rng);

  CriticUpdateStats stats;
  const int active = rule.twin ? 2 : 1;
  for (int i = 0; i < active; ++i) {
    const bool adaptive = rule.distributional && rule.variance_adjustment;
    if (adaptive && !state.stats_initialized[i]) {
      // Cold start: pure batch statistics.
      const CriticEval e = evaluate_critic(state.theta[i], batch.states, batch.actions);
      const BoundaryScale bs =
          update_boundary_scale(state.b[i], state.omega[i], {e.sigma.data(), static_cast<std::size_t>(e.sigma.size())},
                                1.0, settings.xi);
      state.b[i] = bs.b;
      state.omega[i] = bs.omega;
      state.stats_initialized[i] = true;
    }

    CriticGradient g = critic_gradient(state.theta[i], batch, targets, state.b[i], state.omega[i], settings, rule);
    try {
      adam_step(state.adam[i], state.theta[i], g.grads, settings.lr);
    } catch (const NumericalError&) {
      throw NumericalError(diagnostics(batch, g, i + 1));
    }
    if (adaptive) {
      const BoundaryScale bs =
          update_boundary_scale(state.b[i], state.omega[i], {g.sigma.data(), static_cast<std::size_t>(g.sigma.size())},
                                settings.tau, settings.xi);
      state.b[i] = bs.b;
      state.omega[i] = bs.omega;
    }
    if (i == 0) {
      stats.q_mean = g.q.mean();
      stats.sigma_mean = g.sigma.mean();
      stats.sigma_min = g.sigma.minCoeff();
      stats.sigma_max = g.sigma.maxCoeff();
      stats.y_q_mean = targets.y_q.mean();
      stats.abs_td_mean = (targets.y_q - g.q).cwiseAbs().mean();
    }
  }
  return stats;
}

}  // namespace dsac
