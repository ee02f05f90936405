#include "dsac/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "dsac/errors.hpp"

namespace dsac {

double gaussian_logpdf(double y, double mean, double std) {
  if (!(std > 0.0)) throw std::domain_error("gaussian_logpdf: std must be positive");
  const double z = (y - mean) / std;
  return -0.5 * z * z - std::log(std) - 0.5 * std::log(2.0 * std::numbers::pi);
}

double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

ValueDistParams value_head(double raw_mean, double raw_spread) {
  return {raw_mean, softplus(raw_spread) + kSigmaMin};
}

double sample_value(const ValueDistParams& dist, double noise) { return dist.q + dist.sigma * noise; }

PolicyDistParams policy_head(const Eigen::VectorXd& raw) {
  if (raw.size() % 2 != 0) throw ConfigError("policy_head: raw output must have even length");
  const Eigen::Index d = raw.size() / 2;
  PolicyDistParams dist;
  dist.mu = raw.head(d);
  dist.log_std = raw.tail(d).cwiseMax(kLogStdMin).cwiseMin(kLogStdMax);
  return dist;
}

PolicySample policy_sample(const PolicyDistParams& dist, const Eigen::VectorXd& noise) {
  if (noise.size() != dist.mu.size()) throw ContractViolation("policy_sample: noise length differs from mu");
  PolicySample s;
  s.u = dist.mu.array() + dist.log_std.array().exp() * noise.array();
  s.a = s.u.array().tanh();
  return s;
}

double policy_logprob(const PolicyDistParams& dist, const Eigen::VectorXd& u) {
  if (u.size() != dist.mu.size()) throw ContractViolation("policy_logprob: u length differs from mu");
  double total = 0.0;
  for (Eigen::Index d = 0; d < u.size(); ++d) {
    const double t = std::tanh(u(d));
    total += gaussian_logpdf(u(d), dist.mu(d), std::exp(dist.log_std(d))) - std::log(1.0 - t * t + kTanhEps);
  }
  return total;
}

PolicyBatch policy_sample_batch(const Eigen::MatrixXd& raw, const Eigen::MatrixXd& noise) {
  const Eigen::Index d = raw.rows() / 2;
  if (raw.rows() != 2 * d || noise.rows() != d || noise.cols() != raw.cols())
    throw ContractViolation("policy_sample_batch: raw/noise shapes disagree");
  PolicyBatch out;
  out.mu = raw.topRows(d);
  out.log_std = raw.bottomRows(d).cwiseMax(kLogStdMin).cwiseMin(kLogStdMax);
  out.u = out.mu.array() + out.log_std.array().exp() * noise.array();
  out.a = out.u.array().tanh();
  out.logp.resize(raw.cols());
  for (Eigen::Index j = 0; j < raw.cols(); ++j) {
    double total = 0.0;
    for (Eigen::Index k = 0; k < d; ++k) {
      const double t = out.a(k, j);
      total += gaussian_logpdf(out.u(k, j), out.mu(k, j), std::exp(out.log_std(k, j))) -
               std::log(1.0 - t * t + kTanhEps);
    }
    out.logp(j) = total;
  }
  return out;
}

}  // namespace dsac
