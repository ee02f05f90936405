#pragma once

// Gaussian value-distribution head and tanh-squashed diagonal Gaussian policy.

#include <Eigen/Dense>

namespace dsac {

inline constexpr double kSigmaMin = 1e-4;
inline constexpr double kLogStdMin = -20.0;
inline constexpr double kLogStdMax = 2.0;
inline constexpr double kTanhEps = 1e-6;

/// Throws std::domain_error if std <= 0.
double gaussian_logpdf(double y, double mean, double std);

double softplus(double x);
/// d softplus / dx
double sigmoid(double x);

/// Mean and standard deviation of the soft-return distribution at one (s, a).
struct ValueDistParams {
  double q = 0.0;
  double sigma = 1.0;
};

/// Q passes through; sigma = softplus(raw_spread) + kSigmaMin.
ValueDistParams value_head(double raw_mean, double raw_spread);

/// Q + sigma * noise.
double sample_value(const ValueDistParams& dist, double noise);

struct PolicyDistParams {
  Eigen::VectorXd mu;       // pre-squash mean
  Eigen::VectorXd log_std;  // pre-squash log std, clamped
};

/// Splits a raw actor output [mu; log_std] and clamps log_std.
PolicyDistParams policy_head(const Eigen::VectorXd& raw);

struct PolicySample {
  Eigen::VectorXd u;  // pre-squash
  Eigen::VectorXd a;  // tanh(u)
};

PolicySample policy_sample(const PolicyDistParams& dist, const Eigen::VectorXd& noise);

/// log density of a = tanh(u) under the squashed policy.
double policy_logprob(const PolicyDistParams& dist, const Eigen::VectorXd& u);

/// Column-wise policy_head + policy_sample + policy_logprob over a batch of raw
/// actor outputs (2*act_dim x n) and noise (act_dim x n).
struct PolicyBatch {
  Eigen::MatrixXd mu;
  Eigen::MatrixXd log_std;
  Eigen::MatrixXd u;
  Eigen::MatrixXd a;
  Eigen::VectorXd logp;
};
PolicyBatch policy_sample_batch(const Eigen::MatrixXd& raw, const Eigen::MatrixXd& noise);

}  // namespace dsac
