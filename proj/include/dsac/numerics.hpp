#pragma once

// Feed-forward networks with analytic backprop and Adam.
//
// Batches are column-major: a matrix with one sample per column. All
// arithmetic is double precision.

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "dsac/rng.hpp"

namespace dsac {

enum class Activation { gelu, identity };

/// x * Phi(x), exact erf form.
double gelu(double x);
double gelu_derivative(double x);

struct Layer {
  Eigen::MatrixXd weight;  // out x in
  Eigen::VectorXd bias;    // out
  Activation activation = Activation::identity;
};

struct ParamSet {
  std::vector<Layer> layers;

  Eigen::Index in_dim() const;
  Eigen::Index out_dim() const;
  /// Total number of scalar parameters.
  std::size_t size() const;
  /// Flat access in layer order, weights row-major then bias.
  double& at(std::size_t index);
  double at(std::size_t index) const;
  /// Throws ConfigError if dimensions do not chain or any entry is non-finite.
  void validate() const;
  bool same_shape(const ParamSet& other) const;
};

struct GradSet {
  std::vector<Eigen::MatrixXd> weight;
  std::vector<Eigen::VectorXd> bias;

  static GradSet zeros_like(const ParamSet& params);

  std::size_t size() const;
  double at(std::size_t index) const;
  std::vector<double> flatten() const;
  bool all_finite() const;
  bool matches(const ParamSet& params) const;

  GradSet& operator+=(const GradSet& other);
  GradSet& operator*=(double scale);
};

/// Hidden layers use GELU, the output layer is identity. Weights and biases are
/// uniform in +-sqrt(1/fan_in).
ParamSet make_mlp(int in_dim, std::span<const int> hidden, int out_dim, Rng& rng);

struct MlpCache {
  std::vector<Eigen::MatrixXd> inputs;  // input to each layer
  std::vector<Eigen::MatrixXd> pre;     // pre-activation of each layer
};

struct ForwardPass {
  Eigen::MatrixXd output;
  MlpCache cache;
};

struct BackwardPass {
  GradSet grads;               // summed over the batch columns
  Eigen::MatrixXd input_grad;  // d(sum output . output_grad) / d input
};

ForwardPass mlp_forward(const ParamSet& params, const Eigen::MatrixXd& input);
Eigen::VectorXd mlp_forward(const ParamSet& params, const Eigen::VectorXd& input, MlpCache* cache);
/// Forward without keeping a trace.
Eigen::MatrixXd mlp_predict(const ParamSet& params, const Eigen::MatrixXd& input);

/// Reverse-mode derivatives of sum_j output(:, j) . output_grad(:, j).
BackwardPass mlp_backward(const ParamSet& params, const MlpCache& cache,
                          const Eigen::MatrixXd& output_grad);

struct AdamState {
  GradSet first_moment;
  GradSet second_moment;
  long step = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double delta = 1e-8;

  static AdamState for_params(const ParamSet& params);
};

/// Bias-corrected Adam descent step. Throws NumericalError (leaving both
/// arguments untouched) if any gradient entry is non-finite.
void adam_step(AdamState& state, ParamSet& params, const GradSet& grads, double lr);

/// Elementwise target = tau * source + (1 - tau) * target.
void soft_update(const ParamSet& source, ParamSet& target, double tau);

// Checkpoint documents. Numbers round-trip bit-exactly.
inline constexpr int kCheckpointFormatVersion = 1;

nlohmann::json params_to_json(const ParamSet& params);
ParamSet params_from_json(const nlohmann::json& doc);
nlohmann::json adam_to_json(const AdamState& state);
AdamState adam_from_json(const nlohmann::json& doc, const ParamSet& params);

}  // namespace dsac
