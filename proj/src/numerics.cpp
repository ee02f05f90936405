#include "dsac/numerics.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "dsac/errors.hpp"

namespace dsac {

double gelu(double x) { return 0.5 * x * (1.0 + std::erf(x * std::numbers::sqrt2 / 2.0)); }

double gelu_derivative(double x) {
  const double cdf = 0.5 * (1.0 + std::erf(x * std::numbers::sqrt2 / 2.0));
  const double pdf = std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
  return cdf + x * pdf;
}

namespace {

Eigen::MatrixXd activate(const Eigen::MatrixXd& z, Activation act) {
  if (act == Activation::identity) return z;
  return z.unaryExpr([](double v) { return gelu(v); });
}

Eigen::MatrixXd activate_derivative(const Eigen::MatrixXd& z, Activation act) {
  if (act == Activation::identity) return Eigen::MatrixXd::Ones(z.rows(), z.cols());
  return z.unaryExpr([](double v) { return gelu_derivative(v); });
}

std::size_t layer_size(const Layer& layer) {
  return static_cast<std::size_t>(layer.weight.size() + layer.bias.size());
}

}  // namespace

Eigen::Index ParamSet::in_dim() const { return layers.empty() ? 0 : layers.front().weight.cols(); }

Eigen::Index ParamSet::out_dim() const { return layers.empty() ? 0 : layers.back().weight.rows(); }

std::size_t ParamSet::size() const {
  std::size_t n = 0;
  for (const auto& layer : layers) n += layer_size(layer);
  return n;
}

double& ParamSet::at(std::size_t index) {
  for (auto& layer : layers) {
    const auto w = static_cast<std::size_t>(layer.weight.size());
    if (index < w) {
      const auto cols = static_cast<std::size_t>(layer.weight.cols());
      return layer.weight(static_cast<Eigen::Index>(index / cols), static_cast<Eigen::Index>(index % cols));
    }
    index -= w;
    const auto b = static_cast<std::size_t>(layer.bias.size());
    if (index < b) return layer.bias(static_cast<Eigen::Index>(index));
    index -= b;
  }
  throw ContractViolation("ParamSet::at: index out of range");
}

double ParamSet::at(std::size_t index) const { return const_cast<ParamSet*>(this)->at(index); }

void ParamSet::validate() const {
  if (layers.empty()) throw ConfigError("network has no layers");
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto& layer = layers[l];
    if (layer.bias.size() != layer.weight.rows())
      throw ConfigError("layer " + std::to_string(l) + ": bias length does not match weight rows");
    if (l > 0 && layer.weight.cols() != layers[l - 1].weight.rows())
      throw ConfigError("layer " + std::to_string(l) + ": input dimension does not chain");
    if (!layer.weight.allFinite() || !layer.bias.allFinite())
      throw ConfigError("layer " + std::to_string(l) + ": non-finite parameter");
  }
}

bool ParamSet::same_shape(const ParamSet& other) const {
  if (layers.size() != other.layers.size()) return false;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    if (layers[l].weight.rows() != other.layers[l].weight.rows() ||
        layers[l].weight.cols() != other.layers[l].weight.cols())
      return false;
  }
  return true;
}

GradSet GradSet::zeros_like(const ParamSet& params) {
  GradSet g;
  for (const auto& layer : params.layers) {
    g.weight.push_back(Eigen::MatrixXd::Zero(layer.weight.rows(), layer.weight.cols()));
    g.bias.push_back(Eigen::VectorXd::Zero(layer.bias.size()));
  }
  return g;
}

std::size_t GradSet::size() const {
  std::size_t n = 0;
  for (std::size_t l = 0; l < weight.size(); ++l)
    n += static_cast<std::size_t>(weight[l].size() + bias[l].size());
  return n;
}

double GradSet::at(std::size_t index) const {
  for (std::size_t l = 0; l < weight.size(); ++l) {
    const auto w = static_cast<std::size_t>(weight[l].size());
    if (index < w) {
      const auto cols = static_cast<std::size_t>(weight[l].cols());
      return weight[l](static_cast<Eigen::Index>(index / cols), static_cast<Eigen::Index>(index % cols));
    }
    index -= w;
    const auto b = static_cast<std::size_t>(bias[l].size());
    if (index < b) return bias[l](static_cast<Eigen::Index>(index));
    index -= b;
  }
  throw ContractViolation("GradSet::at: index out of range");
}

std::vector<double> GradSet::flatten() const {
  std::vector<double> out;
  out.reserve(size());
  for (std::size_t l = 0; l < weight.size(); ++l) {
    for (Eigen::Index r = 0; r < weight[l].rows(); ++r)
      for (Eigen::Index c = 0; c < weight[l].cols(); ++c) out.push_back(weight[l](r, c));
    for (Eigen::Index r = 0; r < bias[l].size(); ++r) out.push_back(bias[l](r));
  }
  return out;
}

bool GradSet::all_finite() const {
  for (std::size_t l = 0; l < weight.size(); ++l)
    if (!weight[l].allFinite() || !bias[l].allFinite()) return false;
  return true;
}

bool GradSet::matches(const ParamSet& params) const {
  if (weight.size() != params.layers.size() || bias.size() != params.layers.size()) return false;
  for (std::size_t l = 0; l < weight.size(); ++l) {
    const auto& layer = params.layers[l];
    if (weight[l].rows() != layer.weight.rows() || weight[l].cols() != layer.weight.cols() ||
        bias[l].size() != layer.bias.size())
      return false;
  }
  return true;
}

GradSet& GradSet::operator+=(const GradSet& other) {
  for (std::size_t l = 0; l < weight.size(); ++l) {
    weight[l] += other.weight[l];
    bias[l] += other.bias[l];
  }
  return *this;
}

GradSet& GradSet::operator*=(double scale) {
  for (std::size_t l = 0; l < weight.size(); ++l) {
    weight[l] *= scale;
    bias[l] *= scale;
  }
  return *this;
}

ParamSet make_mlp(int in_dim, std::span<const int> hidden, int out_dim, Rng& rng) {
  if (in_dim < 1 || out_dim < 1) throw ConfigError("make_mlp: dimensions must be positive");
  ParamSet params;
  int fan_in = in_dim;
  auto add_layer = [&](int fan_out, Activation act) {
    if (fan_out < 1) throw ConfigError("make_mlp: hidden width must be positive");
    const double bound = std::sqrt(1.0 / fan_in);
    std::uniform_real_distribution<double> dist(-bound, bound);
    Layer layer;
    layer.weight.resize(fan_out, fan_in);
    layer.bias.resize(fan_out);
    for (Eigen::Index r = 0; r < fan_out; ++r)
      for (Eigen::Index c = 0; c < fan_in; ++c) layer.weight(r, c) = dist(rng);
    for (Eigen::Index r = 0; r < fan_out; ++r) layer.bias(r) = dist(rng);
    layer.activation = act;
    params.layers.push_back(std::move(layer));
    fan_in = fan_out;
  };
  for (int width : hidden) add_layer(width, Activation::gelu);
  add_layer(out_dim, Activation::identity);
  return params;
}

ForwardPass mlp_forward(const ParamSet& params, const Eigen::MatrixXd& input) {
  if (input.rows() != params.in_dim())
    throw ConfigError("mlp_forward: input has " + std::to_string(input.rows()) + " rows, network expects " +
                      std::to_string(params.in_dim()));
  ForwardPass pass;
  pass.cache.inputs.reserve(params.layers.size());
  pass.cache.pre.reserve(params.layers.size());
  Eigen::MatrixXd act = input;
  for (const auto& layer : params.layers) {
    Eigen::MatrixXd z = layer.weight * act;
    z.colwise() += layer.bias;
    pass.cache.inputs.push_back(std::move(act));
    act = activate(z, layer.activation);
    pass.cache.pre.push_back(std::move(z));
  }
  pass.output = std::move(act);
  return pass;
}

Eigen::VectorXd mlp_forward(const ParamSet& params, const Eigen::VectorXd& input, MlpCache* cache) {
  ForwardPass pass = mlp_forward(params, Eigen::MatrixXd(input));
  if (cache) *cache = std::move(pass.cache);
  return pass.output.col(0);
}

Eigen::MatrixXd mlp_predict(const ParamSet& params, const Eigen::MatrixXd& input) {
  if (input.rows() != params.in_dim())
    throw ConfigError("mlp_predict: input has " + std::to_string(input.rows()) + " rows, network expects " +
                      std::to_string(params.in_dim()));
  Eigen::MatrixXd act = input;
  for (const auto& layer : params.layers) {
    Eigen::MatrixXd z = layer.weight * act;
    z.colwise() += layer.bias;
    act = activate(z, layer.activation);
  }
  return act;
}

BackwardPass mlp_backward(const ParamSet& params, const MlpCache& cache, const Eigen::MatrixXd& output_grad) {
  const std::size_t n_layers = params.layers.size();
  if (cache.inputs.size() != n_layers || cache.pre.size() != n_layers)
    throw ContractViolation("mlp_backward: cache does not belong to this network");
  for (std::size_t l = 0; l < n_layers; ++l) {
    const auto& layer = params.layers[l];
    if (cache.inputs[l].rows() != layer.weight.cols() || cache.pre[l].rows() != layer.weight.rows() ||
        cache.pre[l].cols() != cache.inputs[l].cols())
      throw ContractViolation("mlp_backward: stale or mismatched cache at layer " + std::to_string(l));
  }
  if (output_grad.rows() != params.out_dim() || output_grad.cols() != cache.pre.back().cols())
    throw ContractViolation("mlp_backward: output_grad shape does not match forward output");

  BackwardPass result;
  result.grads.weight.resize(n_layers);
  result.grads.bias.resize(n_layers);
  Eigen::MatrixXd upstream = output_grad;
  for (std::size_t i = n_layers; i-- > 0;) {
    const auto& layer = params.layers[i];
    Eigen::MatrixXd dz = layer.activation == Activation::identity
                             ? upstream
                             : Eigen::MatrixXd(upstream.cwiseProduct(activate_derivative(cache.pre[i], layer.activation)));
    result.grads.weight[i] = dz * cache.inputs[i].transpose();
    result.grads.bias[i] = dz.rowwise().sum();
    upstream = layer.weight.transpose() * dz;
  }
  result.input_grad = std::move(upstream);
  return result;
}

AdamState AdamState::for_params(const ParamSet& params) {
  AdamState s;
  s.first_moment = GradSet::zeros_like(params);
  s.second_moment = GradSet::zeros_like(params);
  return s;
}

void adam_step(AdamState& state, ParamSet& params, const GradSet& grads, double lr) {
  if (!(lr > 0.0)) throw ConfigError("adam_step: learning rate must be positive");
  if (!grads.matches(params) || !state.first_moment.matches(params) || !state.second_moment.matches(params))
    throw ContractViolation("adam_step: shape mismatch between params, grads and optimizer state");
  if (!grads.all_finite()) throw NumericalError("adam_step: non-finite gradient entry");

  state.step += 1;
  const double c1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  auto update = [&](auto& p, auto& m, auto& v, const auto& g) {
    m = state.beta1 * m + (1.0 - state.beta1) * g;
    v = state.beta2 * v + (1.0 - state.beta2) * g.cwiseProduct(g);
    p.array() -= lr * (m.array() / c1) / ((v.array() / c2).sqrt() + state.delta);
  };
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    update(params.layers[l].weight, state.first_moment.weight[l], state.second_moment.weight[l], grads.weight[l]);
    update(params.layers[l].bias, state.first_moment.bias[l], state.second_moment.bias[l], grads.bias[l]);
  }
}

void soft_update(const ParamSet& source, ParamSet& target, double tau) {
  if (!source.same_shape(target)) throw ConfigError("soft_update: source and target shapes differ");
  if (!(tau >= 0.0 && tau <= 1.0)) throw ConfigError("soft_update: tau must lie in [0, 1]");
  for (std::size_t l = 0; l < source.layers.size(); ++l) {
    auto& t = target.layers[l];
    const auto& s = source.layers[l];
    t.weight = tau * s.weight + (1.0 - tau) * t.weight;
    t.bias = tau * s.bias + (1.0 - tau) * t.bias;
  }
}

}  // namespace dsac
