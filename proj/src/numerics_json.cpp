#include <string>

#include "dsac/errors.hpp"
#include "dsac/numerics.hpp"

namespace dsac {

using nlohmann::json;

namespace {

json matrix_to_array(const Eigen::MatrixXd& m) {
  json arr = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) arr.push_back(m(r, c));
  return arr;
}

json vector_to_array(const Eigen::VectorXd& v) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
  return arr;
}

Eigen::MatrixXd array_to_matrix(const json& arr, Eigen::Index rows, Eigen::Index cols, const std::string& what) {
  if (!arr.is_array() || arr.size() != static_cast<std::size_t>(rows * cols))
    throw ConfigError("checkpoint: '" + what + "' has wrong element count");
  Eigen::MatrixXd m(rows, cols);
  std::size_t k = 0;
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = arr.at(k++).get<double>();
  return m;
}

Eigen::VectorXd array_to_vector(const json& arr, Eigen::Index n, const std::string& what) {
  if (!arr.is_array() || arr.size() != static_cast<std::size_t>(n))
    throw ConfigError("checkpoint: '" + what + "' has wrong element count");
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = arr.at(static_cast<std::size_t>(i)).get<double>();
  return v;
}

std::string key(std::size_t l, const char* part) { return "layer" + std::to_string(l) + "." + part; }

json grads_to_json(const GradSet& g) {
  json layers = json::object();
  for (std::size_t l = 0; l < g.weight.size(); ++l) {
    layers[key(l, "weight")] = matrix_to_array(g.weight[l]);
    layers[key(l, "bias")] = vector_to_array(g.bias[l]);
  }
  return layers;
}

GradSet grads_from_json(const json& layers, const ParamSet& params) {
  GradSet g = GradSet::zeros_like(params);
  for (std::size_t l = 0; l < g.weight.size(); ++l) {
    g.weight[l] = array_to_matrix(layers.at(key(l, "weight")), g.weight[l].rows(), g.weight[l].cols(), key(l, "weight"));
    g.bias[l] = array_to_vector(layers.at(key(l, "bias")), g.bias[l].size(), key(l, "bias"));
  }
  return g;
}

}  // namespace

json params_to_json(const ParamSet& params) {
  json doc;
  doc["format_version"] = kCheckpointFormatVersion;
  json shape = json::array();
  json acts = json::array();
  json layers = json::object();
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    const auto& layer = params.layers[l];
    shape.push_back({layer.weight.rows(), layer.weight.cols()});
    acts.push_back(layer.activation == Activation::gelu ? "gelu" : "identity");
    layers[key(l, "weight")] = matrix_to_array(layer.weight);
    layers[key(l, "bias")] = vector_to_array(layer.bias);
  }
  doc["shape"] = std::move(shape);
  doc["activations"] = std::move(acts);
  doc["layers"] = std::move(layers);
  return doc;
}

ParamSet params_from_json(const json& doc) {
  try {
    if (doc.at("format_version").get<int>() != kCheckpointFormatVersion)
      throw ConfigError("checkpoint: unsupported format_version");
    const json& shape = doc.at("shape");
    const json& acts = doc.at("activations");
    const json& layers = doc.at("layers");
    if (!shape.is_array() || !acts.is_array() || shape.size() != acts.size())
      throw ConfigError("checkpoint: shape/activation headers disagree");
    ParamSet params;
    for (std::size_t l = 0; l < shape.size(); ++l) {
      const auto rows = shape.at(l).at(0).get<Eigen::Index>();
      const auto cols = shape.at(l).at(1).get<Eigen::Index>();
      Layer layer;
      const auto act = acts.at(l).get<std::string>();
      if (act == "gelu")
        layer.activation = Activation::gelu;
      else if (act == "identity")
        layer.activation = Activation::identity;
      else
        throw ConfigError("checkpoint: unknown activation '" + act + "'");
      layer.weight = array_to_matrix(layers.at(key(l, "weight")), rows, cols, key(l, "weight"));
      layer.bias = array_to_vector(layers.at(key(l, "bias")), rows, key(l, "bias"));
      params.layers.push_back(std::move(layer));
    }
    params.validate();
    return params;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("checkpoint: malformed network document: ") + e.what());
  }
}

json adam_to_json(const AdamState& state) {
  return json{{"step", state.step},
              {"beta1", state.beta1},
              {"beta2", state.beta2},
              {"delta", state.delta},
              {"first_moment", grads_to_json(state.first_moment)},
              {"second_moment", grads_to_json(state.second_moment)}};
}

AdamState adam_from_json(const json& doc, const ParamSet& params) {
  try {
    AdamState s;
    s.step = doc.at("step").get<long>();
    s.beta1 = doc.at("beta1").get<double>();
    s.beta2 = doc.at("beta2").get<double>();
    s.delta = doc.at("delta").get<double>();
    s.first_moment = grads_from_json(doc.at("first_moment"), params);
    s.second_moment = grads_from_json(doc.at("second_moment"), params);
    return s;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("checkpoint: malformed optimizer document: ") + e.what());
  }
}

}  // namespace dsac
