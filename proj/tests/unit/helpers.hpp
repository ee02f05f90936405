#pragma once

// Small hand-rolled generators shared by the unit tests.

#include <vector>

#include "dsac/numerics.hpp"
#include "dsac/rng.hpp"

namespace testgen {

inline int int_in(dsac::Rng& rng, int lo, int hi) {
  std::uniform_int_distribution<int> d(lo, hi);
  return d(rng);
}

inline std::vector<int> hidden_layers(dsac::Rng& rng, int max_layers, int max_width) {
  std::vector<int> h(static_cast<std::size_t>(int_in(rng, 1, max_layers)));
  for (int& w : h) w = int_in(rng, 1, max_width);
  return h;
}

inline Eigen::MatrixXd uniform_matrix(Eigen::Index r, Eigen::Index c, dsac::Rng& rng, double lo = -1.0,
                                      double hi = 1.0) {
  Eigen::MatrixXd m(r, c);
  for (Eigen::Index j = 0; j < c; ++j)
    for (Eigen::Index i = 0; i < r; ++i) m(i, j) = dsac::uniform(rng, lo, hi);
  return m;
}

// Random net with biases pushed away from zero so GELU inputs are not all tiny.
inline dsac::ParamSet random_net(dsac::Rng& rng, int in, int out, int max_layers = 2, int max_width = 16) {
  const auto h = hidden_layers(rng, max_layers, max_width);
  dsac::ParamSet p = dsac::make_mlp(in, h, out, rng);
  for (auto& l : p.layers) l.bias = uniform_matrix(l.bias.size(), 1, rng, -0.5, 0.5);
  return p;
}

}  // namespace testgen

#include "dsac/replay.hpp"

namespace testgen {

inline dsac::Batch random_batch(dsac::Rng& rng, int obs_dim, int act_dim, int n, double terminal_prob = 0.2) {
  std::vector<dsac::Transition> ts;
  for (int j = 0; j < n; ++j) {
    dsac::Transition t;
    t.s = uniform_matrix(obs_dim, 1, rng).col(0);
    t.a = uniform_matrix(act_dim, 1, rng, -0.95, 0.95).col(0);
    t.r = dsac::uniform(rng, -2, 2);
    t.s_next = uniform_matrix(obs_dim, 1, rng).col(0);
    t.done = dsac::uniform(rng, 0, 1) < terminal_prob;
    ts.push_back(t);
  }
  return dsac::Batch::from(ts);
}

}  // namespace testgen
