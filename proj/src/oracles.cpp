#include "dsac/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>

#include "dsac/distributions.hpp"
#include "dsac/errors.hpp"

namespace dsac {

GradSet finite_diff_grad(const std::function<double(const ParamSet&)>& fn, const ParamSet& params, double h) {
  if (!(h > 0.0)) throw ConfigError("finite_diff_grad: h must be positive");
  ParamSet probe = params;
  GradSet g = GradSet::zeros_like(params);
  for (std::size_t l = 0; l < probe.layers.size(); ++l) {
    auto& layer = probe.layers[l];
    auto central = [&](double& slot) {
      const double saved = slot;
      slot = saved + h;
      const double up = fn(probe);
      slot = saved - h;
      const double down = fn(probe);
      slot = saved;
      return (up - down) / (2.0 * h);
    };
    for (Eigen::Index r = 0; r < layer.weight.rows(); ++r)
      for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) g.weight[l](r, c) = central(layer.weight(r, c));
    for (Eigen::Index r = 0; r < layer.bias.size(); ++r) g.bias[l](r) = central(layer.bias(r));
  }
  return g;
}

double max_relative_error(const GradSet& a, const GradSet& b, double floor) {
  const auto fa = a.flatten();
  const auto fb = b.flatten();
  if (fa.size() != fb.size()) throw ContractViolation("max_relative_error: shape mismatch");
  double worst = 0.0;
  for (std::size_t k = 0; k < fa.size(); ++k) {
    const double denom = std::max({std::abs(fa[k]), std::abs(fb[k]), floor});
    worst = std::max(worst, std::abs(fa[k] - fb[k]) / denom);
  }
  return worst;
}

BatchPolicy network_policy(const ParamSet& actor) {
  return [actor](const Eigen::MatrixXd& obs, Rng& rng) {
    const Eigen::MatrixXd raw = mlp_predict(actor, obs);
    const Eigen::MatrixXd zeta = standard_normal_matrix(raw.rows() / 2, obs.cols(), rng);
    PolicyBatch pb = policy_sample_batch(raw, zeta);
    return PolicyDraw{std::move(pb.a), std::move(pb.logp)};
  };
}

int truth_horizon(double gamma) {
  if (!(gamma >= 0.0 && gamma < 1.0)) throw ConfigError("truth_horizon: gamma must lie in [0, 1)");
  int t = 1;
  double g = gamma;
  while (g >= 1e-3) {
    g *= gamma;
    ++t;
  }
  return t;
}

McEstimate mc_true_q(const Environment& env, const EnvState& start, const Eigen::VectorXd& action,
                     const BatchPolicy& policy, int n_rollouts, double gamma, double alpha, Rng& rng,
                     double reward_scale) {
  if (n_rollouts < 1) throw ConfigError("mc_true_q: n_rollouts must be >= 1");
  const int horizon = truth_horizon(gamma);
  const auto n = static_cast<std::size_t>(n_rollouts);
  std::vector<EnvState> states(n, start);
  for (auto& s : states) {
    s.rng = Rng(rng());
    s.step_count = 0;
  }
  std::vector<double> ret(n, 0.0);
  std::vector<bool> alive(n, true);
  for (std::size_t i = 0; i < n; ++i) {
    const StepResult r = env.step(states[i], action);
    ret[i] = reward_scale * r.reward;
    alive[i] = !r.done;
  }
  const int obs_dim = env.spec().obs_dim;
  double discount = 1.0;
  for (int t = 1; t < horizon; ++t) {
    discount *= gamma;
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < n; ++i)
      if (alive[i]) idx.push_back(i);
    if (idx.empty()) break;
    Eigen::MatrixXd obs(obs_dim, static_cast<Eigen::Index>(idx.size()));
    for (std::size_t k = 0; k < idx.size(); ++k) obs.col(static_cast<Eigen::Index>(k)) = env.observe(states[idx[k]]);
    const PolicyDraw draw = policy(obs, rng);
    for (std::size_t k = 0; k < idx.size(); ++k) {
      const std::size_t i = idx[k];
      const auto col = static_cast<Eigen::Index>(k);
      const StepResult r = env.step(states[i], draw.actions.col(col));
      ret[i] += discount * (reward_scale * r.reward - alpha * draw.logp(col));
      if (r.done) alive[i] = false;
    }
  }
  McEstimate est;
  est.n_rollouts = n_rollouts;
  est.horizon = horizon;
  double sum = 0.0;
  for (double g : ret) sum += g;
  est.mean = sum / static_cast<double>(n);
  if (n > 1) {
    double ss = 0.0;
    for (double g : ret) ss += (g - est.mean) * (g - est.mean);
    est.sem = std::sqrt(ss / static_cast<double>(n - 1) / static_cast<double>(n));
  }
  return est;
}

BiasReport make_bias_report(std::vector<BiasSample> samples, int n_rollouts, int horizon) {
  BiasReport rep;
  rep.n_rollouts = n_rollouts;
  rep.horizon = horizon;
  rep.samples = std::move(samples);
  const auto n = static_cast<double>(rep.samples.size());
  if (rep.samples.empty()) return rep;
  double sum = 0.0;
  for (const auto& s : rep.samples) sum += s.estimate - s.truth;
  rep.mean_bias = sum / n;
  if (rep.samples.size() > 1) {
    double ss = 0.0;
    for (const auto& s : rep.samples) {
      const double d = s.estimate - s.truth - rep.mean_bias;
      ss += d * d;
    }
    rep.sem = std::sqrt(ss / (n - 1.0) / n);
  }
  return rep;
}

nlohmann::json to_json(const BiasReport& report) {
  nlohmann::json samples = nlohmann::json::array();
  for (const auto& s : report.samples)
    samples.push_back({{"estimate", s.estimate}, {"truth", s.truth}, {"truth_sem", s.truth_sem}});
  return {{"mean_bias", report.mean_bias},
          {"sem", report.sem},
          {"n_samples", report.samples.size()},
          {"n_rollouts", report.n_rollouts},
          {"horizon", report.horizon},
          {"horizon_rule", "smallest T with gamma^T < 1e-3"},
          {"samples", samples}};
}

// ---------------------------------------------------------------------------
// Bandit chain quadrature.

namespace {

struct Quadrature {
  std::vector<double> grid;
  std::vector<double> weights;
};

Quadrature trapezoid(double step) {
  const auto intervals = static_cast<std::size_t>(std::llround(2.0 / step));
  Quadrature q;
  q.grid.resize(intervals + 1);
  q.weights.assign(intervals + 1, 2.0 / static_cast<double>(intervals));
  for (std::size_t k = 0; k <= intervals; ++k)
    q.grid[k] = -1.0 + 2.0 * static_cast<double>(k) / static_cast<double>(intervals);
  q.weights.front() *= 0.5;
  q.weights.back() *= 0.5;
  return q;
}

double reward_mean(const BanditChainParams& chain, int s, double a) {
  const double d = a - chain.optimal_actions[static_cast<std::size_t>(s)];
  return -d * d;
}

// Solves x_s = c_s + k * x_{(s+1) mod 3} exactly.
std::array<double, 3> solve_cycle(const std::array<double, 3>& c, double k) {
  Eigen::Matrix3d m = Eigen::Matrix3d::Identity();
  for (int s = 0; s < 3; ++s) m(s, (s + 1) % 3) -= k;
  const Eigen::Vector3d x = m.partialPivLu().solve(Eigen::Vector3d(c[0], c[1], c[2]));
  return {x(0), x(1), x(2)};
}

SoftQTable solve_on_grid(const BanditChainParams& chain, double alpha, double gamma, double step) {
  const Quadrature quad = trapezoid(step);
  const std::size_t n = quad.grid.size();
  SoftQTable t;
  t.grid = quad.grid;
  t.alpha = alpha;
  t.gamma = gamma;

  // Per-state soft maximum of the immediate reward: V = c + gamma * V(next).
  std::array<double, 3> c{};
  for (int s = 0; s < 3; ++s) {
    double peak = -std::numeric_limits<double>::infinity();
    for (double a : quad.grid) peak = std::max(peak, reward_mean(chain, s, a));
    if (alpha <= 0.0) {
      c[static_cast<std::size_t>(s)] = peak;
      continue;
    }
    double acc = 0.0;
    for (std::size_t k = 0; k < n; ++k)
      acc += quad.weights[k] * std::exp((reward_mean(chain, s, quad.grid[k]) - peak) / alpha);
    c[static_cast<std::size_t>(s)] = peak + alpha * std::log(acc);
  }
  t.value = solve_cycle(c, gamma);
  for (int s = 0; s < 3; ++s) {
    auto& row = t.q[static_cast<std::size_t>(s)];
    row.resize(n);
    for (std::size_t k = 0; k < n; ++k)
      row[k] = reward_mean(chain, s, quad.grid[k]) + gamma * t.value[static_cast<std::size_t>((s + 1) % 3)];
  }

  // Return variance W(s) = nu^2 + gamma^2 (W(s') + Var_{a'~pi*}[Q(s',a') - alpha log pi*(a'|s')]).
  std::array<double, 3> spread{};
  if (alpha > 0.0) {
    for (int s = 0; s < 3; ++s) {
      const auto& row = t.q[static_cast<std::size_t>(s)];
      const double v = t.value[static_cast<std::size_t>(s)];
      double mass = 0.0;
      double m1 = 0.0;
      double m2 = 0.0;
      for (std::size_t k = 0; k < n; ++k) {
        const double logpi = (row[k] - v) / alpha;
        const double p = quad.weights[k] * std::exp(logpi);
        const double soft = row[k] - alpha * logpi;
        mass += p;
        m1 += p * soft;
        m2 += p * soft * soft;
      }
      m1 /= mass;
      m2 /= mass;
      spread[static_cast<std::size_t>(s)] = std::max(m2 - m1 * m1, 0.0);
    }
  }
  std::array<double, 3> cw{};
  for (int s = 0; s < 3; ++s)
    cw[static_cast<std::size_t>(s)] = chain.nu * chain.nu + gamma * gamma * spread[static_cast<std::size_t>((s + 1) % 3)];
  const std::array<double, 3> w = solve_cycle(cw, gamma * gamma);
  for (int s = 0; s < 3; ++s)
    t.ret_std[static_cast<std::size_t>(s)].assign(n, std::sqrt(std::max(w[static_cast<std::size_t>((s))], 0.0)));
  return t;
}

double interpolate(const std::vector<double>& grid, const std::vector<double>& values, double a) {
  const double x = std::clamp(a, grid.front(), grid.back());
  const double step = (grid.back() - grid.front()) / static_cast<double>(grid.size() - 1);
  auto k = static_cast<std::size_t>((x - grid.front()) / step);
  if (k >= grid.size() - 1) k = grid.size() - 2;
  const double frac = (x - grid[k]) / step;
  return values[k] + frac * (values[k + 1] - values[k]);
}

}  // namespace

double SoftQTable::q_at(int s, double a) const { return interpolate(grid, q.at(static_cast<std::size_t>(s)), a); }

double SoftQTable::std_at(int s, double a) const {
  return interpolate(grid, ret_std.at(static_cast<std::size_t>(s)), a);
}

double SoftQTable::log_policy(int s, double a) const {
  return (q_at(s, a) - value.at(static_cast<std::size_t>(s))) / alpha;
}

SoftQTable numeric_soft_q(const BanditChainParams& chain, double alpha, double gamma, double grid_step) {
  if (!(grid_step > 0.0 && grid_step <= 1e-3)) throw ConfigError("numeric_soft_q: grid step must lie in (0, 1e-3]");
  if (!(gamma >= 0.0 && gamma < 1.0)) throw ConfigError("numeric_soft_q: gamma must lie in [0, 1)");
  if (alpha < 0.0) throw ConfigError("numeric_soft_q: alpha must be non-negative");
  SoftQTable coarse = solve_on_grid(chain, alpha, gamma, grid_step);
  const SoftQTable fine = solve_on_grid(chain, alpha, gamma, grid_step / 2.0);
  double worst = 0.0;
  for (int s = 0; s < 3; ++s) {
    const auto si = static_cast<std::size_t>(s);
    for (std::size_t k = 0; k < coarse.grid.size(); ++k) {
      worst = std::max(worst, std::abs(coarse.q[si][k] - fine.q[si][2 * k]));
      worst = std::max(worst, std::abs(coarse.ret_std[si][k] - fine.ret_std[si][2 * k]));
    }
  }
  if (worst > 1e-6)
    throw ConfigError("numeric_soft_q: quadrature not converged (grid halving changed results by " +
                      std::to_string(worst) + ")");
  return coarse;
}

BatchPolicy soft_q_policy(const SoftQTable& table) {
  if (!(table.alpha > 0.0)) throw ConfigError("soft_q_policy: needs alpha > 0");
  // Per-state CDF on the grid (trapezoid of the density).
  auto cdfs = std::make_shared<std::array<std::vector<double>, 3>>();
  for (int s = 0; s < 3; ++s) {
    auto& cdf = (*cdfs)[static_cast<std::size_t>(s)];
    cdf.assign(table.grid.size(), 0.0);
    for (std::size_t k = 1; k < table.grid.size(); ++k) {
      const double p0 = std::exp(table.log_policy(s, table.grid[k - 1]));
      const double p1 = std::exp(table.log_policy(s, table.grid[k]));
      cdf[k] = cdf[k - 1] + 0.5 * (p0 + p1) * (table.grid[k] - table.grid[k - 1]);
    }
    for (double& v : cdf) v /= cdf.back();
  }
  return [table, cdfs](const Eigen::MatrixXd& obs, Rng& rng) {
    PolicyDraw draw;
    draw.actions.resize(1, obs.cols());
    draw.logp.resize(obs.cols());
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (Eigen::Index j = 0; j < obs.cols(); ++j) {
      Eigen::Index s = 0;
      obs.col(j).maxCoeff(&s);
      const auto& cdf = (*cdfs)[static_cast<std::size_t>(s)];
      const double u = unit(rng);
      const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
      std::size_t k = static_cast<std::size_t>(std::distance(cdf.begin(), it));
      k = std::clamp<std::size_t>(k, 1, cdf.size() - 1);
      const double span = cdf[k] - cdf[k - 1];
      const double frac = span > 0.0 ? (u - cdf[k - 1]) / span : 0.5;
      const double a = table.grid[k - 1] + frac * (table.grid[k] - table.grid[k - 1]);
      draw.actions(0, j) = a;
      draw.logp(j) = table.log_policy(static_cast<int>(s), a);
    }
    return draw;
  };
}

}  // namespace dsac
