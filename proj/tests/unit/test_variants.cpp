#include <doctest.h>

#include <cmath>

#include "dsac/distributions.hpp"
#include "dsac/errors.hpp"
#include "dsac/variants.hpp"
#include "helpers.hpp"

using namespace dsac;

TEST_CASE("v1 kernel") {
  CHECK(grad_coeffs_v1(1.2, 1.2, 1.2, 0.5).g_q == 0.0);
  const GradCoeffs g = grad_coeffs_v1(3, 3, 1, 1);
  CHECK(g.g_q == -2.0);
  CHECK(g.g_sigma == -3.0);
  CHECK(std::isfinite(grad_coeffs_v1(3, 2, 1, 0.0).g_q));
}

TEST_CASE("sac kernel") {
  CHECK(grad_coeff_sac(1.5, 1.5) == 0.0);
  CHECK(grad_coeff_sac(2, 1) == -1.0);
  Rng rng(1);
  for (int k = 0; k < 100; ++k) {
    const double y = uniform(rng, -5, 5), q = uniform(rng, -5, 5), c = uniform(rng, 0.01, 100);
    CHECK(grad_coeff_sac(c * y, c * q) == doctest::Approx(c * grad_coeff_sac(y, q)));
  }
}

TEST_CASE("v1 mean coefficient averages to the expected-value coefficient") {
  Rng rng(2);
  const double r = 0.3, q_next = 2.0, sigma_next = 1.5, gamma = 0.9, q = 1.0, sigma = 0.8;
  const double y_q = r + gamma * q_next;
  const int n = 200000;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    const double y_z = r + gamma * (q_next + sigma_next * standard_normal(rng));
    sum += grad_coeffs_v1(y_z, y_z, q, sigma).g_q;
  }
  const double expected = grad_coeffs_dsact(y_q, y_q, q, sigma, 0.0).g_q;
  const double sem = gamma * sigma_next / (sigma * sigma) / std::sqrt(static_cast<double>(n));
  CHECK(std::abs(sum / n - expected) <= 4 * sem);
}

TEST_CASE("v1 mean coefficient is noisier than the expected-value coefficient") {
  Rng rng(3);
  const double gamma = 0.99, sigma_next = 0.7, q = 0.2, sigma = 1.1;
  const int n = 10000;
  double s1 = 0, s2 = 0, t1 = 0, t2 = 0;
  for (int i = 0; i < n; ++i) {
    const double q_next = uniform(rng, -1, 1);  // spread of the expected target across samples
    const double y_q = 0.5 + gamma * q_next;
    const double y_z = y_q + gamma * sigma_next * standard_normal(rng);
    const double v1 = grad_coeffs_v1(y_z, y_z, q, sigma).g_q;
    const double dt = grad_coeffs_dsact(y_q, y_z, q, sigma, 0.0).g_q;
    s1 += v1, s2 += v1 * v1, t1 += dt, t2 += dt * dt;
  }
  const double var_v1 = s2 / n - (s1 / n) * (s1 / n);
  const double var_t = t2 / n - (t1 / n) * (t1 / n);
  CHECK(var_v1 / var_t > 1.0);
}

TEST_CASE("variant presets") {
  const VariantConfig t = VariantConfig::dsact();
  CHECK(t.expected_value_substitution);
  CHECK(t.twin_distributions);
  CHECK(t.variance_adjustment);
  const VariantConfig v1 = VariantConfig::dsacv1();
  CHECK_FALSE(v1.expected_value_substitution);
  CHECK_FALSE(v1.twin_distributions);
  CHECK_FALSE(v1.variance_adjustment);
  CHECK(v1.fixed_boundary_b == 20.0);

  const CriticRule r1 = build_variant(v1).rule();
  CHECK(r1.distributional);
  CHECK_FALSE(r1.twin);
  CHECK_FALSE(r1.expected_value_substitution);
  CHECK(r1.fixed_boundary_b == 20.0);

  const CriticRule sac = build_variant(VariantConfig::sac()).rule();
  CHECK_FALSE(sac.distributional);
  CHECK(sac.twin);
  CHECK_FALSE(build_variant(VariantConfig::sac(true)).rule().twin);
}

TEST_CASE("contradictory flags are configuration errors") {
  VariantConfig v = VariantConfig::dsacv1();
  v.twin_distributions = true;
  CHECK_THROWS_AS(build_variant(v), ConfigError);
  VariantConfig neg = VariantConfig::dsact();
  neg.fixed_boundary_b = -1;
  CHECK_THROWS_AS(build_variant(neg), ConfigError);
  neg.fixed_boundary_b = std::nan("");
  CHECK_THROWS_AS(build_variant(neg), ConfigError);
  CHECK_THROWS_AS(parse_critic_family("td3"), ConfigError);
  for (auto f : {CriticFamily::dsact, CriticFamily::dsacv1, CriticFamily::sac})
    CHECK(parse_critic_family(to_string(f)) == f);
}

TEST_CASE("all-on procedure is the default critic update") {
  Rng rng(4);
  const std::vector<int> h{8};
  const CriticPairState c0 = make_critic_pair(3, 1, h, rng);
  const ParamSet pol = make_mlp(3, h, 2, rng);
  const Batch batch = testgen::random_batch(rng, 3, 1, 10);
  const CriticSettings s{0.99, 0.005, 1e-3, 3.0, 0.1, 0.1};
  CriticPairState a = c0, b = c0;
  Rng ra(77), rb(77);
  const CriticUpdateProcedure proc = build_variant(VariantConfig::dsact());
  for (int k = 0; k < 3; ++k) {
    proc(a, batch, pol, 0.2, s, ra);
    critic_update(b, batch, pol, 0.2, s, rb);
  }
  for (int i = 0; i < 2; ++i)
    for (std::size_t p = 0; p < c0.theta[i].size(); ++p) CHECK(a.theta[i].at(p) == b.theta[i].at(p));
  CHECK(a.b == b.b);
  CHECK(a.omega == b.omega);
}

TEST_CASE("every variant's gradient vanishes at its fixed point") {
  Rng rng(5);
  const std::vector<int> h{6};
  CriticPairState c = make_critic_pair(2, 1, h, rng);
  const Batch batch = testgen::random_batch(rng, 2, 1, 6);
  const CriticEval e = evaluate_critic(c.theta[0], batch.states, batch.actions);
  TargetBatch tb;
  tb.y_q = e.q;
  tb.y_z = e.q - e.sigma;  // zero TD error in expectation, squared deviation = sigma^2
  tb.chosen_index = Eigen::VectorXi::Ones(batch.size());
  const CriticSettings s;
  for (const VariantConfig& v : {VariantConfig::dsact(), VariantConfig::sac(), VariantConfig::sac(true)}) {
    const CriticGradient g = critic_gradient(c.theta[0], batch, tb, 50.0, 1.0, s, build_variant(v).rule());
    for (double x : g.grads.flatten()) CHECK(std::abs(x) < 1e-14);
  }
  // v1 puts the random target in the mean term: pair each (s, a) with draws q + sigma and q - sigma
  std::vector<Transition> twice;
  for (Eigen::Index j = 0; j < batch.size(); ++j)
    for (int k = 0; k < 2; ++k)
      twice.push_back({batch.states.col(j), batch.actions.col(j), 0.0, batch.next_states.col(j), false, false});
  const Batch doubled = Batch::from(twice);
  TargetBatch v1t;
  v1t.y_q.resize(2 * batch.size());
  v1t.y_z.resize(2 * batch.size());
  v1t.chosen_index = Eigen::VectorXi::Ones(2 * batch.size());
  for (Eigen::Index j = 0; j < batch.size(); ++j) {
    v1t.y_q(2 * j) = v1t.y_q(2 * j + 1) = e.q(j);
    v1t.y_z(2 * j) = e.q(j) + e.sigma(j);
    v1t.y_z(2 * j + 1) = e.q(j) - e.sigma(j);
  }
  const CriticGradient gv1 =
      critic_gradient(c.theta[0], doubled, v1t, 0.0, 1.0, s, build_variant(VariantConfig::dsacv1()).rule());
  for (double x : gv1.grads.flatten()) CHECK(std::abs(x) < 1e-12);
}
