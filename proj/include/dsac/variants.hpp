#pragma once

// Baseline critic kernels and refinement toggles: DSACv1, SAC, and ablations
// of the full method.

#include <optional>
#include <string>

#include "dsac/critic.hpp"

namespace dsac {

enum class CriticFamily { dsact, dsacv1, sac };

std::string to_string(CriticFamily family);
/// "dsact" | "dsacv1" | "sac"; throws ConfigError otherwise.
CriticFamily parse_critic_family(const std::string& name);

struct VariantConfig {
  CriticFamily critic_family = CriticFamily::dsact;
  bool expected_value_substitution = true;
  bool twin_distributions = true;
  bool variance_adjustment = true;
  double fixed_boundary_b = 20.0;

  static VariantConfig dsact();
  static VariantConfig dsacv1();
  /// Twin clipped-double-Q SAC; single = true drops the min.
  static VariantConfig sac(bool single = false);
};

/// Unclipped-mean, random-target kernel (no eps, no omega).
/// g_q = -(y_z - q) / sigma^2, g_sigma = -((y_z_clipped - q)^2 - sigma^2) / sigma^3.
GradCoeffs grad_coeffs_v1(double y_z, double y_z_clipped, double q, double sigma);

/// -(y_q - q): derivative of 0.5 (y_q - q)^2 with respect to q.
double grad_coeff_sac(double y_q, double q);

/// A critic_update-compatible procedure for one variant.
class CriticUpdateProcedure {
 public:
  explicit CriticUpdateProcedure(CriticRule rule) : rule_(rule) {}

  CriticUpdateStats operator()(CriticPairState& state, const Batch& batch, const ParamSet& policy_target,
                               double alpha, const CriticSettings& settings, Rng& rng) const {
    return critic_update(state, batch, policy_target, alpha, settings, rng, rule_);
  }

  const CriticRule& rule() const { return rule_; }

 private:
  CriticRule rule_;
};

/// Validates the flag combination (ConfigError on contradictions) and resolves
/// it into a concrete update rule.
CriticUpdateProcedure build_variant(const VariantConfig& cfg);

}  // namespace dsac
