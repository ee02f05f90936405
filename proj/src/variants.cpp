#include "dsac/variants.hpp"

#include <algorithm>
#include <cmath>

#include "dsac/errors.hpp"

namespace dsac {

std::string to_string(CriticFamily family) {
  switch (family) {
    case CriticFamily::dsact:
      return "dsact";
    case CriticFamily::dsacv1:
      return "dsacv1";
    case CriticFamily::sac:
      return "sac";
  }
  return "unknown";
}

CriticFamily parse_critic_family(const std::string& name) {
  if (name == "dsact") return CriticFamily::dsact;
  if (name == "dsacv1") return CriticFamily::dsacv1;
  if (name == "sac") return CriticFamily::sac;
  throw ConfigError("unknown algorithm '" + name + "' (expected dsact, dsacv1 or sac)");
}

VariantConfig VariantConfig::dsact() { return {}; }

VariantConfig VariantConfig::dsacv1() {
  VariantConfig v;
  v.critic_family = CriticFamily::dsacv1;
  v.expected_value_substitution = false;
  v.twin_distributions = false;
  v.variance_adjustment = false;
  v.fixed_boundary_b = 20.0;
  return v;
}

VariantConfig VariantConfig::sac(bool single) {
  VariantConfig v;
  v.critic_family = CriticFamily::sac;
  v.twin_distributions = !single;
  return v;
}

GradCoeffs grad_coeffs_v1(double y_z, double y_z_clipped, double q, double sigma) {
  return grad_coeffs_dsact(y_z, y_z_clipped, q, std::max(sigma, 1e-8), 0.0);
}

double grad_coeff_sac(double y_q, double q) { return -(y_q - q); }

CriticUpdateProcedure build_variant(const VariantConfig& cfg) {
  if (!std::isfinite(cfg.fixed_boundary_b) || cfg.fixed_boundary_b < 0.0)
    throw ConfigError("variant: fixed_boundary_b must be finite and non-negative");
  CriticRule rule;
  switch (cfg.critic_family) {
    case CriticFamily::dsact:
      rule.distributional = true;
      rule.expected_value_substitution = cfg.expected_value_substitution;
      rule.twin = cfg.twin_distributions;
      rule.variance_adjustment = cfg.variance_adjustment;
      rule.fixed_boundary_b = cfg.fixed_boundary_b;
      break;
    case CriticFamily::dsacv1:
      if (cfg.expected_value_substitution || cfg.twin_distributions || cfg.variance_adjustment)
        throw ConfigError("variant: dsacv1 has no refinements; turn all refinement flags off or use dsact");
      rule.distributional = true;
      rule.expected_value_substitution = false;
      rule.twin = false;
      rule.variance_adjustment = false;
      rule.fixed_boundary_b = cfg.fixed_boundary_b;
      break;
    case CriticFamily::sac:
      rule.distributional = false;
      rule.expected_value_substitution = true;
      rule.twin = cfg.twin_distributions;
      rule.variance_adjustment = false;
      rule.fixed_boundary_b = cfg.fixed_boundary_b;
      break;
  }
  return CriticUpdateProcedure(rule);
}

}  // namespace dsac
