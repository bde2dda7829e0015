#include "heatctl/spectral_maps.hpp"

#include "heatctl/error.hpp"

#include <cmath>
#include <numeric>

namespace heatctl {
namespace {

void require(bool ok, const char* field, const char* what) {
  if (!ok)
    throw ValidationError(field, what);
}

} // namespace

void ThickParams::validate() const {
  require(std::isfinite(rho) && rho > 0.0 && rho <= 1.0, "rho", "must lie in (0, 1]");
  require(dim >= 1, "dim", "must be a positive integer");
  require(static_cast<int>(a.size()) == dim, "a", "needs one length per dimension");
  for (double x : a)
    require(std::isfinite(x) && x > 0.0, "a", "lengths must be positive");
}

double ThickParams::l1() const { return std::accumulate(a.begin(), a.end(), 0.0); }

void EquiParams::validate() const {
  require(std::isfinite(g) && g > 0.0, "g", "must be positive");
  require(std::isfinite(delta) && delta > 0.0, "delta", "must be positive");
  require(delta <= g, "delta", "must not exceed g");
  require(dim >= 1, "dim", "must be a positive integer");
  require(std::isfinite(v_norm) && v_norm >= 0.0, "v_norm", "must be nonnegative");
  require(std::isfinite(kappa), "kappa", "must be finite");
}

void UniversalConstants::validate() const {
  require(std::isfinite(n_nttv) && n_nttv > 0.0, "n_nttv", "must be positive");
  require(std::isfinite(c_kov) && c_kov > 0.0, "c_kov", "must be positive");
}

SIBudget nttv_budget(const EquiParams& p, const UniversalConstants& consts, double norm_b) {
  p.validate();
  consts.validate();
  const double n = consts.n_nttv;
  const double log_ratio = std::log(p.g / p.delta);
  SIBudget b;
  b.gamma = 0.5;
  b.beta = 0.0;
  b.kappa = p.kappa;
  b.norm_b = norm_b;
  b.d0 = std::exp(n * (1.0 + std::pow(p.g, 4.0 / 3.0) * std::pow(p.v_norm, 2.0 / 3.0)) * log_ratio);
  b.d1 = n * p.g * log_ratio;
  b.validate();
  return b;
}

SIBudget ls_budget(const ThickParams& p, const UniversalConstants& consts, double norm_b) {
  p.validate();
  consts.validate();
  const double c = consts.c_kov;
  const double d = p.dim;
  const double log_ratio = d * std::log(c) - std::log(p.rho);
  SIBudget b;
  b.gamma = 0.5;
  b.beta = 0.0;
  b.kappa = 0.0;
  b.norm_b = norm_b;
  b.d0 = std::exp(c * d * log_ratio);
  b.d1 = c * p.l1() * log_ratio;
  b.validate();
  return b;
}

SIBudget fractional_budget(const ThickParams& p, double theta, const UniversalConstants& consts,
                           double norm_b) {
  require(std::isfinite(theta) && theta > 0.5, "theta", "must exceed 1/2");
  SIBudget b = ls_budget(p, consts, norm_b);
  b.gamma = 1.0 / (2.0 * theta);
  return b;
}

CostBound thick_cost_bound(const ThickParams& p, const UniversalConstants& consts, double horizon) {
  return shifted_bound_log(ls_budget(p, consts), horizon);
}

CostBound equi_cost_bound(const EquiParams& p, const UniversalConstants& consts, double horizon) {
  return shifted_bound_log(nttv_budget(p, consts), horizon);
}

CostBound fractional_cost_bound(const ThickParams& p, double theta, const UniversalConstants& consts,
                                double horizon) {
  return shifted_bound_log(fractional_budget(p, theta, consts), horizon);
}

} // namespace heatctl
