#include "heatctl/bounds.hpp"

#include "heatctl/error.hpp"
#include "heatctl/log_domain.hpp"
#include "heatctl/minimize.hpp"

#include <cmath>
#include <limits>

namespace heatctl {
namespace {

void require(bool ok, const char* field, const char* what) {
  if (!ok)
    throw ValidationError(field, what);
}

void check_horizon(double horizon) {
  require(std::isfinite(horizon) && horizon > 0.0, "T", "horizon must be positive and finite");
}

struct GammaConstants {
  double theta, alpha, log_c1, c2, c3, c4;
};

GammaConstants gamma_constants(double g) {
  GammaConstants c{};
  c.theta = g * g / (1.0 - g);
  c.alpha = 8.0 * std::pow(4.0, 1.0 / (1.0 - g));
  c.c4 = c.theta + 1.0;
  c.c2 = 3.0 * std::pow(c.alpha, (2.0 - g) / (1.0 - g)) * std::pow(2.0, 2.0 * c.theta + 3.0);
  c.c3 = std::pow(c.alpha, 2.0 / (1.0 - g)) * std::pow(4.0, (g + c.theta + 2.0) / (1.0 - g)) *
         std::pow((c.theta + 2.0) / c.theta, 1.0 / (1.0 - g));
  c.log_c1 = std::log(4.0 * (1.0 + 2.0 * (c.alpha - 4.0)));
  return c;
}

} // namespace

void SIBudget::validate() const {
  require(std::isfinite(gamma) && gamma > 0.0 && gamma < 1.0, "gamma", "must lie in (0, 1)");
  require(std::isfinite(d0) && d0 > 0.0, "d0", "must be positive");
  require(std::isfinite(d1) && d1 >= 0.0, "d1", "must be nonnegative");
  require(std::isfinite(beta) && beta <= 0.0, "beta", "must be nonpositive");
  require(std::isfinite(kappa), "kappa", "must be finite");
  require(std::isfinite(norm_b) && norm_b > 0.0, "normB", "must be positive");
  if (k1_override)
    require(std::isfinite(*k1_override) && *k1_override > 1.0, "K1", "must exceed 1");
}

double SIBudget::k1() const {
  if (k1_override)
    return *k1_override;
  return 2.0 * d0 * std::exp(-beta) * norm_b * norm_b + 1.0;
}

CostParts closed_form_parts(const SIBudget& budget, double s) {
  const GammaConstants c = gamma_constants(budget.gamma);
  const double g = budget.gamma;
  CostParts p;
  p.log_prefactor = c.log_c1 + std::log(budget.d0) - std::log(s);
  p.log_k1_power = c.c2 * std::log(4.0 * budget.k1());
  const double base = budget.d1 + (budget.beta == 0.0 ? 0.0 : std::pow(-budget.beta, c.c4));
  p.exponent_term = base == 0.0 ? 0.0 : c.c3 * std::pow(base / std::pow(s, g), 1.0 / (1.0 - g));
  return p;
}

LemmaParams derived_params(const SIBudget& budget, double horizon) {
  budget.validate();
  check_horizon(horizon);
  const GammaConstants c = gamma_constants(budget.gamma);
  const double g = budget.gamma;
  const double T = horizon;

  LemmaParams lp{};
  lp.theta = c.theta;
  lp.alpha = c.alpha;
  lp.c4 = c.c4;
  lp.c2 = c.c2;
  lp.c3 = c.c3;
  lp.log_c1 = c.log_c1;
  lp.k1 = budget.k1();

  const double pow2_theta = std::pow(2.0, c.theta);
  lp.c_theta = budget.beta == 0.0
                   ? 0.0
                   : pow2_theta * std::pow(-budget.beta, c.theta + 1.0) * (2.0 + c.theta) / c.theta;
  lp.dcap = std::pow(3.0 * c.alpha * std::log(4.0 * lp.k1), 1.0 - g);
  lp.ecap = lp.c_theta == 0.0 ? 0.0
                              : std::pow(8.0 * pow2_theta * lp.c_theta / lp.dcap, (1.0 - g) / g);

  // nu^(1-gamma); K3 and K2 are rearranged so the alpha*d1 parts cancel exactly.
  const double nu_base = c.alpha * budget.d1 / T + lp.dcap / std::pow(T, 1.0 - g) + lp.ecap / T;
  lp.nu = std::pow(nu_base, 1.0 / (1.0 - g));
  const double nu_gamma = std::pow(nu_base, g / (1.0 - g));
  const double charge = 4.0 * pow2_theta * lp.c_theta * std::pow(T, -c.theta);
  const double slack = nu_gamma * (lp.dcap * std::pow(T, g) + lp.ecap) - charge;
  lp.k3 = slack / (c.alpha - 4.0);
  lp.k2 = (c.alpha / 4.0 - 1.0) * (lp.k3 + budget.d1 * nu_gamma);

  if (!(std::isfinite(lp.nu) && std::isfinite(lp.k2) && std::isfinite(lp.k3)))
    throw InternalError("derived parameters are not finite");
  if (!(lp.k2 > 0.0) || !(lp.k3 > 0.0))
    throw InternalError("lemma positivity violated: K2 or K3 is not positive");
  return lp;
}

CostBound series_bound_log(const SIBudget& budget, double horizon) {
  const LemmaParams lp = derived_params(budget, horizon);
  const double nu_gamma = std::pow(lp.nu, budget.gamma);
  const double log_head = std::log(4.0 * budget.d0 / horizon);
  const double q = lp.alpha / 4.0;
  const double log_q = std::log(q);
  const double log_4k1 = std::log(4.0 * lp.k1);
  const double shift = log_head + lp.k2 / (q - 1.0);

  LogSumAccumulator acc;
  acc.add(log_head + budget.d1 * nu_gamma);
  double prev = std::numeric_limits<double>::infinity();
  for (int k = 1; k < 100000; ++k) {
    const double term = shift + k * log_4k1 - lp.k3 * std::exp(k * log_q);
    acc.add(term);
    if (term < acc.value() - 60.0 && term < prev)
      break;
    prev = term;
  }

  CostBound out;
  out.log_cost_sq = acc.value();
  out.horizon = horizon;
  return out;
}

CostBound closed_form_bound_log(const SIBudget& budget, double horizon) {
  derived_params(budget, horizon);
  CostBound out;
  out.parts = closed_form_parts(budget, horizon);
  out.log_cost_sq = out.parts->total();
  out.horizon = horizon;
  return out;
}

CostBound shifted_bound_log(const SIBudget& budget, double horizon) {
  if (budget.kappa == 0.0)
    return closed_form_bound_log(budget, horizon);
  derived_params(budget, horizon);

  const double T = horizon;
  const double kappa = budget.kappa;
  const bool decaying = kappa < 0.0;
  // tau is the observation length: t itself for kappa < 0, T - t for kappa > 0.
  auto parts_at = [&](double tau) {
    CostParts p = closed_form_parts(budget, tau);
    const double t = decaying ? tau : T - tau;
    p.shift_term = -2.0 * kappa * t;
    return p;
  };
  const Minimum m = minimize_log_grid([&](double tau) { return parts_at(tau).total(); },
                                      T * 1e-12, T);

  CostBound out;
  out.parts = parts_at(m.argmin);
  out.log_cost_sq = out.parts->total();
  out.t_star = decaying ? m.argmin : T - m.argmin;
  out.horizon = T;
  return out;
}

namespace {

double log_lower_prefactor(const SIBudget& budget) {
  require(std::isfinite(budget.norm_b) && budget.norm_b > 0.0, "normB", "must be positive");
  require(std::isfinite(budget.beta) && budget.beta <= 0.0, "beta", "must be nonpositive");
  require(std::isfinite(budget.kappa), "kappa", "must be finite");
  return -2.0 * std::log(budget.norm_b) + budget.beta * std::log1p(budget.kappa * budget.kappa);
}

CostBound make_lower(double log_value, double horizon) {
  CostBound out;
  out.log_cost_sq = log_value;
  out.horizon = horizon;
  return out;
}

} // namespace

CostBound lower_bound_log(const SIBudget& budget, double horizon) {
  check_horizon(horizon);
  return make_lower(log_lower_prefactor(budget) + log_decay_rate(budget.kappa, horizon), horizon);
}

CorollaryBounds corollary_lower_bounds(const SIBudget& budget, double horizon) {
  check_horizon(horizon);
  const double pre = log_lower_prefactor(budget);
  const double k = budget.kappa;
  const double T = horizon;
  double at;
  if (k < 0.0)
    at = std::log(1.0 / (2.0 * T) - k);
  else if (k == 0.0)
    at = -std::log(T);
  else
    at = -std::log(T) - 2.0 * k * T;
  const double inf = k < 0.0 ? std::log(-2.0 * k) : -std::numeric_limits<double>::infinity();
  return {make_lower(pre + at, T), make_lower(pre + inf, T)};
}

FullControlSolution full_control_cost(double kappa, double horizon) {
  check_horizon(horizon);
  require(std::isfinite(kappa), "kappa", "must be finite");
  FullControlSolution s;
  s.kappa = kappa;
  s.horizon = horizon;
  s.cost_sq_u2 = std::exp(log_decay_rate(kappa, horizon));
  if (kappa == 0.0) {
    s.cost_sq_u1 = 1.0 / horizon;
  } else if (std::abs(kappa) * horizon < 1e-8) {
    s.cost_sq_u1 = (1.0 - kappa * horizon) / horizon;
  } else {
    const double r = kappa / std::expm1(kappa * horizon);
    s.cost_sq_u1 = horizon * r * r;
  }
  return s;
}

double FullControlSolution::static_gain(double lambda) const {
  if (lambda == 0.0)
    return -1.0 / horizon;
  return -lambda / std::expm1(lambda * horizon);
}

double FullControlSolution::adapted_gain(double lambda) const {
  if (lambda == 0.0)
    return -1.0 / horizon;
  return -2.0 * lambda / std::expm1(2.0 * lambda * horizon);
}

} // namespace heatctl
