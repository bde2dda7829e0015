#pragma once

#include <optional>

namespace heatctl {

// Spectral-inequality data: ||P(l) f||^2 <= d0 exp(d1 l^gamma) ||1_S P(l) f||^2.
struct SIBudget {
  double d0 = 1.0;
  double d1 = 0.0;
  double gamma = 0.5;
  double beta = 0.0;
  double kappa = 0.0;
  double norm_b = 1.0;
  std::optional<double> k1_override;

  void validate() const;
  double k1() const;
};

struct LemmaParams {
  double theta, alpha, nu, dcap, ecap, c_theta;
  double k1, k2, k3;
  double log_c1; // log of C1 without the 4^C2 factor, which sits in log_k1_power
  double c2, c3, c4;
};

struct CostParts {
  double log_prefactor = 0.0;
  double log_k1_power = 0.0;
  double exponent_term = 0.0;
  double shift_term = 0.0; // -2 kappa t for the shifted bound, 0 otherwise

  double total() const { return log_prefactor + log_k1_power + exponent_term + shift_term; }
};

// Natural log of a bound on C_T^2.
struct CostBound {
  double log_cost_sq = 0.0;
  std::optional<double> t_star;
  double horizon = 0.0;
  std::optional<CostParts> parts;
};

struct CorollaryBounds {
  CostBound at_horizon;
  CostBound inf_over_horizon;
};

// Full control on the whole space (B = I): the static feedback u1 and the
// horizon-adapted null control u2, as gains per eigenvalue.
struct FullControlSolution {
  double kappa = 0.0;
  double horizon = 1.0;
  double cost_sq_u1 = 0.0;
  double cost_sq_u2 = 0.0;

  double static_gain(double lambda) const;
  double adapted_gain(double lambda) const;
};

LemmaParams derived_params(const SIBudget& budget, double horizon);
CostBound series_bound_log(const SIBudget& budget, double horizon);
CostBound closed_form_bound_log(const SIBudget& budget, double horizon);
CostBound shifted_bound_log(const SIBudget& budget, double horizon);
CostBound lower_bound_log(const SIBudget& budget, double horizon);
CorollaryBounds corollary_lower_bounds(const SIBudget& budget, double horizon);
FullControlSolution full_control_cost(double kappa, double horizon);

// Closed-form parts at effective time s, before any shift; exposed for the
// regime table, which evaluates the bound at prescribed times.
CostParts closed_form_parts(const SIBudget& budget, double s);

} // namespace heatctl
