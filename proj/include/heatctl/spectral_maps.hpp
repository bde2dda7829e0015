#pragma once

#include "heatctl/bounds.hpp"

#include <numbers>
#include <vector>

namespace heatctl {

// (rho, a)-thick set data in dimension dim = a.size().
struct ThickParams {
  double rho = 1.0;
  std::vector<double> a{1.0};
  int dim = 1;

  void validate() const;
  double l1() const;
};

// (G, delta)-equidistributed set data.
struct EquiParams {
  double g = 1.0;
  double delta = 0.5;
  int dim = 1;
  double v_norm = 0.0;
  double kappa = 0.0;

  void validate() const;
};

// N and C are not given numerically anywhere; reports stamp what was used.
struct UniversalConstants {
  double n_nttv = 1.0;
  double c_kov = std::numbers::e;

  void validate() const;
};

SIBudget nttv_budget(const EquiParams& p, const UniversalConstants& consts, double norm_b = 1.0);
SIBudget ls_budget(const ThickParams& p, const UniversalConstants& consts, double norm_b = 1.0);
SIBudget fractional_budget(const ThickParams& p, double theta, const UniversalConstants& consts,
                           double norm_b = 1.0);

CostBound thick_cost_bound(const ThickParams& p, const UniversalConstants& consts, double horizon);
CostBound equi_cost_bound(const EquiParams& p, const UniversalConstants& consts, double horizon);
CostBound fractional_cost_bound(const ThickParams& p, double theta, const UniversalConstants& consts,
                                double horizon);

} // namespace heatctl
