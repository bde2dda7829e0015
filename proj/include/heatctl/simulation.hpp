#pragma once

#include "heatctl/bounds.hpp"
#include "heatctl/galerkin.hpp"
#include "heatctl/geometry.hpp"
#include "heatctl/potential.hpp"

#include <optional>
#include <vector>

namespace heatctl {

struct SimulationSpec {
  double period = 1.0;
  int modes = 33;
  PiecewisePotential potential = PiecewisePotential::zero(1.0);
  IntervalSet control_set = IntervalSet::full(1.0);
  double horizon = 1.0;
  std::optional<double> fit_kappa; // defaults to the first eigenvalue
  std::optional<double> theta;     // fractional power of the operator
};

struct SimulationReport {
  unsigned digits = 0;
  std::vector<double> eigenvalues;
  std::vector<SpectralSample> curve;
  SIBudget budget;
  double mass_trace = 0.0;
  double log_cost_sq = 0.0;
  CostBound lower;
  CostBound upper;
  bool sandwich = false;
};

struct SpectralReport {
  unsigned digits = 0;
  std::vector<double> eigenvalues;
  std::vector<SpectralSample> curve;
};

// These pick the working precision from the number of modes and move to the
// next tier when a matrix turns out singular at the current one.
SimulationReport simulate(const SimulationSpec& spec);
SpectralReport measure_spectral_inequality(const SimulationSpec& spec);
double log_truncated_cost(const SimulationSpec& spec);

// Largest violation of d0 exp(d1 sqrt(l - kappa)) c_si >= 1 (0 if dominated).
double domination_defect(const SIBudget& budget, const std::vector<SpectralSample>& curve);

} // namespace heatctl
