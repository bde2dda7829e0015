#pragma once

#include "heatctl/bounds.hpp"
#include "heatctl/geometry.hpp"
#include "heatctl/spectral_maps.hpp"

#include <string>
#include <vector>

namespace heatctl {

struct Column {
  std::string name;
  double value;
};

struct Flag {
  std::string name;
  bool pass;
};

struct SweepRow {
  std::string scenario;
  int index = 0;
  std::vector<Column> values;
  std::vector<Flag> flags;
  UniversalConstants consts;

  double value(const std::string& name) const;
  bool flag(const std::string& name) const;
};

struct SweepReport {
  std::vector<SweepRow> rows;

  bool passed() const;
  // Header from the first row; all rows of a sweep share one schema.
  std::string to_csv() const;
};

struct RegimeHorizons {
  double small = 1e-3;
  double large = 1e3;
};

struct SimulatorSettings {
  int modes = 33;
  int max_steps = 4; // rows beyond this leave the truncated-cost column empty
};

SweepReport table1_report(const SIBudget& budget, const UniversalConstants& consts,
                          const RegimeHorizons& horizons = {});

SweepReport homogenization_sweep(const ThickParams& p, const UniversalConstants& consts, int steps,
                                 double horizon);
SweepReport homogenization_sweep(const IntervalSet& tmpl, const UniversalConstants& consts, int steps,
                                 double horizon, const SimulatorSettings& sim);

SweepReport dehomogenization_sweep(const ThickParams& p, double theta, const UniversalConstants& consts,
                                   int steps, double horizon0 = 1.0);
// G and delta doubled per step, T_n = T_0 2^(schedule n). Reported only.
SweepReport equi_dehomogenization_sweep(const EquiParams& p, const UniversalConstants& consts, int steps,
                                        double horizon0, double schedule = 4.0 / 3.0);

SweepReport miller_diagnostic(const IntervalSet& s, double g, const std::vector<double>& horizons,
                              const UniversalConstants& consts);

// HEATCTL_THREADS, else the hardware concurrency.
unsigned worker_count();

} // namespace heatctl
