#pragma once

#include <string>
#include <utility>
#include <vector>

namespace heatctl {

struct WeightedPiece {
  double lo;
  double hi;
  double weight;
};

// V = values[i] on [breakpoints[i], breakpoints[i+1]), cyclically on [0, L).
class PiecewisePotential {
public:
  static PiecewisePotential zero(double period) { return PiecewisePotential(period, {{0.0, 0.0}}); }
  PiecewisePotential(double period, std::vector<std::pair<double, double>> steps);

  double period() const { return period_; }
  const std::vector<double>& breakpoints() const { return breakpoints_; }
  const std::vector<double>& values() const { return values_; }
  double sup_norm() const;
  bool is_zero() const;
  double value_at(double x) const;

  // Nonzero pieces inside [0, L) for the overlap integrals.
  std::vector<WeightedPiece> pieces() const;
  std::string to_string() const;

private:
  double period_;
  std::vector<double> breakpoints_;
  std::vector<double> values_;
};

} // namespace heatctl
