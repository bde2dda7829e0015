#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace heatctl {

struct Interval {
  double lo;
  double hi;

  double length() const { return hi - lo; }
  bool operator==(const Interval&) const = default;
};

// Finite union of half-open intervals on the torus [0, L). Always canonical:
// sorted, disjoint, touching pieces merged, wrap-around split at 0.
class IntervalSet {
public:
  IntervalSet(double period, std::vector<Interval> pieces);

  // "period 1; [0, 0.5) [0.75, 1)". Decimals are compared exactly, so
  // overlapping or touching input is detected without rounding.
  static IntervalSet parse(std::string_view text);
  static IntervalSet full(double period) { return IntervalSet(period, {{0.0, period}}); }

  double period() const { return period_; }
  std::span<const Interval> intervals() const { return intervals_; }
  double measure() const { return measure_; }
  bool covers_torus() const;

  // Measure of S within [0, x) for x in [0, 2L], counting the period twice.
  double cumulative(double x) const;

  std::string to_string() const;
  bool operator==(const IntervalSet& other) const {
    return period_ == other.period_ && intervals_ == other.intervals_;
  }

private:
  double period_;
  std::vector<Interval> intervals_;
  std::vector<double> prefix_;
  double measure_ = 0.0;
};

double max_thickness(const IntervalSet& s, double a);
// Largest delta for which every g-cell holds a ball of radius delta in S.
double equidistribution_radius(const IntervalSet& s, double g);
bool is_equidistributed(const IntervalSet& s, double g, double delta);
double miller_radius(const IntervalSet& s);

IntervalSet homogenize(const IntervalSet& s, int n);
IntervalSet dehomogenize(const IntervalSet& s, int n);

// Right half of every cell [jg, (j+1)g) on [0, L).
IntervalSet half_cells(double period, double g);

} // namespace heatctl
