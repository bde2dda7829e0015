#include "heatctl/potential.hpp"

#include "heatctl/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace heatctl {

PiecewisePotential::PiecewisePotential(double period, std::vector<std::pair<double, double>> steps)
    : period_(period) {
  if (!(std::isfinite(period) && period > 0.0))
    throw ValidationError("period", "must be positive");
  if (steps.empty())
    throw ValidationError("potential", "needs at least one breakpoint");
  std::sort(steps.begin(), steps.end());
  for (const auto& [x, v] : steps) {
    if (!(std::isfinite(x) && x >= 0.0 && x < period))
      throw ValidationError("potential", "breakpoints must lie in [0, L)");
    if (!std::isfinite(v))
      throw ValidationError("potential", "values must be finite");
    if (!breakpoints_.empty() && x == breakpoints_.back())
      throw ValidationError("potential", "repeated breakpoint");
    breakpoints_.push_back(x);
    values_.push_back(v);
  }
}

double PiecewisePotential::sup_norm() const {
  double s = 0.0;
  for (double v : values_)
    s = std::max(s, std::abs(v));
  return s;
}

bool PiecewisePotential::is_zero() const { return sup_norm() == 0.0; }

double PiecewisePotential::value_at(double x) const {
  x -= std::floor(x / period_) * period_;
  auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), x);
  if (it == breakpoints_.begin())
    return values_.back();
  return values_[static_cast<std::size_t>(it - breakpoints_.begin()) - 1];
}

std::vector<WeightedPiece> PiecewisePotential::pieces() const {
  std::vector<WeightedPiece> out;
  const std::size_t n = breakpoints_.size();
  if (breakpoints_.front() > 0.0 && values_.back() != 0.0)
    out.push_back({0.0, breakpoints_.front(), values_.back()});
  for (std::size_t i = 0; i < n; ++i) {
    const double hi = i + 1 < n ? breakpoints_[i + 1] : period_;
    if (values_[i] != 0.0)
      out.push_back({breakpoints_[i], hi, values_[i]});
  }
  return out;
}

std::string PiecewisePotential::to_string() const {
  std::string out;
  char buf[80];
  for (std::size_t i = 0; i < breakpoints_.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%s%.17g:%.17g", i ? " " : "", breakpoints_[i], values_[i]);
    out += buf;
  }
  return out;
}

} // namespace heatctl
