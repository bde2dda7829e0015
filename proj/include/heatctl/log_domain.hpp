#pragma once

#include <cmath>
#include <limits>
#include <span>

namespace heatctl {

// Running log(sum exp(x_i)) without overflow.
class LogSumAccumulator {
public:
  void add(double x) {
    if (x == -std::numeric_limits<double>::infinity())
      return;
    if (x <= max_) {
      sum_ += std::exp(x - max_);
    } else {
      sum_ = sum_ * std::exp(max_ - x) + 1.0;
      max_ = x;
    }
  }

  double value() const {
    if (sum_ == 0.0)
      return -std::numeric_limits<double>::infinity();
    return max_ + std::log(sum_);
  }

private:
  double max_ = -std::numeric_limits<double>::infinity();
  double sum_ = 0.0;
};

inline double log_sum_exp(std::span<const double> xs) {
  LogSumAccumulator acc;
  for (double x : xs)
    acc.add(x);
  return acc.value();
}

// log(2k / (exp(2kT) - 1)), with the k -> 0 value -log T.
inline double log_decay_rate(double kappa, double horizon) {
  const double x = 2.0 * std::abs(kappa) * horizon;
  if (std::abs(kappa) * horizon < 1e-8)
    return -std::log(horizon) + std::log1p(-kappa * horizon);
  if (kappa > 0)
    return std::log(2.0 * kappa) - x - std::log(-std::expm1(-x));
  return std::log(-2.0 * kappa) - std::log(-std::expm1(-x));
}

} // namespace heatctl
