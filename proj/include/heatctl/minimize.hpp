#pragma once

#include <cmath>
#include <limits>
#include <utility>

namespace heatctl {

struct Minimum {
  double argmin;
  double value;
};

// Minimize f over [lo, hi] (0 < lo < hi): a logarithmic grid locates the best
// bracket, golden section in log coordinates refines it. The result is never
// worse than the best grid point.
template <class F>
Minimum minimize_log_grid(F&& f, double lo, double hi, int points = 64,
                          double rel_width = 1e-10) {
  const double log_lo = std::log(lo);
  const double step = (std::log(hi) - log_lo) / (points - 1);
  auto node = [&](int i) {
    if (i == 0) return lo;
    if (i == points - 1) return hi;
    return std::exp(log_lo + step * i);
  };

  Minimum best{node(0), f(node(0))};
  int best_i = 0;
  for (int i = 1; i < points; ++i) {
    const double x = node(i);
    const double v = f(x);
    if (v < best.value) {
      best = {x, v};
      best_i = i;
    }
  }

  double a = std::log(node(best_i > 0 ? best_i - 1 : 0));
  double b = std::log(node(best_i < points - 1 ? best_i + 1 : points - 1));
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(std::exp(c));
  double fd = f(std::exp(d));
  for (int it = 0; it < 200 && (b - a) > rel_width; ++it) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(std::exp(c));
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(std::exp(d));
    }
  }
  const Minimum refined = fc < fd ? Minimum{std::exp(c), fc} : Minimum{std::exp(d), fd};
  return refined.value < best.value ? refined : best;
}

} // namespace heatctl
