#include "heatctl/galerkin.hpp"

#include <cmath>

namespace heatctl {

SIBudget fit_budget(const std::vector<SpectralSample>& curve, double kappa) {
  if (curve.empty())
    throw ValidationError("curve", "needs at least one sample");
  if (!std::isfinite(kappa))
    throw ValidationError("kappa", "must be finite");
  std::vector<double> xs, ys;
  for (const SpectralSample& p : curve) {
    if (!(p.c_si > 0.0))
      throw ValidationError("curve", "c_si must be positive (numerically degenerate subspace)");
    if (!(p.c_si <= 1.0 + 1e-10))
      throw ValidationError("curve", "c_si must not exceed 1");
    xs.push_back(std::sqrt(std::max(p.lambda - kappa, 0.0)));
    ys.push_back(-std::log(p.c_si));
  }

  const double n = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  const double slope = sxx > 0.0 ? std::max(sxy / sxx, 0.0) : 0.0;
  double intercept = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < xs.size(); ++i)
    intercept = std::max(intercept, ys[i] - slope * xs[i]);

  SIBudget b;
  b.d0 = std::exp(intercept);
  b.d1 = slope;
  b.gamma = 0.5;
  b.beta = 0.0;
  b.kappa = kappa;
  b.norm_b = 1.0;
  return b;
}

} // namespace heatctl
