#include "heatctl/simulation.hpp"

#include "heatctl/mp_real.hpp"

#include <cmath>

namespace heatctl {
namespace {

template <class F>
auto escalate(int modes, F&& f) {
  const unsigned start = suggested_digits(modes);
  for (std::size_t i = 0;; ++i) {
    const bool last = i + 1 == kPrecisionTiers.size();
    if (kPrecisionTiers[i] < start && !last)
      continue;
    try {
      return with_precision(kPrecisionTiers[i], f);
    } catch (const IllConditionedError&) {
      if (last)
        throw;
    }
  }
}

template <class Scalar>
TruncatedSystem<Scalar> build(const SimulationSpec& spec) {
  return build_system<Scalar>(spec.period, spec.modes, spec.potential, spec.control_set);
}

template <class Scalar>
std::vector<double> eigenvalues_of(const TruncatedSystem<Scalar>& sys) {
  std::vector<double> out;
  for (int j = 0; j < sys.dim; ++j)
    out.push_back(static_cast<double>(sys.eigenvalues(j)));
  return out;
}

void check_theta(const SimulationSpec& spec) {
  if (spec.theta && !(std::isfinite(*spec.theta) && *spec.theta > 0.5))
    throw ValidationError("theta", "must exceed 1/2");
}

} // namespace

double domination_defect(const SIBudget& budget, const std::vector<SpectralSample>& curve) {
  double worst = 0.0;
  for (const SpectralSample& p : curve) {
    const double x = std::sqrt(std::max(p.lambda - budget.kappa, 0.0));
    const double product = budget.d0 * std::exp(budget.d1 * x) * p.c_si;
    worst = std::max(worst, 1.0 - product);
  }
  return worst;
}

SpectralReport measure_spectral_inequality(const SimulationSpec& spec) {
  return escalate(spec.modes, [&](auto tag) {
    using Scalar = typename decltype(tag)::type;
    const TruncatedSystem<Scalar> sys = build<Scalar>(spec);
    SpectralReport r;
    r.digits = scalar_digits<Scalar>();
    r.eigenvalues = eigenvalues_of(sys);
    r.curve = csi_curve(sys, distinct_levels(sys));
    return r;
  });
}

double log_truncated_cost(const SimulationSpec& spec) {
  check_theta(spec);
  return escalate(spec.modes, [&](auto tag) {
    using Scalar = typename decltype(tag)::type;
    using std::log;
    TruncatedSystem<Scalar> sys = build<Scalar>(spec);
    if (spec.theta)
      sys = with_fractional_power(std::move(sys), *spec.theta);
    return static_cast<double>(log(true_cost_truncated(sys, spec.horizon)));
  });
}

SimulationReport simulate(const SimulationSpec& spec) {
  check_theta(spec);
  return escalate(spec.modes, [&](auto tag) {
    using Scalar = typename decltype(tag)::type;
    using std::log;
    TruncatedSystem<Scalar> sys = build<Scalar>(spec);
    SimulationReport r;
    r.digits = scalar_digits<Scalar>();
    r.mass_trace = static_cast<double>(sys.mass_matrix.trace());
    r.curve = csi_curve(sys, distinct_levels(sys));
    const double kappa = spec.fit_kappa.value_or(static_cast<double>(sys.eigenvalues(0)));
    r.budget = fit_budget(r.curve, kappa);
    if (spec.theta) {
      // Levels of (-Laplacian)^theta are lambda^theta: the same spectral
      // inequality in the new variable has exponent 1/(2 theta).
      sys = with_fractional_power(std::move(sys), *spec.theta);
      r.budget.gamma = 1.0 / (2.0 * *spec.theta);
      r.budget.kappa = std::pow(std::max(kappa, 0.0), *spec.theta);
    }
    r.eigenvalues = eigenvalues_of(sys);
    r.log_cost_sq = static_cast<double>(log(true_cost_truncated(sys, spec.horizon)));
    r.lower = lower_bound_log(r.budget, spec.horizon);
    r.upper = shifted_bound_log(r.budget, spec.horizon);
    r.sandwich = r.lower.log_cost_sq <= r.log_cost_sq + 1e-9 && r.log_cost_sq <= r.upper.log_cost_sq + 1e-9;
    return r;
  });
}

} // namespace heatctl
