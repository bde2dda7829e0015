#include "heatctl/experiments.hpp"

#include "heatctl/error.hpp"
#include "heatctl/simulation.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <limits>
#include <thread>

namespace heatctl {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void require(bool ok, const char* field, const char* what) {
  if (!ok)
    throw ValidationError(field, what);
}

template <class F>
void parallel_for(std::size_t n, F&& body) {
  const std::size_t workers = std::min<std::size_t>(worker_count(), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i)
      body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(n);
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          body(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  for (std::thread& t : pool)
    t.join();
  for (const std::exception_ptr& e : errors)
    if (e)
      std::rethrow_exception(e);
}

std::string format_number(double v) {
  if (std::isnan(v))
    return "";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void csv_field(std::string& out, const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) {
    out += s;
    return;
  }
  out += '"';
  for (char c : s) {
    if (c == '"')
      out += '"';
    out += c;
  }
  out += '"';
}

SweepRow make_row(std::string scenario, int index, const UniversalConstants& consts) {
  SweepRow r;
  r.scenario = std::move(scenario);
  r.index = index;
  r.consts = consts;
  return r;
}

// Value of the regime table cell: the bound evaluated at a prescribed time t
// instead of at the infimum.
double regime_cell(const SIBudget& b, double T, double t) {
  if (b.kappa == 0.0)
    return closed_form_bound_log(b, T).log_cost_sq;
  const double tau = b.kappa < 0.0 ? t : T - t;
  CostParts p = closed_form_parts(b, tau);
  p.shift_term = -2.0 * b.kappa * t;
  return p.total();
}

double regime_time(double kappa, double T, bool small) {
  if (kappa == 0.0)
    return T;
  if (small)
    return T / 2.0;
  if (kappa < 0.0)
    return std::min(-1.0 / kappa, T);
  return std::max(T - 1.0, T / 2.0);
}

void flag_nonincreasing(SweepReport& rep, const std::string& column) {
  for (std::size_t i = 0; i < rep.rows.size(); ++i) {
    const bool ok = i == 0 || rep.rows[i].value(column) <= rep.rows[i - 1].value(column);
    rep.rows[i].flags.push_back({"nonincreasing", ok});
  }
}

} // namespace

unsigned worker_count() {
  if (const char* env = std::getenv("HEATCTL_THREADS")) {
    char* end = nullptr;
    const long n = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && n > 0)
      return static_cast<unsigned>(n);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

double SweepRow::value(const std::string& name) const {
  for (const Column& c : values)
    if (c.name == name)
      return c.value;
  throw InternalError("no column " + name);
}

bool SweepRow::flag(const std::string& name) const {
  for (const Flag& f : flags)
    if (f.name == name)
      return f.pass;
  throw InternalError("no flag " + name);
}

bool SweepReport::passed() const {
  for (const SweepRow& r : rows)
    for (const Flag& f : r.flags)
      if (!f.pass)
        return false;
  return true;
}

std::string SweepReport::to_csv() const {
  std::string out = "scenario,index";
  if (rows.empty())
    return out + ",n_nttv,c_kov\n";
  for (const Column& c : rows.front().values)
    out += "," + c.name;
  out += ",n_nttv,c_kov";
  for (const Flag& f : rows.front().flags)
    out += "," + f.name;
  out += '\n';
  for (const SweepRow& r : rows) {
    csv_field(out, r.scenario);
    out += "," + std::to_string(r.index);
    for (const Column& c : r.values)
      out += "," + format_number(c.value);
    out += "," + format_number(r.consts.n_nttv) + "," + format_number(r.consts.c_kov);
    for (const Flag& f : r.flags)
      out += f.pass ? ",1" : ",0";
    out += '\n';
  }
  return out;
}

SweepReport table1_report(const SIBudget& budget, const UniversalConstants& consts,
                          const RegimeHorizons& horizons) {
  budget.validate();
  consts.validate();
  require(std::isfinite(horizons.small) && horizons.small > 0.0, "T_small", "must be positive");
  require(std::isfinite(horizons.large) && horizons.large > horizons.small, "T_large",
          "must exceed T_small");
  const double k = budget.kappa == 0.0 ? 1.0 : std::abs(budget.kappa);
  const double kappas[] = {-k, 0.0, k};

  SweepReport rep;
  int index = 0;
  for (double kappa : kappas) {
    for (bool small : {true, false}) {
      SIBudget b = budget;
      b.kappa = kappa;
      const double T = small ? horizons.small : horizons.large;
      const double t = regime_time(kappa, T, small);
      const CostBound lower = lower_bound_log(b, T);
      const CostBound upper = shifted_bound_log(b, T);
      const double cell = regime_cell(b, T, t);
      SweepRow r = make_row(small ? "small_T" : "large_T", index++, consts);
      r.values = {{"kappa", kappa},
                  {"T", T},
                  {"t_choice", t},
                  {"lower_log", lower.log_cost_sq},
                  {"upper_log", upper.log_cost_sq},
                  {"t_star", upper.t_star.value_or(T)},
                  {"cell_log", cell}};
      r.flags = {{"upper_le_cell", upper.log_cost_sq <= cell + 1e-9},
                 {"lower_le_upper", lower.log_cost_sq <= upper.log_cost_sq + 1e-9}};
      rep.rows.push_back(std::move(r));
    }
  }
  return rep;
}

SweepReport homogenization_sweep(const ThickParams& p, const UniversalConstants& consts, int steps,
                                 double horizon) {
  p.validate();
  consts.validate();
  require(steps >= 1 && steps <= 60, "steps", "must lie in [1, 60]");
  require(std::isfinite(horizon) && horizon > 0.0, "T", "must be positive");

  SweepReport rep;
  rep.rows.resize(steps + 1);
  parallel_for(rep.rows.size(), [&](std::size_t n) {
    ThickParams q = p;
    for (double& a : q.a)
      a = std::ldexp(a, -static_cast<int>(n));
    const SIBudget b = ls_budget(q, consts);
    SIBudget flat = b;
    flat.d1 = 0.0;
    const CostBound bound = closed_form_bound_log(b, horizon);
    SweepRow r = make_row("homogenize", static_cast<int>(n), consts);
    r.values = {{"a_l1", q.l1()},
                {"rho", q.rho},
                {"T", horizon},
                {"d0", b.d0},
                {"d1", b.d1},
                {"log_bound", bound.log_cost_sq},
                {"exponent_term", bound.parts->exponent_term},
                {"limit_log", closed_form_bound_log(flat, horizon).log_cost_sq}};
    rep.rows[n] = std::move(r);
  });
  flag_nonincreasing(rep, "log_bound");
  for (SweepRow& r : rep.rows) {
    const bool final = &r == &rep.rows.back();
    const bool applies = final && r.value("d1") < 1e-6;
    r.flags.push_back({"limit_reached", !applies || std::abs(r.value("log_bound") - r.value("limit_log")) <= 1e-9});
  }
  return rep;
}

SweepReport homogenization_sweep(const IntervalSet& tmpl, const UniversalConstants& consts, int steps,
                                 double horizon, const SimulatorSettings& sim) {
  consts.validate();
  require(steps >= 1 && steps <= 24, "steps", "must lie in [1, 24]");
  require(std::isfinite(horizon) && horizon > 0.0, "T", "must be positive");
  require(sim.max_steps >= 0, "sim_steps", "must be nonnegative");

  SweepReport rep;
  rep.rows.resize(steps + 1);
  parallel_for(rep.rows.size(), [&](std::size_t n) {
    const IntervalSet s = homogenize(tmpl, static_cast<int>(n));
    ThickParams q;
    q.a = {std::ldexp(tmpl.period(), -static_cast<int>(n))};
    q.rho = max_thickness(s, q.a[0]);
    const SIBudget b = ls_budget(q, consts);
    SIBudget flat = b;
    flat.d1 = 0.0;
    const CostBound bound = closed_form_bound_log(b, horizon);
    const double lower = lower_bound_log(SIBudget{}, horizon).log_cost_sq;

    double truncated = kNaN;
    if (static_cast<int>(n) <= sim.max_steps) {
      SimulationSpec spec;
      spec.period = tmpl.period();
      spec.modes = sim.modes;
      spec.potential = PiecewisePotential::zero(tmpl.period());
      spec.control_set = s;
      spec.horizon = horizon;
      truncated = log_truncated_cost(spec);
    }
    SweepRow r = make_row("homogenize", static_cast<int>(n), consts);
    r.values = {{"a_l1", q.a[0]},
                {"rho", q.rho},
                {"T", horizon},
                {"d0", b.d0},
                {"d1", b.d1},
                {"log_bound", bound.log_cost_sq},
                {"exponent_term", bound.parts->exponent_term},
                {"limit_log", closed_form_bound_log(flat, horizon).log_cost_sq},
                {"lower_log", lower},
                {"log_truncated", truncated}};
    r.flags = {{"sandwich", std::isnan(truncated) ||
                                (lower <= truncated + 1e-9 && truncated <= bound.log_cost_sq + 1e-9)}};
    rep.rows[n] = std::move(r);
  });
  flag_nonincreasing(rep, "log_bound");
  for (SweepRow& r : rep.rows) {
    const bool applies = &r == &rep.rows.back() && r.value("d1") < 1e-6;
    r.flags.push_back({"limit_reached", !applies || std::abs(r.value("log_bound") - r.value("limit_log")) <= 1e-9});
  }
  return rep;
}

SweepReport dehomogenization_sweep(const ThickParams& p, double theta, const UniversalConstants& consts,
                                   int steps, double horizon0) {
  p.validate();
  consts.validate();
  require(std::isfinite(theta) && theta > 0.5, "theta", "must exceed 1/2");
  require(steps >= 1 && steps <= 60, "steps", "must lie in [1, 60]");
  require(std::isfinite(horizon0) && horizon0 > 0.0, "T0", "must be positive");

  SweepReport rep;
  rep.rows.resize(steps + 1);
  std::vector<CostParts> parts(steps + 1);
  parallel_for(rep.rows.size(), [&](std::size_t n) {
    ThickParams q = p;
    for (double& a : q.a)
      a = std::ldexp(a, static_cast<int>(n));
    const double T = horizon0 * std::exp2(2.0 * theta * static_cast<double>(n));
    const CostBound bound = fractional_cost_bound(q, theta, consts, T);
    parts[n] = *bound.parts;
    SweepRow r = make_row("dehomogenize", static_cast<int>(n), consts);
    r.values = {{"theta", theta},
                {"a_l1", q.l1()},
                {"T", T},
                {"d1", fractional_budget(q, theta, consts).d1},
                {"log_bound", bound.log_cost_sq},
                {"log_prefactor", parts[n].log_prefactor},
                {"log_k1_power", parts[n].log_k1_power},
                {"exponent_term", parts[n].exponent_term}};
    rep.rows[n] = std::move(r);
  });
  const CostParts& first = parts.front();
  for (std::size_t n = 0; n < rep.rows.size(); ++n) {
    SweepRow& r = rep.rows[n];
    // The difference to row 0 is taken part by part: the totals themselves
    // are too large for a 1e-9 comparison in double precision.
    const double drift = (parts[n].log_prefactor - first.log_prefactor) +
                         (parts[n].log_k1_power - first.log_k1_power) +
                         (parts[n].exponent_term - first.exponent_term);
    const double expected = -std::log(r.value("T") / horizon0);
    r.values.push_back({"drift", drift});
    r.values.push_back({"expected_drift", expected});
    r.flags = {{"exponent_invariant", std::abs(parts[n].exponent_term - first.exponent_term) <= 1e-9},
               {"drift_matches", std::abs(drift - expected) <= 1e-9}};
  }
  return rep;
}

SweepReport equi_dehomogenization_sweep(const EquiParams& p, const UniversalConstants& consts, int steps,
                                        double horizon0, double schedule) {
  p.validate();
  consts.validate();
  require(steps >= 1 && steps <= 60, "steps", "must lie in [1, 60]");
  require(std::isfinite(horizon0) && horizon0 > 0.0, "T0", "must be positive");
  require(std::isfinite(schedule) && schedule > 0.0, "schedule", "must be positive");

  SweepReport rep;
  rep.rows.resize(steps + 1);
  parallel_for(rep.rows.size(), [&](std::size_t n) {
    EquiParams q = p;
    q.g = std::ldexp(p.g, static_cast<int>(n));
    q.delta = std::ldexp(p.delta, static_cast<int>(n));
    const double T = horizon0 * std::exp2(schedule * static_cast<double>(n));
    const CostBound bound = equi_cost_bound(q, consts, T);
    SweepRow r = make_row("dehomogenize_equi", static_cast<int>(n), consts);
    r.values = {{"g", q.g},
                {"delta", q.delta},
                {"kappa", q.kappa},
                {"T", T},
                {"log_bound", bound.log_cost_sq},
                {"t_star", bound.t_star.value_or(T)},
                {"exponent_term", bound.parts->exponent_term},
                {"shift_term", bound.parts->shift_term}};
    rep.rows[n] = std::move(r);
  });
  return rep;
}

SweepReport miller_diagnostic(const IntervalSet& s, double g, const std::vector<double>& horizons,
                              const UniversalConstants& consts) {
  consts.validate();
  require(!horizons.empty(), "T_list", "must not be empty");
  for (double T : horizons)
    require(std::isfinite(T) && T > 0.0, "T_list", "times must be positive");
  EquiParams ep;
  ep.g = g;
  ep.delta = std::min(equidistribution_radius(s, g), g / 2.0);
  require(ep.delta > 0.0, "set", "must meet every g-cell");
  const SIBudget b = nttv_budget(ep, consts);
  const double limit = derived_params(b, horizons.front()).c3 * b.d1 * b.d1 / 2.0;
  const double radius = miller_radius(s);
  const double radius_term = radius * radius / 4.0;

  SweepReport rep;
  double smallest = horizons.front();
  for (double T : horizons)
    smallest = std::min(smallest, T);
  for (std::size_t i = 0; i < horizons.size(); ++i) {
    const double T = horizons[i];
    const double phi = T * closed_form_bound_log(b, T).log_cost_sq / 2.0;
    const double gap = std::abs(phi - limit) / limit;
    SweepRow r = make_row("miller", static_cast<int>(i), consts);
    r.values = {{"g", g},       {"delta", ep.delta}, {"T", T},          {"d1", b.d1},
                {"phi", phi},   {"limit", limit},    {"rel_gap", gap},  {"radius_term", radius_term}};
    const bool approaching = i == 0 || gap <= rep.rows[i - 1].value("rel_gap") ||
                             T > rep.rows[i - 1].value("T");
    r.flags = {{"approaching", approaching},
               {"radius_below_limit", radius_term <= limit},
               {"within_1pct", T != smallest || gap <= 0.01}};
    rep.rows.push_back(std::move(r));
  }
  return rep;
}

} // namespace heatctl
