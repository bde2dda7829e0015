#include "heatctl/cli.hpp"

#include "heatctl/bounds.hpp"
#include "heatctl/error.hpp"
#include "heatctl/experiments.hpp"
#include "heatctl/simulation.hpp"
#include "heatctl/spectral_maps.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numbers>
#include <ostream>
#include <sstream>

namespace heatctl::cli {
namespace {

using nlohmann::json;

enum class Kind { Real, Integer, RealList, Text, Potential };

struct Param {
  const char* name;
  Kind kind;
  json fallback; // null: optional without default
  const char* help;
};

const Param kGamma{"gamma", Kind::Real, 0.5, "spectral exponent in (0, 1)"};
const Param kD0{"d0", Kind::Real, 1.0, "spectral-inequality prefactor"};
const Param kD1{"d1", Kind::Real, 0.0, "spectral-inequality rate"};
const Param kBeta{"beta", Kind::Real, 0.0, "interpolation parameter (<= 0)"};
const Param kKappa{"kappa", Kind::Real, 0.0, "lower spectral bound"};
const Param kT{"T", Kind::Real, 1.0, "control horizon"};
const Param kNormB{"normB", Kind::Real, 1.0, "norm of the control operator"};
const Param kK1{"K1", Kind::Real, nullptr, "override for the constant K1"};
const Param kRho{"rho", Kind::Real, 0.5, "thickness density"};
const Param kA{"a", Kind::RealList, json::array({1.0}), "thickness scales, one per dimension"};
const Param kN{"N", Kind::Real, 1.0, "universal constant of the equidistributed inequality"};
const Param kC{"C", Kind::Real, std::numbers::e, "universal constant of the thick-set inequality"};
const Param kTheta{"theta", Kind::Real, nullptr, "fractional power (> 1/2)"};
const Param kG{"g", Kind::Real, 1.0, "cell size"};
const Param kDelta{"delta", Kind::Real, 0.25, "ball radius per cell"};
const Param kDim{"dim", Kind::Integer, 1, "space dimension"};
const Param kVNorm{"v_norm", Kind::Real, 0.0, "sup norm of V - kappa"};
const Param kL{"L", Kind::Real, 1.0, "torus length"};
const Param kModes{"K", Kind::Integer, 33, "retained Fourier modes (odd)"};
const Param kSet{"set", Kind::Text, nullptr, "control set, e.g. \"period 1; [0, 0.5)\""};
const Param kPotential{"potential", Kind::Potential, nullptr, "steps x:v,x:v (V = v from x on)"};
const Param kFitKappa{"fit_kappa", Kind::Real, nullptr, "kappa for the fitted budget"};
const Param kSteps{"steps", Kind::Integer, 20, "sweep steps"};
const Param kSimSteps{"sim_steps", Kind::Integer, 4, "rows that also run the simulator"};
const Param kT0{"T0", Kind::Real, 1.0, "horizon of the first row"};
const Param kVariant{"variant", Kind::Text, "thick", "thick or equi"};
const Param kSchedule{"schedule", Kind::Real, 4.0 / 3.0, "equi variant: T grows as 2^(schedule n)"};
const Param kTSmall{"T_small", Kind::Real, 1e-3, "stand-in for T -> 0"};
const Param kTLarge{"T_large", Kind::Real, 1e3, "stand-in for T -> infinity"};
const Param kTList{"T_list", Kind::RealList, json::array({1e-1, 1e-2, 1e-3, 1e-4}), "horizons"};
const Param kLambda{"lambda", Kind::RealList, json::array(), "eigenvalues for the feedback gains"};
const Param kMillerL{"L", Kind::Real, nullptr, "torus length (default 4 g)"};
const Param kOut{"out", Kind::Text, nullptr, "CSV output path"};

struct Command {
  const char* name;
  const char* help;
  std::vector<Param> params;
};

const std::vector<Command>& commands() {
  static const std::vector<Command> table{
      {"bound", "upper bounds on the squared control cost",
       {kGamma, kD0, kD1, kBeta, kKappa, kT, kNormB, kK1}},
      {"lower", "lower bounds on the squared control cost", {kKappa, kT, kNormB, kBeta}},
      {"full-control", "cost of control on the whole space", {kKappa, kT, kLambda}},
      {"budget-thick", "spectral budget and cost bound for a thick set", {kRho, kA, kN, kC, kT, kTheta}},
      {"budget-equi", "spectral budget and cost bound for an equidistributed set",
       {kG, kDelta, kDim, kVNorm, kKappa, kN, kC, kT}},
      {"simulate", "truncated torus model against the fitted bounds",
       {kL, kModes, kSet, kPotential, kT, kFitKappa, kTheta}},
      {"si-check", "measured spectral inequality and fitted budget", {kL, kModes, kSet, kPotential, kFitKappa}},
      {"sweep-homogenize", "bounds under shrinking control-set scale",
       {kRho, kA, kN, kC, kT, kSteps, kSet, kModes, kSimSteps, kOut}},
      {"sweep-dehomogenize", "bounds under growing control-set scale",
       {kVariant, kRho, kA, kTheta, kG, kDelta, kVNorm, kKappa, kSchedule, kN, kC, kT0, {"steps", Kind::Integer, 10, "sweep steps"}, kOut}},
      {"table1", "asymptotic regimes of the lower and upper bounds",
       {kGamma, kD0, kD1, kBeta, kKappa, kNormB, kTSmall, kTLarge, kOut}},
      {"miller", "small-time rate of the upper bound on a cell geometry",
       {kG, kMillerL, kSet, kTList, kN, kC, kOut}},
  };
  return table;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_real(const std::string& field, const std::string& text) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size())
    throw ValidationError(field, "not a number: '" + text + "'");
  return v;
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, sep)) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    if (b != std::string::npos)
      out.push_back(item.substr(b, e - b + 1));
  }
  return out;
}

json from_flag(const Param& p, const std::string& text) {
  switch (p.kind) {
  case Kind::Real:
    return parse_real(p.name, text);
  case Kind::Integer: {
    const double v = parse_real(p.name, text);
    if (v != std::floor(v) || std::abs(v) > 1e9)
      throw ValidationError(p.name, "must be an integer");
    return static_cast<long>(v);
  }
  case Kind::RealList: {
    json arr = json::array();
    for (const std::string& item : split(text, ','))
      arr.push_back(parse_real(p.name, item));
    return arr;
  }
  case Kind::Text:
    return text;
  case Kind::Potential: {
    json arr = json::array();
    for (const std::string& item : split(text, ',')) {
      const auto colon = item.find(':');
      if (colon == std::string::npos)
        throw ValidationError(p.name, "expected x:v pairs");
      arr.push_back({parse_real(p.name, item.substr(0, colon)), parse_real(p.name, item.substr(colon + 1))});
    }
    return arr;
  }
  }
  throw InternalError("unhandled parameter kind");
}

void check_config_value(const Param& p, const json& v) {
  const auto bad = [&](const char* what) { throw ValidationError(p.name, what); };
  switch (p.kind) {
  case Kind::Real:
    if (!v.is_number())
      bad("must be a number");
    break;
  case Kind::Integer:
    if (!v.is_number_integer())
      bad("must be an integer");
    break;
  case Kind::RealList:
    if (!v.is_array())
      bad("must be a list of numbers");
    for (const json& x : v)
      if (!x.is_number())
        bad("must be a list of numbers");
    break;
  case Kind::Text:
    if (!v.is_string())
      bad("must be a string");
    break;
  case Kind::Potential:
    if (!v.is_array())
      bad("must be a list of [x, v] pairs");
    for (const json& x : v)
      if (!x.is_array() || x.size() != 2 || !x[0].is_number() || !x[1].is_number())
        bad("must be a list of [x, v] pairs");
    break;
  }
}

// Validated parameter values for one subcommand.
class RunConfig {
public:
  RunConfig(const Command& cmd, std::map<std::string, json> values) : cmd_(cmd), values_(std::move(values)) {}

  const Command& command() const { return cmd_; }
  bool has(const std::string& name) const { return values_.count(name) > 0; }
  double real(const std::string& name) const { return values_.at(name).get<double>(); }
  int integer(const std::string& name) const { return values_.at(name).get<int>(); }
  std::string text(const std::string& name) const { return values_.at(name).get<std::string>(); }
  std::vector<double> reals(const std::string& name) const { return values_.at(name).get<std::vector<double>>(); }
  std::optional<double> maybe(const std::string& name) const {
    return has(name) ? std::optional<double>(real(name)) : std::nullopt;
  }
  const json& raw(const std::string& name) const { return values_.at(name); }

  void write_header(std::ostream& out) const {
    out << "# heatctl " << cmd_.name << '\n';
    for (const Param& p : cmd_.params) {
      if (!has(p.name) || p.kind == Kind::Text)
        continue;
      out << "# " << p.name << " = " << render(p) << '\n';
    }
  }

private:
  std::string render(const Param& p) const {
    const json& v = values_.at(p.name);
    switch (p.kind) {
    case Kind::Integer:
      return std::to_string(v.get<long>());
    case Kind::Real:
      return fmt(v.get<double>());
    case Kind::RealList: {
      std::string s;
      for (const json& x : v)
        s += (s.empty() ? "" : ",") + fmt(x.get<double>());
      return s;
    }
    case Kind::Potential: {
      std::string s;
      for (const json& x : v)
        s += (s.empty() ? "" : ",") + fmt(x[0].get<double>()) + ":" + fmt(x[1].get<double>());
      return s;
    }
    case Kind::Text:
      return v.get<std::string>();
    }
    return {};
  }

  const Command& cmd_;
  std::map<std::string, json> values_;
};

const Param* find_param(const Command& cmd, const std::string& name) {
  for (const Param& p : cmd.params)
    if (name == p.name)
      return &p;
  return nullptr;
}

std::map<std::string, json> read_config(const Command& cmd, const std::string& path) {
  std::ifstream in(path);
  if (!in)
    throw ValidationError("config", "cannot open '" + path + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError("config", e.what());
  }
  if (!doc.is_object())
    throw ValidationError("config", "must be a JSON object");
  std::map<std::string, json> out;
  for (const auto& [key, value] : doc.items()) {
    const Param* p = find_param(cmd, key);
    if (!p)
      throw ValidationError(key, "unknown key for '" + std::string(cmd.name) + "'");
    check_config_value(*p, value);
    out[key] = value;
  }
  return out;
}

// ---- reports

const char* verdict(bool ok) { return ok ? "PASS" : "FAIL"; }

void line(std::ostream& out, const char* key, double v) { out << key << " = " << fmt(v) << '\n'; }

void print_parts(std::ostream& out, const char* prefix, const CostParts& p) {
  out << prefix << "log_prefactor = " << fmt(p.log_prefactor) << '\n';
  out << prefix << "log_k1_power = " << fmt(p.log_k1_power) << '\n';
  out << prefix << "exponent_term = " << fmt(p.exponent_term) << '\n';
  out << prefix << "shift_term = " << fmt(p.shift_term) << '\n';
}

void print_bound(std::ostream& out, const char* name, const CostBound& b) {
  out << name << ".log_cost_sq = " << fmt(b.log_cost_sq) << '\n';
  if (b.t_star)
    out << name << ".t_star = " << fmt(*b.t_star) << '\n';
  if (b.parts)
    print_parts(out, (std::string(name) + ".").c_str(), *b.parts);
}

SIBudget budget_from(const RunConfig& c) {
  SIBudget b;
  b.gamma = c.real("gamma");
  b.d0 = c.real("d0");
  b.d1 = c.real("d1");
  b.beta = c.real("beta");
  b.kappa = c.real("kappa");
  b.norm_b = c.real("normB");
  if (c.has("K1"))
    b.k1_override = c.real("K1");
  b.validate();
  return b;
}

UniversalConstants constants_from(const RunConfig& c) {
  UniversalConstants u;
  u.n_nttv = c.real("N");
  u.c_kov = c.real("C");
  u.validate();
  return u;
}

ThickParams thick_from(const RunConfig& c) {
  ThickParams p;
  p.rho = c.real("rho");
  p.a = c.reals("a");
  p.dim = static_cast<int>(p.a.size());
  p.validate();
  return p;
}

SimulationSpec simulation_from(const RunConfig& c) {
  SimulationSpec s;
  s.period = c.real("L");
  if (!(std::isfinite(s.period) && s.period > 0.0))
    throw ValidationError("L", "must be positive");
  s.modes = c.integer("K");
  s.control_set = c.has("set") ? IntervalSet::parse(c.text("set")) : IntervalSet(s.period, {{0.0, s.period / 2.0}});
  if (s.control_set.period() != s.period)
    throw ValidationError("set", "period differs from L");
  if (c.has("potential")) {
    std::vector<std::pair<double, double>> steps;
    for (const json& x : c.raw("potential"))
      steps.emplace_back(x[0].get<double>(), x[1].get<double>());
    s.potential = PiecewisePotential(s.period, steps);
  } else {
    s.potential = PiecewisePotential::zero(s.period);
  }
  s.fit_kappa = c.maybe("fit_kappa");
  if (c.has("T"))
    s.horizon = c.real("T");
  if (c.has("theta"))
    s.theta = c.real("theta");
  return s;
}

int emit_sweep(const RunConfig& c, const SweepReport& rep, std::ostream& out) {
  const std::string csv = rep.to_csv();
  if (c.has("out")) {
    const std::string path = c.text("out");
    std::ofstream f(path, std::ios::binary);
    if (!f || !(f << csv))
      throw ValidationError("out", "cannot write '" + path + "'");
    out << "csv = " << path << '\n';
  } else {
    out << csv;
  }
  out << "rows = " << rep.rows.size() << '\n';
  out << "verdict = " << verdict(rep.passed()) << '\n';
  return rep.passed() ? 0 : 1;
}

int cmd_bound(const RunConfig& c, std::ostream& out) {
  const SIBudget b = budget_from(c);
  const double T = c.real("T");
  const LemmaParams lp = derived_params(b, T);
  line(out, "K1", lp.k1);
  line(out, "K2", lp.k2);
  line(out, "K3", lp.k3);
  SIBudget unshifted = b;
  unshifted.kappa = 0.0;
  print_bound(out, "series", series_bound_log(unshifted, T));
  print_bound(out, "closed_form", closed_form_bound_log(unshifted, T));
  const CostBound shifted = shifted_bound_log(b, T);
  print_bound(out, "shifted", shifted);
  line(out, "log_cost_sq", shifted.log_cost_sq);
  if (b.d1 == 0.0 && b.beta == 0.0)
    out << "note = d1 = 0 and beta = 0: the exponential factor is 1\n";
  return 0;
}

int cmd_lower(const RunConfig& c, std::ostream& out) {
  SIBudget b;
  b.kappa = c.real("kappa");
  b.norm_b = c.real("normB");
  b.beta = c.real("beta");
  const CorollaryBounds cb = corollary_lower_bounds(b, c.real("T"));
  line(out, "log_cost_sq", lower_bound_log(b, c.real("T")).log_cost_sq);
  line(out, "corollary.at_T", cb.at_horizon.log_cost_sq);
  line(out, "corollary.inf_over_T", cb.inf_over_horizon.log_cost_sq);
  return 0;
}

int cmd_full_control(const RunConfig& c, std::ostream& out) {
  const FullControlSolution s = full_control_cost(c.real("kappa"), c.real("T"));
  line(out, "cost_sq_u1", s.cost_sq_u1);
  line(out, "cost_sq_u2", s.cost_sq_u2);
  line(out, "log_cost_sq", std::log(std::max(s.cost_sq_u1, s.cost_sq_u2)));
  for (double lambda : c.reals("lambda"))
    out << "gain[" << fmt(lambda) << "] = " << fmt(s.static_gain(lambda)) << ' ' << fmt(s.adapted_gain(lambda))
        << '\n';
  return 0;
}

void print_budget(std::ostream& out, const SIBudget& b) {
  line(out, "budget.d0", b.d0);
  line(out, "budget.d1", b.d1);
  line(out, "budget.gamma", b.gamma);
  line(out, "budget.kappa", b.kappa);
}

int cmd_budget_thick(const RunConfig& c, std::ostream& out) {
  const ThickParams p = thick_from(c);
  const UniversalConstants u = constants_from(c);
  const double T = c.real("T");
  if (c.has("theta")) {
    print_budget(out, fractional_budget(p, c.real("theta"), u));
    print_bound(out, "bound", fractional_cost_bound(p, c.real("theta"), u, T));
  } else {
    print_budget(out, ls_budget(p, u));
    print_bound(out, "bound", thick_cost_bound(p, u, T));
  }
  return 0;
}

EquiParams equi_from(const RunConfig& c) {
  EquiParams p;
  p.g = c.real("g");
  p.delta = c.real("delta");
  if (c.has("dim"))
    p.dim = c.integer("dim");
  p.v_norm = c.real("v_norm");
  p.kappa = c.real("kappa");
  p.validate();
  return p;
}

int cmd_budget_equi(const RunConfig& c, std::ostream& out) {
  const EquiParams p = equi_from(c);
  const UniversalConstants u = constants_from(c);
  print_budget(out, nttv_budget(p, u));
  print_bound(out, "bound", equi_cost_bound(p, u, c.real("T")));
  return 0;
}

int cmd_simulate(const RunConfig& c, std::ostream& out) {
  const SimulationSpec spec = simulation_from(c);
  const SimulationReport r = simulate(spec);
  out << "set = " << spec.control_set.to_string() << '\n';
  out << "potential = " << spec.potential.to_string() << '\n';
  out << "digits = " << r.digits << '\n';
  line(out, "lambda1", r.eigenvalues.front());
  line(out, "log_truncated_cost_sq", r.log_cost_sq);
  print_budget(out, r.budget);
  line(out, "lower.log_cost_sq", r.lower.log_cost_sq);
  print_bound(out, "upper", r.upper);
  out << "sandwich = " << verdict(r.sandwich) << '\n';
  return r.sandwich ? 0 : 1;
}

int cmd_si_check(const RunConfig& c, std::ostream& out) {
  const SimulationSpec spec = simulation_from(c);
  const SpectralReport r = measure_spectral_inequality(spec);
  const double kappa = spec.fit_kappa.value_or(0.0);
  const SIBudget fit = fit_budget(r.curve, kappa);
  const SIBudget refit = fit_budget(r.curve, r.eigenvalues.front());
  out << "set = " << spec.control_set.to_string() << '\n';
  out << "potential = " << spec.potential.to_string() << '\n';
  out << "digits = " << r.digits << '\n';
  out << "# lambda c_si\n";
  for (const SpectralSample& p : r.curve)
    out << fmt(p.lambda) << ' ' << fmt(p.c_si) << '\n';
  print_budget(out, fit);
  const double defect = domination_defect(fit, r.curve);
  line(out, "defect", defect);
  line(out, "refit.kappa", refit.kappa);
  line(out, "refit.d0", refit.d0);
  line(out, "refit.d1", refit.d1);
  const bool ok = defect <= 1e-12 && fit.d1 >= 0.0;
  out << "dominated = " << verdict(ok) << '\n';
  return ok ? 0 : 1;
}

int cmd_sweep_homogenize(const RunConfig& c, std::ostream& out) {
  const UniversalConstants u = constants_from(c);
  if (c.has("set")) {
    SimulatorSettings sim;
    sim.modes = c.integer("K");
    sim.max_steps = c.integer("sim_steps");
    return emit_sweep(c, homogenization_sweep(IntervalSet::parse(c.text("set")), u, c.integer("steps"), c.real("T"), sim),
                      out);
  }
  return emit_sweep(c, homogenization_sweep(thick_from(c), u, c.integer("steps"), c.real("T")), out);
}

int cmd_sweep_dehomogenize(const RunConfig& c, std::ostream& out) {
  const UniversalConstants u = constants_from(c);
  const std::string variant = c.text("variant");
  if (variant == "thick")
    return emit_sweep(c, dehomogenization_sweep(thick_from(c), c.has("theta") ? c.real("theta") : 1.0, u,
                                                c.integer("steps"), c.real("T0")),
                      out);
  if (variant == "equi")
    return emit_sweep(c, equi_dehomogenization_sweep(equi_from(c), u, c.integer("steps"), c.real("T0"),
                                                     c.real("schedule")),
                      out);
  throw ValidationError("variant", "must be thick or equi");
}

int cmd_table1(const RunConfig& c, std::ostream& out) {
  RegimeHorizons h;
  h.small = c.real("T_small");
  h.large = c.real("T_large");
  return emit_sweep(c, table1_report(budget_from(c), UniversalConstants{}, h), out);
}

int cmd_miller(const RunConfig& c, std::ostream& out) {
  const double g = c.real("g");
  if (!(std::isfinite(g) && g > 0.0))
    throw ValidationError("g", "must be positive");
  const IntervalSet s = c.has("set") ? IntervalSet::parse(c.text("set")) : half_cells(c.has("L") ? c.real("L") : 4.0 * g, g);
  return emit_sweep(c, miller_diagnostic(s, g, c.reals("T_list"), constants_from(c)), out);
}

int dispatch(const RunConfig& c, std::ostream& out) {
  const std::string name = c.command().name;
  if (name == "bound")
    return cmd_bound(c, out);
  if (name == "lower")
    return cmd_lower(c, out);
  if (name == "full-control")
    return cmd_full_control(c, out);
  if (name == "budget-thick")
    return cmd_budget_thick(c, out);
  if (name == "budget-equi")
    return cmd_budget_equi(c, out);
  if (name == "simulate")
    return cmd_simulate(c, out);
  if (name == "si-check")
    return cmd_si_check(c, out);
  if (name == "sweep-homogenize")
    return cmd_sweep_homogenize(c, out);
  if (name == "sweep-dehomogenize")
    return cmd_sweep_dehomogenize(c, out);
  if (name == "table1")
    return cmd_table1(c, out);
  return cmd_miller(c, out);
}

} // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Control-cost bounds for the controlled heat equation", "heatctl"};
  app.require_subcommand(1);
  std::map<std::string, std::map<std::string, std::string>> flags;
  std::map<std::string, std::string> config_paths;
  for (const Command& cmd : commands()) {
    CLI::App* sub = app.add_subcommand(cmd.name, cmd.help);
    sub->add_option("--config", config_paths[cmd.name], "JSON file with parameter values");
    for (const Param& p : cmd.params)
      sub->add_option(std::string("--") + p.name, flags[cmd.name][p.name], p.help);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0)
      return app.exit(e, out, err);
    err << "error: " << e.what() << '\n';
    return 2;
  }

  try {
    const Command* cmd = nullptr;
    for (const Command& candidate : commands())
      if (app.got_subcommand(candidate.name))
        cmd = &candidate;
    CLI::App* sub = app.get_subcommand(cmd->name);

    std::map<std::string, json> values;
    if (sub->count("--config") > 0)
      values = read_config(*cmd, config_paths[cmd->name]);
    for (const Param& p : cmd->params)
      if (sub->count(std::string("--") + p.name) > 0)
        values[p.name] = from_flag(p, flags[cmd->name][p.name]);
    for (const Param& p : cmd->params)
      if (!values.count(p.name) && !p.fallback.is_null())
        values[p.name] = p.fallback;

    const RunConfig config(*cmd, std::move(values));
    std::ostringstream report;
    config.write_header(report);
    const int code = dispatch(config, report);
    out << report.str();
    return code;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const IllConditionedError& e) {
    err << "error: ill-conditioned: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return 1;
  }
}

} // namespace heatctl::cli
