#include "oracles.hpp"

#include "heatctl/bounds.hpp"
#include "heatctl/error.hpp"
#include "heatctl/log_domain.hpp"
#include "heatctl/minimize.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

using namespace heatctl;

namespace {

SIBudget budget(double gamma, double d0, double d1, double beta, double kappa = 0.0, double norm_b = 1.0) {
  SIBudget b;
  b.gamma = gamma;
  b.d0 = d0;
  b.d1 = d1;
  b.beta = beta;
  b.kappa = kappa;
  b.norm_b = norm_b;
  return b;
}

bool rel_close(double a, double b, double tol) { return std::abs(a - b) <= tol * std::max(std::abs(a), std::abs(b)); }

} // namespace

TEST_SUITE("bounds") {

TEST_CASE("log-domain helpers") {
  const double xs[] = {1000.0, 1000.0 + std::log(3.0), -std::numeric_limits<double>::infinity()};
  CHECK(log_sum_exp(xs) == doctest::Approx(1000.0 + std::log(4.0)).epsilon(1e-15));
  LogSumAccumulator acc;
  CHECK(acc.value() == -std::numeric_limits<double>::infinity());
  acc.add(-800.0);
  acc.add(-800.0);
  CHECK(acc.value() == doctest::Approx(-800.0 + std::log(2.0)).epsilon(1e-15));
  CHECK(log_decay_rate(1.0, 1.0) == doctest::Approx(std::log(2.0 / (std::exp(2.0) - 1.0))).epsilon(1e-14));
  CHECK(log_decay_rate(0.0, 4.0) == doctest::Approx(-std::log(4.0)));
  CHECK(log_decay_rate(-1.0, 1000.0) == doctest::Approx(std::log(2.0)).epsilon(1e-14));
  CHECK(log_decay_rate(1e3, 10.0) == doctest::Approx(std::log(2e3) - 2e4).epsilon(1e-14));
}

TEST_CASE("log-grid minimization refines past the grid") {
  const auto f = [](double t) { return -std::log(t) + 2.0 * t; };
  const Minimum m = minimize_log_grid(f, 1e-6, 10.0);
  CHECK(m.argmin == doctest::Approx(0.5).epsilon(1e-8));
  CHECK(m.value == doctest::Approx(std::log(2.0) + 1.0).epsilon(1e-14));
  const Minimum edge = minimize_log_grid([](double t) { return t; }, 1.0, 2.0);
  CHECK(edge.argmin == 1.0);
}

TEST_CASE("derived parameters at gamma 1/2, d1 = 0") {
  const LemmaParams p = derived_params(budget(0.5, 1.0, 0.0, 0.0), 1.0);
  CHECK(p.theta == doctest::Approx(0.5));
  CHECK(p.alpha == doctest::Approx(128.0));
  CHECK(p.c_theta == 0.0);
  CHECK(p.ecap == 0.0);
  CHECK(p.c4 == doctest::Approx(1.5));
  CHECK(p.k1 == doctest::Approx(3.0));
  const double d = std::sqrt(384.0 * std::log(12.0));
  CHECK(p.dcap == doctest::Approx(d).epsilon(1e-14));
  CHECK(p.nu == doctest::Approx(d * d).epsilon(1e-14));
  CHECK(p.k2 == doctest::Approx(p.nu / 4.0).epsilon(1e-13));
  CHECK(p.k3 == doctest::Approx(p.k2 / 31.0).epsilon(1e-13));
}

TEST_CASE("derived parameters agree with the printed formulas") {
  for (double g : {0.2, 0.3, 0.5, 0.7, 0.85})
    for (double d0 : {1.0, 10.0})
      for (double d1 : {0.0, 0.5, 10.0})
        for (double beta : {0.0, -1.0, -3.0})
          for (double T : {0.01, 1.0, 100.0}) {
            CAPTURE(g);
            CAPTURE(d1);
            CAPTURE(beta);
            CAPTURE(T);
            const LemmaParams p = derived_params(budget(g, d0, d1, beta, 0.0, 2.0), T);
            const oracle::Constants o = oracle::literal_constants(g, d0, d1, beta, 2.0, T);
            CHECK(rel_close(p.theta, o.theta, 1e-14));
            CHECK(rel_close(p.alpha, o.alpha, 1e-14));
            CHECK(rel_close(p.c_theta, o.c_theta, 1e-13));
            CHECK(rel_close(p.dcap, o.dcap, 1e-13));
            CHECK(rel_close(p.ecap, o.ecap, 1e-12));
            CHECK(rel_close(p.nu, o.nu, 1e-12));
            CHECK(rel_close(p.k1, o.k1, 1e-15));
            CHECK(rel_close(p.k2, o.k2, 1e-8));
            CHECK(rel_close(p.k3, o.k3, 1e-6));
            CHECK(rel_close(p.c2, o.c2, 1e-13));
            CHECK(rel_close(p.c3, o.c3, 1e-13));
            CHECK(p.c4 == o.c4);
            CHECK(p.log_c1 == doctest::Approx(o.log_c1_full_without_4c2));
            CHECK(std::pow(4.0, p.theta + 1.0) <= p.alpha);
            CHECK(std::pow(p.alpha, g) <= p.alpha / 4.0);
            CHECK(p.k2 > 0.0);
            CHECK(p.k3 > 0.0);
            const double charge = std::pow(2.0, p.theta + 2.0) * p.c_theta * std::pow(T, -p.theta) +
                                  d1 * std::pow(p.nu, g) * p.alpha;
            CHECK(p.nu * T > charge);
          }
}

TEST_CASE("budget validation names the field") {
  const auto field_of = [](const SIBudget& b) {
    try {
      derived_params(b, 1.0);
    } catch (const ValidationError& e) {
      return e.field();
    }
    return std::string();
  };
  CHECK(field_of(budget(0.0, 1, 0, 0)) == "gamma");
  CHECK(field_of(budget(1.0, 1, 0, 0)) == "gamma");
  CHECK(field_of(budget(0.5, 0, 0, 0)) == "d0");
  CHECK(field_of(budget(0.5, 1, -1, 0)) == "d1");
  CHECK(field_of(budget(0.5, 1, 0, 0.5)) == "beta");
  CHECK(field_of(budget(0.5, 1, 0, 0, 0, 0)) == "normB");
  SIBudget k = budget(0.5, 1, 0, 0);
  k.k1_override = 1.0;
  CHECK(field_of(k) == "K1");
  CHECK_THROWS_AS(closed_form_bound_log(budget(0.5, 1, 0, 0), 0.0), ValidationError);
  CHECK_THROWS_AS(lower_bound_log(budget(0.5, 1, 0, 0), -1.0), ValidationError);
}

TEST_CASE("K1 override replaces the computed constant") {
  SIBudget b = budget(0.5, 1.0, 0.0, 0.0);
  b.k1_override = 7.0;
  CHECK(derived_params(b, 1.0).k1 == 7.0);
  const CostBound c = closed_form_bound_log(b, 1.0);
  CHECK(c.parts->log_k1_power == doctest::Approx(derived_params(b, 1.0).c2 * std::log(28.0)));
}

TEST_CASE("series matches a 50-digit summation") {
  for (double g : {0.3, 0.5, 0.7})
    for (double d1 : {0.0, 1.0})
      for (double beta : {0.0, -1.0})
        for (double T : {0.01, 1.0, 100.0}) {
          CAPTURE(g);
          CAPTURE(d1);
          CAPTURE(beta);
          CAPTURE(T);
          const double ours = series_bound_log(budget(g, 1.0, d1, beta), T).log_cost_sq;
          const double ref = oracle::series_sum(g, 1.0, d1, beta, 1.0, T);
          CHECK(std::abs(ours - ref) <= 1e-9 * std::max(1.0, std::abs(ref)));
        }
}

TEST_CASE("series is dominated by the closed form") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int i = 0; i < 300; ++i) {
    const double g = 0.05 + 0.9 * unit(rng);
    const SIBudget b = budget(g, std::exp(5 * unit(rng)), 20 * unit(rng) * unit(rng), -4 * unit(rng) * unit(rng));
    const double T = std::exp(-6 + 12 * unit(rng));
    CAPTURE(g);
    CAPTURE(T);
    CHECK(series_bound_log(b, T).log_cost_sq <= closed_form_bound_log(b, T).log_cost_sq + 1e-9);
  }
}

TEST_CASE("series head term for d1 = 0") {
  const double T = 2.0;
  const double v = series_bound_log(budget(0.5, 3.0, 0.0, 0.0), T).log_cost_sq;
  CHECK(v >= std::log(4.0 * 3.0 / T));
}

TEST_CASE("closed form agrees with the printed formula") {
  for (double g : {0.3, 0.5, 0.7})
    for (double d1 : {0.0, 1.0, 10.0})
      for (double beta : {0.0, -1.0})
        for (double T : {0.01, 1.0, 100.0}) {
          const CostBound c = closed_form_bound_log(budget(g, 10.0, d1, beta), T);
          const double ref = oracle::literal_closed_form(g, 10.0, d1, beta, 1.0, T);
          CHECK(rel_close(c.log_cost_sq, ref, 1e-13));
          const CostParts& p = *c.parts;
          CHECK(c.log_cost_sq == p.log_prefactor + p.log_k1_power + p.exponent_term + p.shift_term);
          CHECK(p.exponent_term >= 0.0);
        }
}

TEST_CASE("closed form special cases") {
  const CostBound flat = closed_form_bound_log(budget(0.5, 2.0, 0.0, 0.0), 3.0);
  const LemmaParams p = derived_params(budget(0.5, 2.0, 0.0, 0.0), 3.0);
  CHECK(flat.parts->exponent_term == 0.0);
  CHECK(flat.log_cost_sq == doctest::Approx(p.log_c1 + p.c2 * std::log(4.0) + std::log(2.0 / 3.0) +
                                             p.c2 * std::log(p.k1))
                                .epsilon(1e-15));

  const CostBound half = closed_form_bound_log(budget(0.5, 1.0, 0.7, 0.0), 0.3);
  CHECK(half.parts->exponent_term == doctest::Approx(p.c3 * 0.49 / 0.3).epsilon(1e-13));

  const CostBound t1 = closed_form_bound_log(budget(0.4, 5.0, 0.0, 0.0), 1.5);
  const CostBound t2 = closed_form_bound_log(budget(0.4, 5.0, 0.0, 0.0), 3.0);
  CHECK(t1.parts->log_prefactor - t2.parts->log_prefactor == doctest::Approx(std::log(2.0)).epsilon(1e-14));
  CHECK(t1.parts->log_k1_power == t2.parts->log_k1_power);
  CHECK(std::abs((t1.log_cost_sq - t2.log_cost_sq) - std::log(2.0)) <= 1e-7);
}

TEST_CASE("scaling d0 moves only the prefactor and the K1 power") {
  const SIBudget a = budget(0.5, 2.0, 1.0, 0.0);
  const SIBudget b = budget(0.5, 6.0, 1.0, 0.0);
  const CostParts pa = *closed_form_bound_log(a, 1.0).parts;
  const CostParts pb = *closed_form_bound_log(b, 1.0).parts;
  CHECK(pb.log_prefactor - pa.log_prefactor == doctest::Approx(std::log(3.0)).epsilon(1e-14));
  const double c2 = derived_params(a, 1.0).c2;
  CHECK(pb.log_k1_power - pa.log_k1_power == doctest::Approx(c2 * std::log(b.k1() / a.k1())).epsilon(1e-10));
  CHECK(pb.exponent_term == pa.exponent_term);
}

TEST_CASE("shifted bound at kappa = 0 is the closed form") {
  const SIBudget b = budget(0.6, 2.0, 3.0, -0.5);
  CHECK(shifted_bound_log(b, 0.7).log_cost_sq == closed_form_bound_log(b, 0.7).log_cost_sq);
}

TEST_CASE("shifted bound finds the interior optimum") {
  const SIBudget b = budget(0.5, 1.0, 0.0, 0.0, -1.0);
  const CostBound c = shifted_bound_log(b, 10.0);
  REQUIRE(c.t_star);
  double argmin = 0.0;
  const auto objective = [&](double t) { return closed_form_parts(b, t).total() + 2.0 * t; };
  const double ref = oracle::dense_grid_min(objective, 1e-5, 10.0, 1000000, &argmin);
  CHECK(*c.t_star == doctest::Approx(0.5).epsilon(1e-3));
  CHECK(argmin == doctest::Approx(0.5).epsilon(1e-4));
  CHECK(c.log_cost_sq <= ref + 1e-9);
  CHECK(c.parts->shift_term == doctest::Approx(2.0 * *c.t_star));
}

TEST_CASE("shifted bound never exceeds the objective on a dense grid") {
  for (double kappa : {-3.0, -0.2, 0.4, 5.0})
    for (double T : {0.05, 1.0, 20.0}) {
      const SIBudget b = budget(0.5, 2.0, 0.3, 0.0, kappa);
      const CostBound c = shifted_bound_log(b, T);
      REQUIRE(c.t_star);
      const auto objective = [&](double t) {
        const double tau = kappa < 0 ? t : T - t;
        return closed_form_parts(b, tau).total() - 2.0 * kappa * t;
      };
      const double lo = kappa < 0 ? T * 1e-6 : 0.0;
      const double hi = kappa < 0 ? T : T * (1 - 1e-6);
      CHECK(c.log_cost_sq <= oracle::dense_grid_min(objective, lo, hi, 20001) + 1e-9);
      if (kappa < 0) {
        CHECK(*c.t_star > 0.0);
        CHECK(*c.t_star <= T);
      } else {
        CHECK(*c.t_star >= 0.0);
        CHECK(*c.t_star < T);
      }
    }
}

TEST_CASE("shifted bound with kappa < 0 does not grow with T") {
  const SIBudget b = budget(0.5, 1.0, 0.2, 0.0, -0.5);
  double prev = std::numeric_limits<double>::infinity();
  for (double T : {0.1, 0.5, 1.0, 2.0, 5.0, 50.0}) {
    const double v = shifted_bound_log(b, T).log_cost_sq;
    CHECK(v <= prev + 1e-9);
    prev = v;
  }
}

TEST_CASE("lower bound values") {
  CHECK(lower_bound_log(budget(0.5, 1, 0, 0, 0.0), 4.0).log_cost_sq == doctest::Approx(std::log(0.25)));
  CHECK(lower_bound_log(budget(0.5, 1, 0, 0, 1.0), 1.0).log_cost_sq ==
        doctest::Approx(std::log(2.0 / (std::exp(2.0) - 1.0))).epsilon(1e-14));
  CHECK(lower_bound_log(budget(0.5, 1, 0, 0, 0.0, 2.0), 1.0).log_cost_sq == doctest::Approx(std::log(0.25)));
  CHECK(lower_bound_log(budget(0.5, 1, 0, -1.0, 2.0), 1.0).log_cost_sq ==
        doctest::Approx(-std::log(5.0) + std::log(4.0 / (std::exp(4.0) - 1.0))).epsilon(1e-14));
  const double at0 = lower_bound_log(budget(0.5, 1, 0, 0, 0.0), 3.0).log_cost_sq;
  const double near = lower_bound_log(budget(0.5, 1, 0, 0, 1e-12), 3.0).log_cost_sq;
  const double across = lower_bound_log(budget(0.5, 1, 0, 0, 1e-7), 3.0).log_cost_sq;
  CHECK(near == doctest::Approx(at0).epsilon(1e-11));
  CHECK(across == doctest::Approx(std::log(2e-7 / std::expm1(6e-7))).epsilon(1e-13));
}

TEST_CASE("corollary lower bounds") {
  const CorollaryBounds neg = corollary_lower_bounds(budget(0.5, 1, 0, 0, -1.0), 1.0);
  CHECK(neg.at_horizon.log_cost_sq == doctest::Approx(std::log(1.5)));
  CHECK(neg.inf_over_horizon.log_cost_sq == doctest::Approx(std::log(2.0)));
  const CorollaryBounds zero = corollary_lower_bounds(budget(0.5, 1, 0, 0, 0.0), 5.0);
  CHECK(zero.at_horizon.log_cost_sq == doctest::Approx(-std::log(5.0)));
  CHECK(zero.inf_over_horizon.log_cost_sq == -std::numeric_limits<double>::infinity());
  const CorollaryBounds pos = corollary_lower_bounds(budget(0.5, 1, 0, 0, 1.0), 1.0);
  CHECK(pos.at_horizon.log_cost_sq == doctest::Approx(-2.0));
  CHECK(pos.inf_over_horizon.log_cost_sq == -std::numeric_limits<double>::infinity());
}

TEST_CASE("full control cost and gains") {
  const FullControlSolution z = full_control_cost(0.0, 2.0);
  CHECK(z.cost_sq_u2 == doctest::Approx(0.5));
  CHECK(z.cost_sq_u1 == z.cost_sq_u2);
  CHECK(z.static_gain(0.0) == doctest::Approx(-0.5));
  CHECK(z.adapted_gain(0.0) == doctest::Approx(-0.5));

  const FullControlSolution one = full_control_cost(1.0, 1.0);
  CHECK(one.cost_sq_u2 == doctest::Approx(2.0 / (std::exp(2.0) - 1.0)).epsilon(1e-14));
  CHECK(one.cost_sq_u2 == doctest::Approx(0.31304).epsilon(1e-5));
  CHECK(one.cost_sq_u1 == doctest::Approx(1.0 / std::pow(std::exp(1.0) - 1.0, 2)).epsilon(1e-14));
  CHECK(one.adapted_gain(3.0) == doctest::Approx(-6.0 / (std::exp(6.0) - 1.0)).epsilon(1e-14));
  CHECK(one.static_gain(3.0) == doctest::Approx(-3.0 / (std::exp(3.0) - 1.0)).epsilon(1e-14));

  for (double kappa : {-2.0, -1e-9, 0.5, 4.0})
    for (double T : {0.1, 1.0, 10.0}) {
      const FullControlSolution s = full_control_cost(kappa, T);
      CHECK(s.cost_sq_u2 <= s.cost_sq_u1 * (1 + 1e-14));
      CHECK(std::log(s.cost_sq_u2) == doctest::Approx(lower_bound_log(budget(0.5, 1, 0, 0, kappa), T).log_cost_sq)
                                          .epsilon(1e-13));
    }
}

TEST_CASE("ordering and monotonicity in T") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int i = 0; i < 40; ++i) {
    const SIBudget b = budget(0.1 + 0.8 * unit(rng), 1 + 9 * unit(rng), 3 * unit(rng), -unit(rng),
                              -4 + 8 * unit(rng), 0.5 + unit(rng));
    double prev_closed = std::numeric_limits<double>::infinity();
    double prev_lower = std::numeric_limits<double>::infinity();
    for (double T : {0.01, 0.1, 1.0, 10.0}) {
      const double lower = lower_bound_log(b, T).log_cost_sq;
      CHECK(lower <= shifted_bound_log(b, T).log_cost_sq);
      const double closed = closed_form_bound_log(b, T).log_cost_sq;
      CHECK(closed <= prev_closed);
      CHECK(lower <= prev_lower + 1e-12);
      prev_closed = closed;
      prev_lower = lower;
    }
  }
}

} // TEST_SUITE
