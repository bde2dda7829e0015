#include "heatctl/cli.hpp"
#include "heatctl/experiments.hpp"

#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "heatctl");
  std::vector<const char*> argv;
  for (const std::string& a : args)
    argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = heatctl::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("heatctl_test_" + name)).string();
}

std::string write_file(const std::string& name, const std::string& text) {
  const std::string path = temp_path(name);
  std::ofstream(path) << text;
  return path;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool has(const std::string& text, const std::string& piece) { return text.find(piece) != std::string::npos; }

} // namespace

TEST_SUITE("cli") {

TEST_CASE("bound with a vanishing rate") {
  const Result r = run({"bound", "--gamma", "0.5", "--d0", "1", "--d1", "0", "--beta", "0", "--T", "1", "--normB", "1"});
  CHECK(r.code == 0);
  CHECK(has(r.out, "# heatctl bound\n"));
  CHECK(has(r.out, "# normB = 1\n"));
  CHECK(has(r.out, "# gamma = 0.5\n"));
  CHECK(has(r.out, "closed_form.exponent_term = 0\n"));
  CHECK(has(r.out, "\nlog_cost_sq = "));
  CHECK(has(r.out, "note = "));
}

TEST_CASE("lower bound at kappa = 0") {
  const Result r = run({"lower", "--kappa", "0", "--T", "4"});
  CHECK(r.code == 0);
  char expect[64];
  std::snprintf(expect, sizeof expect, "\nlog_cost_sq = %.17g\n", std::log(0.25));
  CHECK(has(r.out, expect));
}

TEST_CASE("every subcommand runs with its defaults") {
  for (const char* cmd : {"bound", "lower", "full-control", "budget-thick", "budget-equi", "simulate", "si-check",
                          "sweep-homogenize", "sweep-dehomogenize", "table1", "miller"}) {
    CAPTURE(cmd);
    const Result r = run({cmd});
    CHECK(r.code == 0);
    CHECK(r.err.empty());
    CHECK(has(r.out, std::string("# heatctl ") + cmd));
  }
}

TEST_CASE("simulate from a config file") {
  const std::string cfg = write_file("sim.json", R"j({"L": 1, "K": 33, "set": "period 1; [0, 0.5)", "T": 0.2})j");
  const Result r = run({"simulate", "--config", cfg});
  CHECK(r.code == 0);
  CHECK(has(r.out, "sandwich = PASS"));
  CHECK(has(r.out, "# K = 33\n"));
  CHECK(has(r.out, "# T = 0.20000000000000001\n"));
  const Result again = run({"simulate", "--config", cfg});
  CHECK(again.out == r.out);
  const Result over = run({"simulate", "--config", cfg, "--T", "1"});
  CHECK(has(over.out, "# T = 1\n"));
}

TEST_CASE("potentials from flags and config agree") {
  const std::string cfg = write_file("pot.json", R"({"K": 17, "potential": [[0, 5], [0.3, -5]]})");
  const Result a = run({"si-check", "--config", cfg});
  const Result b = run({"si-check", "--K", "17", "--potential", "0:5, 0.3:-5"});
  CHECK(a.code == 0);
  CHECK(a.out == b.out);
  CHECK(has(a.out, "dominated = PASS"));
}

TEST_CASE("invalid input exits with 2 and names the field") {
  Result r = run({"bound", "--gamma", "1.5"});
  CHECK(r.code == 2);
  CHECK(has(r.err, "gamma"));
  r = run({"bound", "--d0", "abc"});
  CHECK(r.code == 2);
  CHECK(has(r.err, "d0"));
  r = run({"simulate", "--K", "32"});
  CHECK(r.code == 2);
  CHECK(has(r.err, "K"));
  r = run({"simulate", "--K", "3.5"});
  CHECK(r.code == 2);
  r = run({"simulate", "--set", "period 2; [0, 1)"});
  CHECK(r.code == 2);
  CHECK(has(r.err, "set"));
  r = run({"frobnicate"});
  CHECK(r.code == 2);
  r = run({});
  CHECK(r.code == 2);
  r = run({"lower", "--gamma", "0.5"});
  CHECK(r.code == 2);
}

TEST_CASE("config files are checked") {
  Result r = run({"lower", "--config", write_file("bad_key.json", R"({"kappa": 0, "horizon": 3})")});
  CHECK(r.code == 2);
  CHECK(has(r.err, "horizon"));
  r = run({"lower", "--config", write_file("bad_type.json", R"({"kappa": "zero"})")});
  CHECK(r.code == 2);
  CHECK(has(r.err, "kappa"));
  r = run({"lower", "--config", write_file("bad_json.json", "{")});
  CHECK(r.code == 2);
  CHECK(has(r.err, "config"));
  r = run({"lower", "--config", temp_path("does_not_exist.json")});
  CHECK(r.code == 2);
}

TEST_CASE("sweeps write csv files") {
  const std::string path = temp_path("dehom.csv");
  const Result r = run({"sweep-dehomogenize", "--theta", "2", "--steps", "10", "--out", path});
  CHECK(r.code == 0);
  CHECK(has(r.out, "verdict = PASS"));
  heatctl::ThickParams p;
  p.rho = 0.5;
  CHECK(slurp(path) == heatctl::dehomogenization_sweep(p, 2.0, heatctl::UniversalConstants{}, 10).to_csv());
  const Result bad = run({"sweep-dehomogenize", "--out", temp_path("no_such_dir/x.csv")});
  CHECK(bad.code == 2);
  CHECK(has(bad.err, "out"));
  const Result variant = run({"sweep-dehomogenize", "--variant", "other"});
  CHECK(variant.code == 2);
}

TEST_CASE("help exits cleanly") {
  const Result r = run({"--help"});
  CHECK(r.code == 0);
  CHECK(has(r.out, "sweep-homogenize"));
}

} // TEST_SUITE
