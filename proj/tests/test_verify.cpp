#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "fbmoo/operators.hpp"
#include "fbmoo/verify.hpp"

using namespace fbmoo;
using nlohmann::json;

TEST_CASE("function specs") {
  GridFunction c = function_from_spec(json{{"kind", "constant"}, {"value", 2.0}}, 6);
  CHECK(c.max_abs() == doctest::Approx(2.0));
  GridFunction ind = function_from_spec(json{{"kind", "indicator"}, {"lo", 0.25}, {"hi", 0.5}}, 6);
  CHECK(ind.integral() == doctest::Approx(0.25));
  GridFunction pw = function_from_spec(json{{"kind", "power"}, {"exponent", 1.0}}, 6);
  CHECK(pw(0.6) <= 1.0);
  GridFunction h = function_from_spec(json{{"kind", "haar"}, {"level", 0}, {"index", 0}}, 6);
  CHECK(h(0.1) == doctest::Approx(1.0));
  GridFunction r1 = function_from_spec(json{{"kind", "random"}, {"seed", 7}}, 6);
  GridFunction r2 = function_from_spec(json{{"kind", "random"}, {"seed", 7}}, 6);
  for (std::size_t k = 0; k < r1.size(); ++k) CHECK(r1.values[k] == r2.values[k]);
  CHECK_THROWS(function_from_spec(json{{"kind", "nope"}}, 6));
  CHECK_THROWS(function_from_spec(json{{"kind", "power"}, {"exponent", -1.5}}, 6));
}

TEST_CASE("registry dispatch and admissibility messages") {
  CHECK_THROWS_WITH_AS(run_experiment(json{{"experiment", "unknown_thing"}}),
                       doctest::Contains("unknown experiment"), std::invalid_argument);
  // r > p must be rejected, naming the order relation
  json bad = {{"experiment", "sharp_weighted_bound"},
              {"exponents", {{"p", {"2"}}, {"r", {"3"}}, {"s", "inf"}, {"eta", "0"}}}};
  CHECK_THROWS_WITH_AS(run_experiment(bad), doctest::Contains("(r,s) below (p,p~)"),
                       std::invalid_argument);
  // desk-scale cap on the resolution
  json huge = {{"experiment", "haar_system"}, {"resolution", 24}};
  CHECK_THROWS(run_experiment(huge));
}

TEST_CASE("experiment catalog") {
  const auto& catalog = experiment_catalog();
  CHECK(catalog.size() >= 7);
  for (const ExperimentInfo& info : catalog) {
    CHECK_FALSE(info.name.empty());
    CHECK_FALSE(info.description.empty());
    CHECK_FALSE(info.claim.empty());
  }
  // stable across calls
  CHECK(&experiment_catalog() == &catalog);
}

TEST_CASE("reports are reproducible for a fixed config and seed") {
  json cfg = {{"experiment", "sparse_constructor"}, {"count", 20}, {"resolution", 7},
              {"seed", 99}};
  ExperimentReport a = run_experiment(cfg);
  ExperimentReport b = run_experiment(cfg);
  CHECK(a.comparable_dump() == b.comparable_dump());
  CHECK(a.pass());

  json cfg2 = {{"experiment", "local_decay"}, {"inputs", 5}, {"resolution", 8}, {"seed", 4}};
  CHECK(run_experiment(cfg2).comparable_dump() == run_experiment(cfg2).comparable_dump());
}

TEST_CASE("flags reference measured quantities") {
  json cfg = {{"experiment", "maximal_weak_type"}, {"inputs", 5}, {"resolution", 9}};
  ExperimentReport rep = run_experiment(cfg);
  REQUIRE_FALSE(rep.flags.empty());
  for (const Flag& f : rep.flags) CHECK(rep.measured.count(f.quantity) == 1);
  json round = rep.to_json();
  CHECK(round.at("name") == "maximal_weak_type");
  CHECK(round.contains("timestamp"));
  CHECK(round.contains("runtime_seconds"));
}

TEST_CASE("small domination run is covered and stable") {
  json cfg = {{"experiment", "pointwise_domination"}, {"m", 1}, {"eta", 0.5},
              {"resolution", 8}, {"inputs", 8}, {"seed", 3}};
  ExperimentReport rep = run_experiment(cfg);
  CHECK(rep.pass());
  CHECK(rep.measured.at("uncovered_points") == 0.0);
}

TEST_CASE("oscillation conditions hold for both concrete operators") {
  json cfg = {{"experiment", "fbmoo_conditions"}, {"operator", "maximal"},
              {"m", 1}, {"r", {1.0}}, {"eta_vec", {0.0}}, {"resolution", 7},
              {"samples", 16}, {"seed", 21}};
  ExperimentReport rep = run_experiment(cfg);
  CHECK(rep.pass());
  CHECK(rep.measured.at("condition2_sup") > 0.0);

  json cfg2 = {{"experiment", "fbmoo_conditions"}, {"operator", "fractional_integral"},
               {"m", 1}, {"r", {1.0}}, {"eta_vec", {0.5}}, {"resolution", 7},
               {"samples", 16}, {"seed", 22}};
  ExperimentReport rep2 = run_experiment(cfg2);
  CHECK(rep2.pass());

  // constant inputs have vanishing condition-(II) differences
  json cfg3 = {{"experiment", "mixed_weak"}, {"m", 1}, {"eta", 0.5}, {"resolution", 8},
               {"inputs", 5}, {"seed", 23},
               {"v", {{"kind", "power"}, {"exponent", 0.25}}}};
  ExperimentReport rep3 = run_experiment(cfg3);
  CHECK(rep3.pass());
  CHECK(rep3.measured.at("w_a1_constant") >= 1.0 - 1e-12);
}

TEST_CASE("symbol-twisted domination runs covered for both arities") {
  json cfg = {{"experiment", "pointwise_domination"}, {"m", 1}, {"eta", 0.5},
              {"resolution", 8}, {"inputs", 6}, {"seed", 8},
              {"symbol", {{"k", {1}}, {"b", {{{"kind", "power"}, {"exponent", 1.0}}}}}}};
  ExperimentReport rep = run_experiment(cfg);
  CHECK(rep.pass());
  CHECK(rep.measured.at("max_sup_ratio") > 0.0);

  // constant symbol: the order-1 commutator of a constant vanishes on both sides
  json cfg2 = {{"experiment", "pointwise_domination"}, {"m", 1}, {"eta", 0.5},
               {"resolution", 8}, {"inputs", 4}, {"seed", 8},
               {"symbol", {{"k", {1}}, {"b", {{{"kind", "constant"}, {"value", 3.0}}}}}}};
  ExperimentReport rep2 = run_experiment(cfg2);
  CHECK(rep2.pass());
  CHECK(rep2.measured.at("max_sup_ratio") == 0.0);
}

TEST_CASE("condition (II) vanishes on constant inputs") {
  // differences of equal restrictions: T(f) - T(f chi) restricted to B is
  // constant-in-x when f is constant and T is the lattice maximal operator at
  // the root scale; the pairwise oscillation of a constant vector is zero.
  const int n = 6;
  Lattice lat = build_lattice(n, Rational(0));
  GridFunction one = GridFunction::constant(n, 1.0);
  GridFunction m_full = maximal_grid({one}, lat, {1.0}, {0.0});
  for (double v : m_full.values) CHECK(v == doctest::Approx(1.0));
}
