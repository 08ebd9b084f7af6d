// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Thresholds are pinned here and in the configs the criteria name.

#include <chrono>
#include <cstdio>
#include <string>

#include <json.hpp>

#include "fbmoo/verify.hpp"

using nlohmann::json;

namespace {

int failures = 0;

void report(int criterion, const std::string& name, bool pass, const std::string& detail) {
  std::printf("[%s] criterion %2d: %-34s %s\n", pass ? "PASS" : "FAIL", criterion, name.c_str(),
              detail.c_str());
  if (!pass) ++failures;
}

std::string fmt(const char* pattern, double a, double b = 0.0, double c = 0.0) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), pattern, a, b, c);
  return buf;
}

double run_seconds(const fbmoo::ExperimentReport& rep) { return rep.runtime_seconds; }

} // namespace

int main() {
  using fbmoo::run_experiment;

  // 1. Haar system at depth 8, N = 12, tolerance 1e-10, under 5 s.
  {
    json cfg = {{"experiment", "haar_system"}, {"depth", 8},        {"resolution", 12},
                {"tolerance", 1e-10},          {"parseval_trials", 5}, {"seed", 2026}};
    auto rep = run_experiment(cfg);
    bool pass = rep.pass() && run_seconds(rep) < 5.0;
    report(1, "haar orthonormality + parseval", pass,
           fmt("max errors %.3g / %.3g, %.2f s", rep.measured["max_orthonormality_error"],
               rep.measured["max_parseval_error"], run_seconds(rep)));
  }

  // 2. Sparse constructor: 200 seeded inputs, m in {1,2}, N = 10, delta in {1/4, 1/2}.
  {
    json cfg = {{"experiment", "sparse_constructor"}, {"count", 200}, {"resolution", 10},
                {"deltas", {0.25, 0.5}},              {"arities", {1, 2}}, {"seed", 2026}};
    auto rep = run_experiment(cfg);
    report(2, "stopping time sparse + markov", rep.pass(),
           fmt("sparse failures %g, markov failures %g", rep.measured["sparse_failures"],
               rep.measured["markov_failures"]));
  }

  // 3. Pointwise domination for (m, eta) cases at N = 10, 50 inputs, < 60 s each.
  {
    struct Case { int m; double eta; };
    for (Case c : {Case{1, 0.5}, Case{2, 0.5}, Case{2, 1.0}}) {
      json cfg = {{"experiment", "pointwise_domination"},
                  {"m", c.m},
                  {"eta", c.eta},
                  {"resolution", 10},
                  {"inputs", 50},
                  {"delta", 0.5},
                  {"c_cap", 50.0},
                  {"stability_tolerance", 0.25},
                  {"seed", 2026}};
      auto rep = run_experiment(cfg);
      bool pass = rep.pass() && run_seconds(rep) < 60.0;
      char name[64];
      std::snprintf(name, sizeof(name), "domination m=%d eta=%.1f", c.m, c.eta);
      report(3, name, pass,
             fmt("sup ratio %.4g, change %.3g, %.2f s", rep.measured["max_sup_ratio"],
                 rep.measured["max_relative_change"], run_seconds(rep)));
    }
  }

  // 4. Weak type for the single standard lattice, exhaustive level sweep at N = 12.
  {
    json cfg = {{"experiment", "maximal_weak_type"},
                {"m", 1},
                {"r", {1.0}},
                {"eta_vec", {0.0}},
                {"resolution", 12},
                {"inputs", 20},
                {"c0", 1.0},
                {"tolerance", 0.1},
                {"seed", 2026}};
    auto rep = run_experiment(cfg);
    report(4, "maximal weak type <= 1.1", rep.pass(),
           fmt("measured ratio %.6g (bound %.3g)", rep.measured["max_weak_type_ratio"],
               rep.measured["bound"]));
  }

  // 5. Exponent identities exact for 1000 tuples; norm identities to 1e-9 at N = 8.
  {
    json cfg = {{"experiment", "exponent_identities"}, {"count", 1000}, {"norm_pairs", 100},
                {"resolution", 8},                     {"tolerance", 1e-9}, {"seed", 2026}};
    auto rep = run_experiment(cfg);
    report(5, "weight/exponent arithmetic", rep.pass(),
           fmt("identity failures %g, norm rel err %.3g", rep.measured["identity_failures"],
               rep.measured["max_norm_identity_relative_error"]));
  }

  // 6. Factorization inequalities at depth 8 for 50 log-Lipschitz tuples; exact round trip.
  {
    json cfg = {{"experiment", "factorization"}, {"count", 50}, {"resolution", 8},
                {"depth", 8},                    {"roundtrip_tolerance", 1e-10}, {"seed", 2026}};
    auto rep = run_experiment(cfg);
    report(6, "weight factorization", rep.pass(),
           fmt("check failures %g, roundtrip err %.3g", rep.measured["check_failures"],
               rep.measured["max_roundtrip_relative_error"]));
  }

  // 7. Sharpness sweep: slope of log R vs log K never above 2 + 0.15 at N = 12.
  {
    json cfg = {{"experiment", "sharp_weighted_bound"},
                {"exponents", {{"p", {"4"}}, {"r", {"2"}}, {"s", "inf"}, {"eta", "0"}}},
                {"resolution", 12},
                {"theta_cap", 2.0},
                {"slope_tolerance", 0.15},
                {"delta_sweep", {0.25, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0}},
                {"function", {{"kind", "power"}, {"exponent", -0.125}}},
                {"seed", 2026}};
    auto rep = run_experiment(cfg);
    report(7, "sharp weighted growth", rep.pass(),
           fmt("max slope %.4g (cap 2.15), bump scaling %.4g", rep.measured["max_slope"],
               rep.measured["bump_scaling_log2_measured"]));
  }

  // 8. Shift/paraproduct gates exact (10 + 10 cases each); surrogate stable to 10%.
  {
    json cfg = {{"experiment", "shift_paraproduct"}, {"cases", 10},
                {"stability_tolerance", 0.10},       {"seed", 2026}};
    auto rep = run_experiment(cfg);
    report(8, "shift/paraproduct gates", rep.pass(),
           fmt("false accepts %g, rejects %g, step %.3g", rep.measured["false_accepts"],
               rep.measured["false_rejects"], rep.measured["max_refinement_step"]));
  }

  // 9. Local decay: exact monotonicity and negative tail slope, 20 inputs at N = 10.
  {
    json cfg = {{"experiment", "local_decay"}, {"m", 1},      {"eta", 0.5},
                {"resolution", 10},            {"inputs", 20}, {"seed", 2026}};
    auto rep = run_experiment(cfg);
    report(9, "local decay", rep.pass(),
           fmt("monotonicity violations %g, tail slope %.4g",
               rep.measured["monotonicity_violations"], rep.measured["max_tail_slope"]));
  }

  // 10. Determinism: identical reports (timestamp/runtime excluded) for a fixed seed.
  {
    bool pass = true;
    for (const json& cfg :
         {json{{"experiment", "sparse_constructor"}, {"count", 30}, {"resolution", 8},
               {"seed", 77}},
          json{{"experiment", "sharp_weighted_bound"}, {"resolution", 10}, {"seed", 77}},
          json{{"experiment", "local_decay"}, {"inputs", 6}, {"resolution", 9}, {"seed", 77}}}) {
      pass = pass && run_experiment(cfg).comparable_dump() ==
                         run_experiment(cfg).comparable_dump();
    }
    report(10, "reports deterministic", pass, pass ? "byte-identical" : "mismatch");
  }

  if (failures == 0) std::printf("acceptance: all criteria passed\n");
  else std::printf("acceptance: %d criterion/criteria FAILED\n", failures);
  return failures;
}
