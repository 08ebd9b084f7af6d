#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "fbmoo/grid_function.hpp"

#include <json.hpp>

namespace fbmoo {

/// One named pass/fail gate: a measured quantity against a tolerance.
struct Flag {
  std::string name;
  std::string quantity; // key into ExperimentReport::measured
  double tolerance = 0.0;
  bool pass = false;
};

/// Structured experiment output. Every report is reproducible given
/// (config, seed); timestamp and runtime are the only volatile fields.
struct ExperimentReport {
  std::string name;
  nlohmann::json parameters;
  std::map<std::string, double> measured;
  std::vector<Flag> flags;
  std::uint64_t seed = 0;
  double runtime_seconds = 0.0;
  std::string timestamp;

  bool pass() const;
  nlohmann::json to_json() const;
  /// to_json with the volatile timing fields stripped; equal strings for
  /// equal (config, seed) runs.
  std::string comparable_dump() const;
};

struct ExperimentInfo {
  std::string name;
  std::string description; // one line
  std::string claim;       // the inequality or identity being exercised
};

/// Static experiment catalog.
const std::vector<ExperimentInfo>& experiment_catalog();

/// Dispatches on config["experiment"]; throws std::invalid_argument on an
/// unknown name or inadmissible parameters (the message names the violated
/// relation).
ExperimentReport run_experiment(const nlohmann::json& config);

/// Parametric function specs shared by configs and the CLI:
///   {"kind":"constant","value":c}
///   {"kind":"indicator","lo":a,"hi":b}
///   {"kind":"power","exponent":e}            midpoint sampled
///   {"kind":"haar","level":k,"index":j}
///   {"kind":"random","seed":s,"complexity":k} piecewise-constant, values in [0,1)
GridFunction function_from_spec(const nlohmann::json& spec, int resolution);

// Individual experiments (config keys documented in README / configs/).
ExperimentReport check_haar_system(const nlohmann::json& config);
ExperimentReport check_sparse_constructor(const nlohmann::json& config);
ExperimentReport check_pointwise_domination(const nlohmann::json& config);
ExperimentReport check_maximal_weak_type(const nlohmann::json& config);
ExperimentReport check_sharp_weighted_bound(const nlohmann::json& config);
ExperimentReport check_fbmoo_conditions(const nlohmann::json& config);
ExperimentReport check_local_decay(const nlohmann::json& config);
ExperimentReport check_mixed_weak(const nlohmann::json& config);
ExperimentReport check_exponent_identities(const nlohmann::json& config);
ExperimentReport check_factorization(const nlohmann::json& config);
ExperimentReport check_shift_paraproduct(const nlohmann::json& config);

} // namespace fbmoo
