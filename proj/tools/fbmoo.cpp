// Command-line front end: configure, run, and persist experiments.
//
//   fbmoo run <config.json> [--out report.json]   exit 0 pass / 1 fail / 2 config error
//   fbmoo list                                    experiment catalog
//   fbmoo dump-function <spec> <out.csv>          sample a parametric function to CSV
//
// FBMOO_THREADS caps internal parallelism.

#include <cstdio>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "fbmoo/grid_function.hpp"
#include "fbmoo/verify.hpp"

namespace {

nlohmann::json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in.good()) throw std::invalid_argument("cannot open config file: " + path);
  nlohmann::json j;
  in >> j;
  return j;
}

int run_command(const std::string& config_path, const std::string& out_path) {
  nlohmann::json config;
  fbmoo::ExperimentReport report;
  try {
    config = load_json_file(config_path);
    report = fbmoo::run_experiment(config);
  } catch (const std::exception& err) {
    std::cerr << "config error: " << err.what() << "\n";
    return 2;
  }

  std::string out = out_path;
  if (out.empty()) out = config.value("output", report.name + "_report.json");
  {
    std::ofstream f(out);
    f << report.to_json().dump(2) << "\n";
  }

  std::cout << report.name << "  (seed " << report.seed << ", " << report.runtime_seconds
            << " s)\n";
  for (const fbmoo::Flag& flag : report.flags) {
    double value = report.measured.count(flag.quantity) ? report.measured.at(flag.quantity) : 0.0;
    std::printf("  [%s] %-42s %-36s = %.6g  (tolerance %.6g)\n",
                flag.pass ? "PASS" : "FAIL", flag.name.c_str(), flag.quantity.c_str(), value,
                flag.tolerance);
  }
  std::cout << "report written to " << out << "\n";
  return report.pass() ? 0 : 1;
}

int list_command() {
  for (const fbmoo::ExperimentInfo& info : fbmoo::experiment_catalog()) {
    std::printf("%-24s %s\n", info.name.c_str(), info.description.c_str());
    std::printf("%-24s   checks: %s\n", "", info.claim.c_str());
  }
  return 0;
}

int dump_function_command(const std::string& spec_arg, const std::string& csv_path,
                          int resolution) {
  try {
    nlohmann::json spec;
    if (!spec_arg.empty() && spec_arg.front() == '{')
      spec = nlohmann::json::parse(spec_arg);
    else
      spec = load_json_file(spec_arg);
    fbmoo::GridFunction f = fbmoo::function_from_spec(spec, resolution);
    fbmoo::write_csv(f, csv_path);
    std::cout << "wrote " << f.size() << " cells to " << csv_path << "\n";
  } catch (const std::exception& err) {
    std::cerr << "config error: " << err.what() << "\n";
    return 2;
  }
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"desk-scale dyadic harmonic analysis experiments"};
  app.require_subcommand(1);

  std::string config_path, out_path, spec_arg, csv_path;
  int resolution = 10;

  CLI::App* run = app.add_subcommand("run", "run an experiment from a JSON config");
  run->add_option("config", config_path, "experiment config (JSON)")->required();
  run->add_option("--out", out_path, "report output path");

  CLI::App* list = app.add_subcommand("list", "list the experiment catalog");

  CLI::App* dump = app.add_subcommand("dump-function", "sample a function spec to CSV");
  dump->add_option("spec", spec_arg, "inline JSON spec or path to a spec file")->required();
  dump->add_option("csv", csv_path, "output CSV path")->required();
  dump->add_option("--resolution", resolution, "grid resolution exponent (default 10)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (run->parsed()) return run_command(config_path, out_path);
  if (list->parsed()) return list_command();
  if (dump->parsed()) return dump_function_command(spec_arg, csv_path, resolution);
  return 2;
}
