#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <json.hpp>

#include "fbmoo/dyadic.hpp"
#include "fbmoo/grid_function.hpp"
#include "fbmoo/operators.hpp"
#include "fbmoo/sparse.hpp"
#include "fbmoo/verify.hpp"
#include "fbmoo/weights.hpp"

namespace py = pybind11;
using namespace fbmoo;

namespace {

Rational rational_from_string(const std::string& s) {
  if (s == "inf" || s == "infinity") return Rational(0);
  return Rational::parse(s);
}

std::vector<Rational> rationals(const std::vector<std::string>& strs) {
  std::vector<Rational> out;
  out.reserve(strs.size());
  for (const std::string& s : strs) out.push_back(rational_from_string(s));
  return out;
}

} // namespace

PYBIND11_MODULE(_core, mod) {
  mod.doc() = "Dyadic harmonic analysis on [0,1): lattices, bumps, sparse operators, "
              "multilinear fractional weights, and the experiment harness.";

  py::class_<Rational>(mod, "Rational")
      .def(py::init([](const std::string& s) { return rational_from_string(s); }))
      .def(py::init<long long, long long>())
      .def("__float__", &Rational::to_double)
      .def("__repr__", [](const Rational& r) { return "Rational(" + r.str() + ")"; })
      .def("__eq__", [](const Rational& a, const Rational& b) { return a == b; });

  py::class_<DyadicCube>(mod, "DyadicCube")
      .def(py::init([](int level, std::int64_t index, const std::string& shift) {
             return DyadicCube{level, index, rational_from_string(shift)};
           }),
           py::arg("level"), py::arg("index"), py::arg("shift") = "0")
      .def_readonly("level", &DyadicCube::level)
      .def_readonly("index", &DyadicCube::index)
      .def_property_readonly("shift", [](const DyadicCube& c) { return c.shift.to_double(); })
      .def("length", &DyadicCube::length)
      .def("left", &DyadicCube::left)
      .def("contains", &DyadicCube::contains)
      .def("parent", &DyadicCube::parent)
      .def("child", &DyadicCube::child)
      .def("__repr__", [](const DyadicCube& c) {
        return "DyadicCube(level=" + std::to_string(c.level) +
               ", index=" + std::to_string(c.index) + ", shift=" + c.shift.str() + ")";
      });

  py::class_<Lattice>(mod, "Lattice")
      .def_readonly("max_level", &Lattice::max_level)
      .def("root", &Lattice::root)
      .def("cube", &Lattice::cube)
      .def("cube_count", &Lattice::cube_count)
      .def("all_cubes", &Lattice::all_cubes)
      .def("chain_containing", &Lattice::chain_containing);

  mod.def(
      "build_lattice",
      [](int max_level, const std::string& shift) {
        return build_lattice(max_level, rational_from_string(shift));
      },
      py::arg("max_level"), py::arg("shift") = "0");

  mod.def("haar", &haar, py::arg("cube"), py::arg("x"), py::arg("cancellative") = true);
  mod.def("classify_good_bad",
          [](const DyadicCube& cube, const Lattice& lattice, int r, double eta, double delta) {
            return classify_good_bad(cube, lattice, r, eta, delta) == CubeClass::Bad ? "bad"
                                                                                     : "good";
          });

  py::class_<GridFunction>(mod, "GridFunction")
      .def(py::init([](int resolution, std::vector<double> values) {
        return GridFunction(resolution, std::move(values));
      }))
      .def_readonly("resolution", &GridFunction::resolution)
      .def_readonly("values", &GridFunction::values)
      .def("__call__", &GridFunction::operator())
      .def("integral", &GridFunction::integral)
      .def("lp_norm", &GridFunction::lp_norm)
      .def("max_abs", &GridFunction::max_abs)
      .def_static("constant", &GridFunction::constant)
      .def_static("indicator", &GridFunction::indicator)
      .def_static("haar_function", &GridFunction::haar_function, py::arg("cube"),
                  py::arg("resolution"), py::arg("cancellative") = true);

  mod.def("function_from_spec", [](const std::string& spec, int resolution) {
    return function_from_spec(nlohmann::json::parse(spec), resolution);
  });
  mod.def("write_csv", &write_csv);
  mod.def("read_csv", &read_csv);

  mod.def("avg", &avg, "fractional average bump");
  mod.def("maximal_avg", &maximal_avg);
  mod.def("martingale_difference", &martingale_difference);
  mod.def("bmo_norm", &bmo_norm);
  mod.def("bmo_norm_weighted", &bmo_norm_weighted);
  mod.def("fbmo_norm_haar", &fbmo_norm_haar);
  mod.def(
      "luxemburg_norm",
      [](const GridFunction& f, const DyadicCube& Q, const std::string& kind, double parameter) {
        YoungFunction phi;
        if (kind == "power") phi = YoungFunction::power(parameter);
        else if (kind == "llogl") phi = YoungFunction::llogl(parameter);
        else if (kind == "expl") phi = YoungFunction::expl(parameter);
        else throw std::invalid_argument("young kind must be power/llogl/expl");
        return luxemburg_norm(f, Q, phi);
      },
      py::arg("f"), py::arg("cube"), py::arg("kind"), py::arg("parameter"));

  py::class_<KernelSpec>(mod, "KernelSpec")
      .def(py::init([](int m, double eta, double epsilon) {
             return KernelSpec{m, eta, epsilon};
           }),
           py::arg("m"), py::arg("eta"), py::arg("epsilon") = 0.0)
      .def_readonly("m", &KernelSpec::m)
      .def_readonly("eta", &KernelSpec::eta)
      .def_readonly("epsilon", &KernelSpec::epsilon);

  mod.def("maximal", &maximal);
  mod.def("maximal_tensor", &maximal_tensor);
  mod.def("maximal_grid", &maximal_grid);
  mod.def("fractional_integral", &fractional_integral);
  mod.def("fractional_integral_grid", &fractional_integral_grid);

  py::class_<SparseFamily>(mod, "SparseFamily")
      .def_readonly("delta", &SparseFamily::delta)
      .def_readonly("resolution", &SparseFamily::resolution)
      .def_readonly("cubes", &SparseFamily::cubes)
      .def_readonly("exceptional_cells", &SparseFamily::exceptional_cells)
      .def("to_json", [](const SparseFamily& f) { return sparse_to_json(f).dump(); });
  mod.def("sparse_from_json",
          [](const std::string& s) { return sparse_from_json(nlohmann::json::parse(s)); });

  mod.def("is_sparse", [](const SparseFamily& f) {
    SparseCertificate cert = is_sparse(f);
    return py::make_tuple(cert.sparse, cert.first_violation, cert.reason);
  });
  mod.def(
      "build_sparse_cz",
      [](const std::vector<GridFunction>& f, const GridFunction& g, const DyadicCube& P0,
         double delta) { return build_sparse_cz(f, g, P0, delta); },
      py::arg("f"), py::arg("g"), py::arg("P0"), py::arg("delta"));

  py::class_<SymbolData>(mod, "SymbolData")
      .def(py::init([](std::vector<GridFunction> b, std::vector<int> k, std::vector<int> t) {
        SymbolData s;
        s.b = std::move(b);
        s.k = std::move(k);
        s.t = std::move(t);
        return s;
      }))
      .def_static("none", &SymbolData::none);
  mod.def("sparse_operator", &sparse_operator);
  mod.def("sparse_operator_grid", &sparse_operator_grid);
  mod.def("sparse_form", &sparse_form);

  py::class_<ExponentTuple>(mod, "ExponentTuple")
      .def_readonly("m", &ExponentTuple::m)
      .def_readonly("degenerate", &ExponentTuple::degenerate)
      .def_property_readonly("ptilde", &ExponentTuple::ptilde)
      .def_property_readonly("zeta", [](const ExponentTuple& e) { return e.zeta.to_double(); })
      .def_property_readonly("theta_sharp",
                             [](const ExponentTuple& e) -> py::object {
                               if (!e.theta_sharp) return py::none();
                               return py::float_(e.theta_sharp->to_double());
                             })
      .def_property_readonly("xi", [](const ExponentTuple& e) -> py::object {
        if (!e.xi) return py::none();
        return py::float_(e.xi->to_double());
      });

  mod.def("extrapolation_exponents",
          [](int m, const std::string& eta, const std::vector<std::string>& p,
             const std::vector<std::string>& r, const std::string& s) {
            return extrapolation_exponents(m, rational_from_string(eta), rationals(p),
                                           rationals(r), rational_from_string(s));
          });

  py::class_<WeightTuple>(mod, "WeightTuple")
      .def(py::init([](std::vector<GridFunction> w) { return WeightTuple{std::move(w)}; }))
      .def_readonly("omega", &WeightTuple::omega)
      .def("product", &WeightTuple::product);

  mod.def("ap_constant", &ap_constant);
  mod.def("multilinear_constant", &multilinear_constant);
  mod.def("bloom_weight", &bloom_weight);
  mod.def("power_weight", &power_weight);
  mod.def("factorize_weights", [](const WeightTuple& w, const ExponentTuple& e, const Lattice& lat) {
    FactorizationReport rep = factorize_weights(w, e, lat);
    py::dict out;
    out["omega_tilde"] = rep.omega_tilde;
    out["W"] = rep.W;
    out["base_constant"] = rep.base_constant;
    out["all_pass"] = rep.all_pass();
    py::list checks;
    for (const auto& c : rep.checks) {
      py::dict d;
      d["name"] = c.name;
      d["measured"] = c.measured;
      d["bound"] = c.bound;
      d["pass"] = c.pass;
      checks.append(d);
    }
    out["checks"] = checks;
    return out;
  });
  mod.def("inverse_factorize", &inverse_factorize);

  mod.def("experiment_catalog", []() {
    py::list out;
    for (const ExperimentInfo& info : experiment_catalog()) {
      py::dict d;
      d["name"] = info.name;
      d["description"] = info.description;
      d["claim"] = info.claim;
      out.append(d);
    }
    return out;
  });
  mod.def("run_experiment", [](const std::string& config) {
    ExperimentReport report = run_experiment(nlohmann::json::parse(config));
    return report.to_json().dump(2);
  });
  mod.def("run_experiment_comparable", [](const std::string& config) {
    ExperimentReport report = run_experiment(nlohmann::json::parse(config));
    return report.comparable_dump();
  });
}
