#include "fbmoo/sparse.hpp"

#include <algorithm>
#include <cmath>

#include "fbmoo/common.hpp"

namespace fbmoo {

double SparseFamily::exceptional_measure(std::size_t i) const {
  return static_cast<double>(exceptional_cells[i].size()) * std::ldexp(1.0, -resolution);
}

SparseCertificate is_sparse(const SparseFamily& family) {
  SparseCertificate cert;
  if (family.cubes.size() != family.exceptional_cells.size()) {
    cert.sparse = false;
    cert.reason = "cube/exceptional-set count mismatch";
    return cert;
  }
  if (!(family.delta > 0.0 && family.delta < 1.0)) {
    cert.sparse = false;
    cert.reason = "delta outside (0,1)";
    return cert;
  }
  const std::size_t cells = std::size_t(1) << family.resolution;
  std::vector<char> seen(cells, 0);
  const double h = std::ldexp(1.0, -family.resolution);
  for (std::size_t i = 0; i < family.cubes.size(); ++i) {
    const DyadicCube& Q = family.cubes[i];
    std::vector<char> inside(cells, 0);
    for (const CellRange& range : Q.cell_ranges(family.resolution))
      for (std::uint32_t k = range.begin; k < range.end; ++k) inside[k] = 1;
    for (std::uint32_t k : family.exceptional_cells[i]) {
      if (k >= cells || !inside[k]) {
        cert.sparse = false;
        cert.first_violation = static_cast<long long>(i);
        cert.reason = "E_Q not contained in Q";
        return cert;
      }
      if (seen[k]) {
        cert.sparse = false;
        cert.first_violation = static_cast<long long>(i);
        cert.reason = "exceptional sets overlap";
        return cert;
      }
      seen[k] = 1;
    }
    double measure = static_cast<double>(family.exceptional_cells[i].size()) * h;
    if (measure + 1e-15 < family.delta * Q.length()) {
      cert.sparse = false;
      cert.first_violation = static_cast<long long>(i);
      cert.reason = "|E_Q| < delta |Q|";
      return cert;
    }
  }
  return cert;
}

nlohmann::json sparse_to_json(const SparseFamily& family) {
  nlohmann::json j;
  j["delta"] = family.delta;
  j["resolution"] = family.resolution;
  j["cubes"] = nlohmann::json::array();
  for (const DyadicCube& Q : family.cubes)
    j["cubes"].push_back({{"level", Q.level}, {"index", Q.index}, {"shift", Q.shift.to_double()}});
  j["exceptional_cells"] = family.exceptional_cells;
  return j;
}

namespace {

Rational rational_from_dyadic(double x) {
  // Shifts are dyadic rationals with denominator <= 2^24, exactly stored.
  long long den = 1 << 24;
  double scaled = x * static_cast<double>(den);
  require(scaled == std::floor(scaled), "shift is not a dyadic rational");
  return Rational(static_cast<long long>(scaled), den);
}

} // namespace

SparseFamily sparse_from_json(const nlohmann::json& j) {
  SparseFamily family;
  family.delta = j.at("delta").get<double>();
  family.resolution = j.at("resolution").get<int>();
  for (const auto& c : j.at("cubes")) {
    family.cubes.push_back(DyadicCube{c.at("level").get<int>(), c.at("index").get<std::int64_t>(),
                                      rational_from_dyadic(c.at("shift").get<double>())});
  }
  family.exceptional_cells = j.at("exceptional_cells").get<std::vector<std::vector<std::uint32_t>>>();
  return family;
}

namespace {

struct CzContext {
  std::vector<PowerPrefix> sums; // one per f_i plus one for g
  double threshold = 0.0;
  int resolution = 0;
  SparseFamily* family = nullptr;
  std::vector<StoppingNode>* trace = nullptr;
};

/// Collects the maximal descendants of P whose ratio sum against the averages
/// at P0 exceeds the threshold. Depth-first in index order.
void collect_selected(CzContext& ctx, const DyadicCube& P, const std::vector<double>& base,
                      std::vector<DyadicCube>& selected) {
  if (P.level >= ctx.resolution) return;
  for (int which = 0; which < 2; ++which) {
    DyadicCube child = P.child(which);
    double ratio_sum = 0.0;
    for (std::size_t i = 0; i < ctx.sums.size(); ++i) {
      if (base[i] <= 0.0) continue; // zero-average term drops out
      ratio_sum += (ctx.sums[i].integral(child) / child.length()) / base[i];
    }
    if (ratio_sum > ctx.threshold)
      selected.push_back(child);
    else
      collect_selected(ctx, child, base, selected);
  }
}

void build_node(CzContext& ctx, const DyadicCube& P0) {
  std::vector<double> base(ctx.sums.size());
  for (std::size_t i = 0; i < ctx.sums.size(); ++i)
    base[i] = ctx.sums[i].integral(P0) / P0.length();

  std::vector<DyadicCube> selected;
  bool all_zero = true;
  for (double b : base) all_zero = all_zero && b <= 0.0;
  if (!all_zero) collect_selected(ctx, P0, base, selected);

  std::vector<char> removed(std::size_t(1) << ctx.resolution, 0);
  double selected_measure = 0.0;
  for (const DyadicCube& P : selected) {
    selected_measure += P.length();
    for (const CellRange& range : P.cell_ranges(ctx.resolution))
      for (std::uint32_t k = range.begin; k < range.end; ++k) removed[k] = 1;
  }
  std::vector<std::uint32_t> keep;
  for (const CellRange& range : P0.cell_ranges(ctx.resolution))
    for (std::uint32_t k = range.begin; k < range.end; ++k)
      if (!removed[k]) keep.push_back(k);

  ctx.family->cubes.push_back(P0);
  ctx.family->exceptional_cells.push_back(std::move(keep));
  if (ctx.trace) ctx.trace->push_back(StoppingNode{P0, selected_measure});

  for (const DyadicCube& P : selected) build_node(ctx, P);
}

} // namespace

SparseFamily build_sparse_cz(const std::vector<GridFunction>& f, const GridFunction& g,
                             const DyadicCube& P0, double delta,
                             std::vector<StoppingNode>* trace) {
  require(!f.empty(), "need at least one input function");
  require(delta > 0.0 && delta < 1.0, "delta outside (0,1)");
  const int n = f.front().resolution;
  require(g.resolution == n, "input resolutions differ");
  for (const GridFunction& fi : f) {
    require(fi.resolution == n, "input resolutions differ");
    require(fi.nonnegative(), "inputs must be nonnegative");
  }
  require(g.nonnegative(), "inputs must be nonnegative");

  CzContext ctx;
  for (const GridFunction& fi : f) ctx.sums.emplace_back(fi, 1.0, false);
  ctx.sums.emplace_back(g, 1.0, false);
  ctx.threshold = static_cast<double>(f.size() + 1) / (1.0 - delta);
  ctx.resolution = n;

  SparseFamily family;
  family.delta = delta;
  family.resolution = n;
  ctx.family = &family;
  ctx.trace = trace;
  if (trace) trace->clear();
  build_node(ctx, P0);
  return family;
}

SymbolData SymbolData::none(int m, int resolution) {
  SymbolData sym;
  sym.b.assign(m, GridFunction::constant(resolution, 0.0));
  sym.k.assign(m, 0);
  sym.t.assign(m, 0);
  return sym;
}

void SymbolData::validate(std::size_t m) const {
  require(b.size() == m && k.size() == m && t.size() == m, "symbol arity mismatch");
  for (std::size_t i = 0; i < m; ++i)
    require(0 <= t[i] && t[i] <= k[i], "need 0 <= t_i <= k_i");
}

namespace {

double ipow(double x, int e) {
  double r = 1.0;
  for (int i = 0; i < e; ++i) r *= x;
  return r;
}

/// <|f_i (b_i - b_{i,B})^{t_i}|>_{r_i, B} for one cube, plain eta = 0 bump.
double twisted_avg(const GridFunction& f, const GridFunction& b, double mean_b, int t,
                   double r, const DyadicCube& B) {
  double s = 0.0;
  for (const CellRange& range : B.cell_ranges(f.resolution))
    for (std::uint32_t c = range.begin; c < range.end; ++c) {
      double v = std::fabs(f.values[c] * ipow(b.values[c] - mean_b, t));
      s += (r == 1.0) ? v : std::pow(v, r);
    }
  s *= f.cell_width() / B.length();
  return (r == 1.0) ? s : std::pow(s, 1.0 / r);
}

} // namespace

GridFunction sparse_operator_grid(const SparseFamily& family, const SymbolData& sym,
                                  const std::vector<GridFunction>& f,
                                  const std::vector<double>& r, double eta) {
  require(!f.empty(), "need at least one input function");
  const std::size_t m = f.size();
  sym.validate(m);
  require(r.size() == m, "need one r_i per slot");
  const int n = f.front().resolution;
  require(family.resolution == n, "family resolution mismatch");
  GridFunction out = GridFunction::constant(n, 0.0);

  for (std::size_t bi = 0; bi < family.cubes.size(); ++bi) {
    const DyadicCube& B = family.cubes[bi];
    double base = std::pow(B.length(), eta);
    std::vector<double> mean_b(m), bump(m);
    for (std::size_t i = 0; i < m; ++i) {
      mean_b[i] = sym.b[i].mean_over(B);
      bump[i] = twisted_avg(f[i], sym.b[i], mean_b[i], sym.t[i], r[i], B);
      base *= bump[i];
    }
    if (base == 0.0) continue;
    for (const CellRange& range : B.cell_ranges(n))
      for (std::uint32_t c = range.begin; c < range.end; ++c) {
        double term = base;
        for (std::size_t i = 0; i < m; ++i)
          term *= ipow(std::fabs(sym.b[i].values[c] - mean_b[i]), sym.k[i] - sym.t[i]);
        out.values[c] += term;
      }
  }
  return out;
}

double sparse_operator(const SparseFamily& family, const SymbolData& sym,
                       const std::vector<GridFunction>& f, const std::vector<double>& r,
                       double eta, double x) {
  require(x >= 0.0 && x < 1.0, "point outside [0,1)");
  const std::size_t m = f.size();
  sym.validate(m);
  require(r.size() == m, "need one r_i per slot");
  double acc = 0.0;
  for (const DyadicCube& B : family.cubes) {
    if (!B.contains(x)) continue;
    double term = std::pow(B.length(), eta);
    for (std::size_t i = 0; i < m; ++i) {
      double mean_b = sym.b[i].mean_over(B);
      term *= ipow(std::fabs(sym.b[i](x) - mean_b), sym.k[i] - sym.t[i]);
      term *= twisted_avg(f[i], sym.b[i], mean_b, sym.t[i], r[i], B);
    }
    acc += term;
  }
  return acc;
}

double sparse_form(const SparseFamily& family, const SymbolData& sym,
                   const std::vector<GridFunction>& f, const GridFunction& psi,
                   const std::vector<double>& r, double sprime, double eta) {
  require(!f.empty(), "need at least one input function");
  require(sprime >= 1.0, "s' must be >= 1");
  const std::size_t m = f.size();
  sym.validate(m);
  require(r.size() == m, "need one r_i per slot");
  const int n = f.front().resolution;
  require(psi.resolution == n && family.resolution == n, "resolution mismatch");

  double acc = 0.0;
  for (const DyadicCube& B : family.cubes) {
    double term = std::pow(B.length(), eta + 1.0);
    std::vector<double> mean_b(m);
    for (std::size_t i = 0; i < m; ++i) {
      mean_b[i] = sym.b[i].mean_over(B);
      term *= twisted_avg(f[i], sym.b[i], mean_b[i], sym.t[i], r[i], B);
    }
    // <(prod_i |b_i - b_{i,B}|^{k_i - t_i}) psi>_{s', B}
    double s = 0.0;
    for (const CellRange& range : B.cell_ranges(n))
      for (std::uint32_t c = range.begin; c < range.end; ++c) {
        double v = std::fabs(psi.values[c]);
        for (std::size_t i = 0; i < m; ++i)
          v *= ipow(std::fabs(sym.b[i].values[c] - mean_b[i]), sym.k[i] - sym.t[i]);
        s += (sprime == 1.0) ? v : std::pow(v, sprime);
      }
    s *= psi.cell_width() / B.length();
    term *= (sprime == 1.0) ? s : std::pow(s, 1.0 / sprime);
    acc += term;
  }
  return acc;
}

} // namespace fbmoo
