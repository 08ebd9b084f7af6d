#include "fbmoo/grid_function.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "fbmoo/common.hpp"

namespace fbmoo {

GridFunction::GridFunction(int n, std::vector<double> v) : resolution(n), values(std::move(v)) {
  require(n >= 0 && n <= 26, "resolution out of range");
  require(values.size() == (std::size_t(1) << n), "value count must be 2^resolution");
}

double GridFunction::cell_width() const { return std::ldexp(1.0, -resolution); }

double GridFunction::cell_midpoint(std::size_t k) const {
  return (static_cast<double>(k) + 0.5) * cell_width();
}

double GridFunction::operator()(double x) const {
  require(x >= 0.0 && x < 1.0, "point outside [0,1)");
  auto k = static_cast<std::size_t>(x * static_cast<double>(size()));
  if (k >= size()) k = size() - 1;
  return values[k];
}

bool GridFunction::finite() const {
  for (double v : values)
    if (!std::isfinite(v)) return false;
  return true;
}

bool GridFunction::nonnegative() const {
  for (double v : values)
    if (v < 0.0) return false;
  return true;
}

double GridFunction::integral() const {
  double s = 0.0;
  for (double v : values) s += v;
  return s * cell_width();
}

double GridFunction::integral_over(const DyadicCube& cube) const {
  double s = 0.0;
  for (const CellRange& range : cube.cell_ranges(resolution))
    for (std::uint32_t k = range.begin; k < range.end; ++k) s += values[k];
  return s * cell_width();
}

double GridFunction::mean_over(const DyadicCube& cube) const {
  return integral_over(cube) / cube.length();
}

double GridFunction::lp_norm(double p) const {
  require(p > 0.0, "p must be positive");
  double s = 0.0;
  for (double v : values) s += std::pow(std::fabs(v), p);
  return std::pow(s * cell_width(), 1.0 / p);
}

double GridFunction::max_abs() const {
  double s = 0.0;
  for (double v : values) s = std::max(s, std::fabs(v));
  return s;
}

GridFunction GridFunction::constant(int resolution, double value) {
  return GridFunction(resolution, std::vector<double>(std::size_t(1) << resolution, value));
}

GridFunction GridFunction::sample(int resolution, const std::function<double(double)>& fn,
                                  bool midpoint) {
  std::size_t n = std::size_t(1) << resolution;
  std::vector<double> v(n);
  double h = std::ldexp(1.0, -resolution);
  for (std::size_t k = 0; k < n; ++k)
    v[k] = fn((static_cast<double>(k) + (midpoint ? 0.5 : 0.0)) * h);
  return GridFunction(resolution, std::move(v));
}

GridFunction GridFunction::indicator(int resolution, double lo, double hi) {
  require(0.0 <= lo && lo <= hi && hi <= 1.0, "indicator bounds outside [0,1]");
  std::size_t n = std::size_t(1) << resolution;
  double cells = static_cast<double>(n);
  double lo_cell = lo * cells, hi_cell = hi * cells;
  require(lo_cell == std::floor(lo_cell) && hi_cell == std::floor(hi_cell),
          "indicator bounds not grid-aligned");
  std::vector<double> v(n, 0.0);
  for (std::size_t k = static_cast<std::size_t>(lo_cell); k < static_cast<std::size_t>(hi_cell); ++k)
    v[k] = 1.0;
  return GridFunction(resolution, std::move(v));
}

GridFunction GridFunction::haar_function(const DyadicCube& cube, int resolution,
                                         bool cancellative) {
  require(cube.level + (cancellative ? 1 : 0) <= resolution,
          "grid does not resolve the Haar function");
  GridFunction out = constant(resolution, 0.0);
  double scale = 1.0 / std::sqrt(cube.length());
  if (!cancellative) {
    for (const CellRange& range : cube.cell_ranges(resolution))
      for (std::uint32_t k = range.begin; k < range.end; ++k) out.values[k] = scale;
    return out;
  }
  for (int which = 0; which < 2; ++which) {
    double sign = which == 0 ? scale : -scale;
    for (const CellRange& range : cube.child(which).cell_ranges(resolution))
      for (std::uint32_t k = range.begin; k < range.end; ++k) out.values[k] = sign;
  }
  return out;
}

namespace {

GridFunction zip(const GridFunction& a, const GridFunction& b, double (*op)(double, double)) {
  require(a.resolution == b.resolution, "resolution mismatch");
  GridFunction out = a;
  for (std::size_t k = 0; k < out.size(); ++k) out.values[k] = op(a.values[k], b.values[k]);
  return out;
}

} // namespace

GridFunction operator+(const GridFunction& a, const GridFunction& b) {
  return zip(a, b, [](double x, double y) { return x + y; });
}
GridFunction operator-(const GridFunction& a, const GridFunction& b) {
  return zip(a, b, [](double x, double y) { return x - y; });
}
GridFunction operator*(const GridFunction& a, const GridFunction& b) {
  return zip(a, b, [](double x, double y) { return x * y; });
}
GridFunction operator*(double c, const GridFunction& a) {
  GridFunction out = a;
  for (double& v : out.values) v *= c;
  return out;
}

GridFunction pointwise_pow(const GridFunction& f, double e) {
  GridFunction out = f;
  for (double& v : out.values) v = std::pow(v, e);
  return out;
}

double inner_product(const GridFunction& f, const GridFunction& g) {
  require(f.resolution == g.resolution, "resolution mismatch");
  double s = 0.0;
  for (std::size_t k = 0; k < f.size(); ++k) s += f.values[k] * g.values[k];
  return s * f.cell_width();
}

PowerPrefix::PowerPrefix(const GridFunction& f, double exponent, bool absolute)
    : resolution_(f.resolution), prefix_(f.size() + 1, 0.0) {
  double h = f.cell_width();
  for (std::size_t k = 0; k < f.size(); ++k) {
    double v = absolute ? std::fabs(f.values[k]) : f.values[k];
    prefix_[k + 1] = prefix_[k] + ((exponent == 1.0) ? v : std::pow(v, exponent)) * h;
  }
}

double PowerPrefix::integral(const CellRange& range) const {
  return prefix_[range.end] - prefix_[range.begin];
}

double PowerPrefix::integral(const DyadicCube& cube) const {
  double s = 0.0;
  for (const CellRange& range : cube.cell_ranges(resolution_)) s += integral(range);
  return s;
}

double avg(const GridFunction& f, const DyadicCube& Q, double r, double eta) {
  require(r >= 1.0, "r must be >= 1");
  double er = eta * r;
  require(er >= 0.0 && er <= 1.0, "eta*r outside [0,1]");
  double s = 0.0;
  for (const CellRange& range : Q.cell_ranges(f.resolution))
    for (std::uint32_t k = range.begin; k < range.end; ++k)
      s += std::pow(std::fabs(f.values[k]), r);
  s *= f.cell_width();
  return std::pow(std::pow(Q.length(), -(1.0 - er)) * s, 1.0 / r);
}

double maximal_avg(const GridFunction& f, const DyadicCube& Q, const Lattice& lattice,
                   double r, double eta) {
  require(Q.shift == lattice.shift, "cube and lattice use different grids");
  double best = 0.0;
  DyadicCube cur = Q;
  while (true) {
    best = std::max(best, avg(f, cur, r, eta));
    if (cur.level == 0) break;
    cur = cur.parent();
  }
  return best;
}

double norm_avg(const GridFunction& f, const DyadicCube& Q, double t) {
  if (std::isinf(t)) {
    double s = 0.0;
    for (const CellRange& range : Q.cell_ranges(f.resolution))
      for (std::uint32_t k = range.begin; k < range.end; ++k)
        s = std::max(s, f.values[k]);
    return s;
  }
  require(t > 0.0, "bracket exponent must be positive");
  double s = 0.0;
  for (const CellRange& range : Q.cell_ranges(f.resolution))
    for (std::uint32_t k = range.begin; k < range.end; ++k)
      s += std::pow(f.values[k], t);
  s *= f.cell_width() / Q.length();
  return std::pow(s, 1.0 / t);
}

double YoungFunction::operator()(double t) const {
  switch (kind) {
    case Kind::Power: return std::pow(t, parameter);
    case Kind::LlogL: return t * std::pow(std::log(std::exp(1.0) + t), parameter);
    case Kind::ExpL: return std::expm1(std::pow(t, parameter));
  }
  return 0.0;
}

double YoungFunction::unit_inverse() const {
  switch (kind) {
    case Kind::Power: return 1.0;
    case Kind::ExpL: return std::pow(std::log(2.0), 1.0 / parameter);
    case Kind::LlogL: break;
  }
  // t log^r(e+t) = 1 has a unique root in (0,1]; bisect once.
  double lo = 0.0, hi = 1.0;
  for (int it = 0; it < 80; ++it) {
    double mid = 0.5 * (lo + hi);
    ((*this)(mid) < 1.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double luxemburg_norm(const GridFunction& f, const DyadicCube& Q, const YoungFunction& phi) {
  require(phi.parameter > 0.0, "Young function parameter must be positive");
  std::vector<double> absvals;
  for (const CellRange& range : Q.cell_ranges(f.resolution))
    for (std::uint32_t k = range.begin; k < range.end; ++k)
      absvals.push_back(std::fabs(f.values[k]));
  double msup = 0.0;
  for (double v : absvals) msup = std::max(msup, v);
  if (msup == 0.0) return 0.0;

  const double cellfrac = f.cell_width() / Q.length();
  auto mean_phi = [&](double lambda) {
    double s = 0.0;
    for (double v : absvals) s += phi(v / lambda);
    return s * cellfrac;
  };

  double hi = msup / phi.unit_inverse();
  while (mean_phi(hi) > 1.0) hi *= 2.0; // guard against roundoff at the bracket edge
  double lo = 1e-12 * msup;
  if (mean_phi(lo) <= 1.0) return lo;
  while (hi - lo > 1e-9 * hi) {
    double mid = 0.5 * (lo + hi);
    (mean_phi(mid) <= 1.0 ? hi : lo) = mid;
  }
  return hi;
}

double bmo_norm(const GridFunction& b, const Lattice& lattice) {
  PowerPrefix sums(b, 1.0, false);
  double best = 0.0;
  for (const DyadicCube& B : lattice.all_cubes()) {
    double mean = sums.integral(B) / B.length();
    double osc = 0.0;
    for (const CellRange& range : B.cell_ranges(b.resolution))
      for (std::uint32_t k = range.begin; k < range.end; ++k)
        osc += std::fabs(b.values[k] - mean);
    best = std::max(best, osc * b.cell_width() / B.length());
  }
  return best;
}

double bmo_norm_weighted(const GridFunction& b, const GridFunction& omega,
                         const Lattice& lattice) {
  require(b.resolution == omega.resolution, "resolution mismatch");
  PowerPrefix sums(b, 1.0, false);
  PowerPrefix wsums(omega, 1.0, false);
  double best = 0.0;
  for (const DyadicCube& B : lattice.all_cubes()) {
    double wB = wsums.integral(B);
    require(wB > 0.0, "degenerate weight: omega(B) = 0 on a lattice cube");
    double mean = sums.integral(B) / B.length();
    double osc = 0.0;
    for (const CellRange& range : B.cell_ranges(b.resolution))
      for (std::uint32_t k = range.begin; k < range.end; ++k)
        osc += std::fabs(b.values[k] - mean);
    best = std::max(best, osc * b.cell_width() / wB);
  }
  return best;
}

namespace {

/// Squared Haar coefficients <b, h_Q>^2 for all lattice cubes resolvable on
/// b's grid, then subtree sums in level-major order.
std::vector<double> haar_subtree_sums(const GridFunction& b, const Lattice& lattice) {
  const int coeff_depth = std::min(lattice.max_level, b.resolution - 1);
  PowerPrefix sums(b, 1.0, false);
  auto flat = [](int level, std::int64_t index) {
    return static_cast<std::size_t>(((std::int64_t(1) << level) - 1) + index);
  };
  std::vector<double> subtree(lattice.cube_count(), 0.0);
  for (int k = lattice.max_level; k >= 0; --k) {
    for (std::int64_t j = 0; j < (std::int64_t(1) << k); ++j) {
      DyadicCube Q = lattice.cube(k, j);
      double own = 0.0;
      if (k <= coeff_depth) {
        double scale = 1.0 / std::sqrt(Q.length());
        double coeff = scale * (sums.integral(Q.child(0)) - sums.integral(Q.child(1)));
        own = coeff * coeff;
      }
      double acc = own;
      if (k < lattice.max_level)
        acc += subtree[flat(k + 1, 2 * j)] + subtree[flat(k + 1, 2 * j + 1)];
      subtree[flat(k, j)] = acc;
    }
  }
  return subtree;
}

} // namespace

double fbmo_norm_haar(const GridFunction& b, const Lattice& lattice, double eta) {
  require(lattice.max_level <= b.resolution, "lattice deeper than the grid");
  std::vector<double> subtree = haar_subtree_sums(b, lattice);
  double best = 0.0;
  std::size_t flat = 0;
  for (int k = 0; k <= lattice.max_level; ++k) {
    double len = std::ldexp(1.0, -k);
    double scale = std::pow(len, 2.0 * eta - 1.0);
    for (std::int64_t j = 0; j < (std::int64_t(1) << k); ++j, ++flat)
      best = std::max(best, std::sqrt(scale * subtree[flat]));
  }
  return best;
}

double bmo2_norm_direct(const GridFunction& b, const Lattice& lattice) {
  require(lattice.max_level <= b.resolution, "lattice deeper than the grid");
  // Coarsen to the finest martingale level of the lattice so the comparison
  // with the Haar sum is a finite-dimensional identity.
  int coarse = std::min(lattice.max_level + 1, b.resolution);
  GridFunction bt = b;
  if (coarse < b.resolution) {
    std::size_t block = std::size_t(1) << (b.resolution - coarse);
    for (std::size_t j = 0; j < (std::size_t(1) << coarse); ++j) {
      double mean = 0.0;
      for (std::size_t k = 0; k < block; ++k) mean += b.values[j * block + k];
      mean /= static_cast<double>(block);
      for (std::size_t k = 0; k < block; ++k) bt.values[j * block + k] = mean;
    }
  }
  double best = 0.0;
  for (const DyadicCube& R : lattice.all_cubes()) {
    double mean = bt.mean_over(R);
    double s = 0.0;
    for (const CellRange& range : R.cell_ranges(bt.resolution))
      for (std::uint32_t k = range.begin; k < range.end; ++k) {
        double d = bt.values[k] - mean;
        s += d * d;
      }
    best = std::max(best, std::sqrt(s * bt.cell_width() / R.length()));
  }
  return best;
}

GridFunction martingale_difference(const GridFunction& f, const DyadicCube& cube) {
  require(cube.level + 1 <= f.resolution, "grid does not resolve the cube's children");
  GridFunction out = GridFunction::constant(f.resolution, 0.0);
  double parent_mean = f.mean_over(cube);
  for (int which = 0; which < 2; ++which) {
    DyadicCube c = cube.child(which);
    double delta = f.mean_over(c) - parent_mean;
    for (const CellRange& range : c.cell_ranges(f.resolution))
      for (std::uint32_t k = range.begin; k < range.end; ++k) out.values[k] = delta;
  }
  return out;
}

void write_csv(const GridFunction& f, const std::string& path) {
  std::ofstream out(path);
  require(out.good(), "cannot open CSV for writing: " + path);
  out << "index,value\n";
  out.precision(17);
  for (std::size_t k = 0; k < f.size(); ++k) out << k << "," << f.values[k] << "\n";
}

GridFunction read_csv(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), "cannot open CSV: " + path);
  std::string line;
  require(static_cast<bool>(std::getline(in, line)) && line.rfind("index,value", 0) == 0,
          "CSV header must be 'index,value'");
  std::vector<double> values;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto comma = line.find(',');
    require(comma != std::string::npos, "malformed CSV row: " + line);
    values.push_back(std::stod(line.substr(comma + 1)));
  }
  std::size_t n = values.size();
  require(n > 0 && (n & (n - 1)) == 0, "CSV row count is not a power of two");
  int resolution = 0;
  while ((std::size_t(1) << resolution) < n) ++resolution;
  return GridFunction(resolution, std::move(values));
}

} // namespace fbmoo
