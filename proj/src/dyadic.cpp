#include "fbmoo/dyadic.hpp"

#include <algorithm>
#include <cmath>

#include "fbmoo/common.hpp"

namespace fbmoo {

namespace {

double frac01(double x) {
  double y = x - std::floor(x);
  return (y >= 1.0) ? 0.0 : y;
}

} // namespace

double DyadicCube::length() const { return std::ldexp(1.0, -level); }

double DyadicCube::left() const {
  return frac01(static_cast<double>(index) * length() + shift.to_double());
}

bool DyadicCube::wraps() const { return left() + length() > 1.0 + 1e-15; }

bool DyadicCube::contains(double x) const {
  double y = frac01(x - shift.to_double());
  auto j = static_cast<std::int64_t>(std::floor(y * std::ldexp(1.0, level)));
  j = std::clamp<std::int64_t>(j, 0, (std::int64_t(1) << level) - 1);
  return j == index;
}

DyadicCube DyadicCube::parent() const {
  require(level > 0, "root cube has no parent");
  return DyadicCube{level - 1, index / 2, shift};
}

DyadicCube DyadicCube::child(int which) const {
  require(which == 0 || which == 1, "child index must be 0 or 1");
  return DyadicCube{level + 1, 2 * index + which, shift};
}

std::vector<CellRange> DyadicCube::cell_ranges(int resolution) const {
  require(level <= resolution, "cube finer than grid resolution");
  const std::int64_t cells = std::int64_t(1) << resolution;
  // shift as q / 2^resolution, exactly.
  const long long den = shift.den();
  require(den > 0 && (cells % den) == 0,
          "shift is not a dyadic rational at the grid resolution");
  const std::int64_t offset = shift.num() * (cells / den);
  const std::int64_t count = std::int64_t(1) << (resolution - level);
  std::int64_t begin = (index * count + offset) % cells;
  if (begin < 0) begin += cells;
  if (begin + count <= cells)
    return {CellRange{static_cast<std::uint32_t>(begin),
                      static_cast<std::uint32_t>(begin + count)}};
  return {CellRange{static_cast<std::uint32_t>(begin), static_cast<std::uint32_t>(cells)},
          CellRange{0, static_cast<std::uint32_t>(begin + count - cells)}};
}

std::vector<DyadicCube> Lattice::all_cubes() const {
  std::vector<DyadicCube> out;
  out.reserve(cube_count());
  for (int k = 0; k <= max_level; ++k)
    for (std::int64_t j = 0; j < (std::int64_t(1) << k); ++j)
      out.push_back(DyadicCube{k, j, shift});
  return out;
}

std::int64_t Lattice::index_containing(double x, int level) const {
  double y = x - shift.to_double();
  y -= std::floor(y);
  auto j = static_cast<std::int64_t>(std::floor(y * std::ldexp(1.0, level)));
  return std::clamp<std::int64_t>(j, 0, (std::int64_t(1) << level) - 1);
}

std::vector<DyadicCube> Lattice::chain_containing(double x) const {
  std::vector<DyadicCube> chain;
  chain.reserve(max_level + 1);
  std::int64_t j = index_containing(x, max_level);
  for (int k = max_level; k >= 0; --k) {
    chain.push_back(DyadicCube{k, j, shift});
    j /= 2;
  }
  std::reverse(chain.begin(), chain.end());
  return chain;
}

Lattice build_lattice(int max_level, const Rational& shift) {
  require(max_level >= 0 && max_level <= 24, "max_level out of range [0, 24]");
  require(shift >= Rational(0) && shift < Rational(1), "shift outside [0,1)");
  const long long den = shift.den();
  // power-of-two denominator not exceeding 2^max_level
  long long cells = 1ll << max_level;
  require((den & (den - 1)) == 0 && cells % den == 0,
          "shift is not a dyadic rational of denominator <= 2^max_level");
  return Lattice{max_level, shift};
}

double haar(const DyadicCube& cube, double x, bool cancellative) {
  require(x >= 0.0 && x < 1.0, "point outside [0,1)");
  if (!cube.contains(x)) return 0.0;
  double scale = 1.0 / std::sqrt(cube.length());
  if (!cancellative) return scale;
  return cube.child(0).contains(x) ? scale : -scale;
}

double boundary_distance(const DyadicCube& I, const DyadicCube& J) {
  // Distance on the circle from the body of I to either endpoint of J.
  const double endpoints[2] = {J.left(), frac01(J.left() + J.length())};
  const double a = I.left();
  const double len = I.length();
  double best = 1.0;
  for (double e : endpoints) {
    // distance from point e to the arc [a, a+len) mod 1
    double rel = frac01(e - a);
    double d = (rel <= len) ? 0.0 : std::min(rel - len, 1.0 - rel);
    best = std::min(best, d);
  }
  return best;
}

CubeClass classify_good_bad(const DyadicCube& cube, const Lattice& lattice, int r,
                            double eta, double delta) {
  require(r >= 1, "separation parameter r must be >= 1");
  require(delta > 0.0 && delta <= 1.0, "delta outside (0,1]");
  const double li = cube.length();
  const double lambda = delta / (2.0 * ((2.0 - eta) + delta)); // n = 1
  for (int k = 0; k <= lattice.max_level; ++k) {
    double lj = std::ldexp(1.0, -k);
    if (lj < std::ldexp(1.0, r) * li) break; // levels are ordered coarse to fine
    double threshold = std::pow(li, lambda) * std::pow(lj, 1.0 - lambda);
    for (std::int64_t j = 0; j < (std::int64_t(1) << k); ++j) {
      if (boundary_distance(cube, lattice.cube(k, j)) <= threshold) return CubeClass::Bad;
    }
  }
  return CubeClass::Good;
}

} // namespace fbmoo
