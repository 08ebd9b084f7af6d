#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "fbmoo/rational.hpp"

namespace fbmoo {

/// Half-open interval of [0,1) treated as a circle: cell index ranges may wrap.
struct CellRange {
  std::uint32_t begin = 0;
  std::uint32_t end = 0; // half-open
};

/// Dyadic interval [ (j + shift·2^k)·2^{-k} mod 1, + 2^{-k} ) on the unit
/// circle. shift is a dyadic rational; 0 gives the standard grid.
struct DyadicCube {
  int level = 0;
  std::int64_t index = 0;
  Rational shift = Rational(0);

  double length() const;
  /// Left endpoint in [0,1) after the shift, before any wrap of the body.
  double left() const;
  bool contains(double x) const;
  bool wraps() const;

  DyadicCube parent() const;
  DyadicCube child(int which) const; // 0 = left, 1 = right
  bool is_root() const { return level == 0; }

  /// Grid cells covered at the given resolution (one or two ranges).
  /// Requires level <= resolution and shift with denominator | 2^resolution.
  std::vector<CellRange> cell_ranges(int resolution) const;

  bool operator==(const DyadicCube& o) const {
    return level == o.level && index == o.index && shift == o.shift;
  }
};

/// Scale separation + boundary proximity classification.
enum class CubeClass { Good, Bad };

/// All dyadic cubes of levels 0..max_level over one (possibly shifted) grid.
struct Lattice {
  int max_level = 0;
  Rational shift = Rational(0);

  DyadicCube root() const { return DyadicCube{0, 0, shift}; }
  DyadicCube cube(int level, std::int64_t index) const { return DyadicCube{level, index, shift}; }
  std::size_t cube_count() const { return (std::size_t(2) << max_level) - 1; }

  /// Cubes in level-major, index-minor order (the fixed traversal order).
  std::vector<DyadicCube> all_cubes() const;

  /// Index of the level-k cube containing x.
  std::int64_t index_containing(double x, int level) const;
  /// root..leaf chain of cubes containing x.
  std::vector<DyadicCube> chain_containing(double x) const;
};

/// errors: max_level out of [0,24]; shift not a dyadic rational of
/// denominator <= 2^max_level, or outside [0,1).
Lattice build_lattice(int max_level, const Rational& shift);

/// Haar function value at x: +/- |I|^{-1/2} on the two children, 0 outside.
/// cancellative = false gives h^0 = |I|^{-1/2} chi_I.
double haar(const DyadicCube& cube, double x, bool cancellative = true);

/// Distance from cube I to the boundary points of cube J, on the circle.
double boundary_distance(const DyadicCube& I, const DyadicCube& J);

/// Bad iff some lattice cube J has len(J) >= 2^r len(I) and
/// dist(I, bd J) <= len(I)^lambda len(J)^{1-lambda},
/// lambda = delta / (2 [n(2-eta)+delta]) with n = 1.
CubeClass classify_good_bad(const DyadicCube& cube, const Lattice& lattice, int r,
                            double eta, double delta);

} // namespace fbmoo
