#pragma once

#include <functional>
#include <string>
#include <vector>

#include "fbmoo/dyadic.hpp"

namespace fbmoo {

/// Piecewise-constant function on the uniform 2^N-cell partition of [0,1).
/// values[k] is the value on [k 2^-N, (k+1) 2^-N).
struct GridFunction {
  int resolution = 0;
  std::vector<double> values;

  GridFunction() = default;
  GridFunction(int n, std::vector<double> v);

  std::size_t size() const { return values.size(); }
  double cell_width() const;
  double cell_midpoint(std::size_t k) const;
  double operator()(double x) const;

  bool finite() const;
  bool nonnegative() const;

  double integral() const;
  double integral_over(const DyadicCube& cube) const;
  double mean_over(const DyadicCube& cube) const;
  /// L^p norm on [0,1); p = infinity not supported here (use max_abs).
  double lp_norm(double p) const;
  double max_abs() const;

  static GridFunction constant(int resolution, double value);
  /// Samples fn at cell midpoints (or left endpoints when midpoint = false).
  static GridFunction sample(int resolution, const std::function<double(double)>& fn,
                             bool midpoint = true);
  /// chi_[lo,hi) for grid-aligned lo, hi.
  static GridFunction indicator(int resolution, double lo, double hi);
  /// The Haar function of a cube materialized at the given resolution.
  static GridFunction haar_function(const DyadicCube& cube, int resolution,
                                    bool cancellative = true);
};

GridFunction operator+(const GridFunction& a, const GridFunction& b);
GridFunction operator-(const GridFunction& a, const GridFunction& b);
GridFunction operator*(const GridFunction& a, const GridFunction& b);
GridFunction operator*(double c, const GridFunction& a);

/// Pointwise power x -> f(x)^e; f must be positive when e is fractional.
GridFunction pointwise_pow(const GridFunction& f, double e);

/// Exact grid quadrature of f·g.
double inner_product(const GridFunction& f, const GridFunction& g);

/// O(1) integrals of |f|^exponent over aligned cubes after O(2^N) setup.
class PowerPrefix {
public:
  PowerPrefix(const GridFunction& f, double exponent, bool absolute = true);
  /// integral of |f|^exponent over the cube.
  double integral(const DyadicCube& cube) const;
  double integral(const CellRange& range) const;

private:
  int resolution_;
  std::vector<double> prefix_; // prefix_[k] = sum of first k cell values * width
};

/// Fractional average bump  < f >_{eta,r,Q} = ( |Q|^{-(1-eta r)} int_Q |f|^r )^{1/r}.
/// errors: eta*r outside [0,1]; cube not resolvable on f's grid.
double avg(const GridFunction& f, const DyadicCube& Q, double r, double eta);

/// sup of avg over lattice cubes containing Q (including Q itself).
double maximal_avg(const GridFunction& f, const DyadicCube& Q, const Lattice& lattice,
                   double r, double eta);

/// Normalized exponent bracket ((1/|Q|) int_Q f^t)^{1/t}; t = +infinity gives
/// the grid ess-sup. Used by the weight classes; f must be nonnegative.
double norm_avg(const GridFunction& f, const DyadicCube& Q, double t);

/// Young function kinds: t^p, t log^r(e+t), e^{t^r} - 1.
struct YoungFunction {
  enum class Kind { Power, LlogL, ExpL };
  Kind kind = Kind::Power;
  double parameter = 1.0;

  double operator()(double t) const;
  /// Solution of Phi(t) = 1, used to bracket the Luxemburg gauge.
  double unit_inverse() const;

  static YoungFunction power(double p) { return {Kind::Power, p}; }
  static YoungFunction llogl(double r) { return {Kind::LlogL, r}; }
  static YoungFunction expl(double r) { return {Kind::ExpL, r}; }
};

/// Normalized Luxemburg gauge inf{ l > 0 : (1/|Q|) int_Q Phi(|f|/l) <= 1 },
/// bisected to relative tolerance 1e-9. f == 0 on Q returns 0.
double luxemburg_norm(const GridFunction& f, const DyadicCube& Q, const YoungFunction& phi);

/// sup_B (1/|B|) int_B |b - b_B| over lattice cubes.
double bmo_norm(const GridFunction& b, const Lattice& lattice);

/// Weighted variant with denominator omega(B); errors on omega(B) <= 0.
double bmo_norm_weighted(const GridFunction& b, const GridFunction& omega,
                         const Lattice& lattice);

/// sup_R ( |R|^{2 eta - 1}  sum_{Q subset R} <b, h_Q>^2 )^{1/2} over the lattice;
/// the Haar sum runs over lattice cubes resolvable on b's grid.
double fbmo_norm_haar(const GridFunction& b, const Lattice& lattice, double eta);

/// sup_R <|b - b_R|>_{2,R} computed on b coarsened to the lattice's finest
/// martingale level, so it matches fbmo_norm_haar at eta = 0 exactly.
double bmo2_norm_direct(const GridFunction& b, const Lattice& lattice);

/// Martingale difference Delta_I f as a grid function (zero outside I).
/// errors: grid does not resolve the children of the cube.
GridFunction martingale_difference(const GridFunction& f, const DyadicCube& cube);

/// CSV serialization: header "index,value", one row per cell.
void write_csv(const GridFunction& f, const std::string& path);
GridFunction read_csv(const std::string& path);

} // namespace fbmoo
