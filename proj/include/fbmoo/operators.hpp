#pragma once

#include <vector>

#include "fbmoo/grid_function.hpp"

namespace fbmoo {

/// m-linear fractional kernel ( sum_i |x - y_i| )^{eta - m}, optionally
/// truncated to sum_i |x - y_i| > epsilon.
struct KernelSpec {
  int m = 1;
  double eta = 0.5;
  double epsilon = 0.0;
};

/// sup over lattice cubes B containing x of prod_i <|f_i|>_{eta_i, r_i, B}.
double maximal(const std::vector<GridFunction>& f, double x, const Lattice& lattice,
               const std::vector<double>& r, const std::vector<double>& eta);

/// prod_i M_{eta_i, r_i}(f_i)(x); dominates maximal pointwise.
double maximal_tensor(const std::vector<GridFunction>& f, double x, const Lattice& lattice,
                      const std::vector<double>& r, const std::vector<double>& eta);

/// Values of the joint maximal operator on every grid cell (piecewise constant
/// on cells of the functions' resolution).
GridFunction maximal_grid(const std::vector<GridFunction>& f, const Lattice& lattice,
                          const std::vector<double>& r, const std::vector<double>& eta);

/// Midpoint quadrature of the m-linear fractional integral at one point.
/// Cell tuples at zero total distance from x are skipped.
double fractional_integral(const std::vector<GridFunction>& f, double x, const KernelSpec& kernel);

/// Fractional integral at every cell midpoint. m = 1 and m = 2 run in
/// O(4^N) total via sign-region sweeps; the result matches the pointwise
/// quadrature up to roundoff.
GridFunction fractional_integral_grid(const std::vector<GridFunction>& f, const KernelSpec& kernel);

/// One term beta * prod <f_i, ~h_{J_i}> * h_{J_out} of a fractional shift.
struct ShiftTerm {
  DyadicCube P;
  std::vector<DyadicCube> J; // m input cubes then the output cube
  double beta = 0.0;
};

/// Cancellative multilinear fractional shift. Construction enforces
///   |beta| <= prod_i |J_i|^{1/2} / |P|^{m - eta},
/// the complexity geometry len(J_i) = 2^{-j_i} len(P), J_i inside P, and at
/// least one cancellative input slot.
class ShiftSpec {
public:
  static ShiftSpec create(int m, double eta, std::vector<int> complexity,
                          std::vector<bool> input_cancellative, std::vector<ShiftTerm> terms);

  int m() const { return m_; }
  double eta() const { return eta_; }
  const std::vector<int>& complexity() const { return complexity_; }
  const std::vector<bool>& input_cancellative() const { return input_cancellative_; }
  const std::vector<ShiftTerm>& terms() const { return terms_; }

private:
  ShiftSpec() = default;
  int m_ = 0;
  double eta_ = 0.0;
  std::vector<int> complexity_;
  std::vector<bool> input_cancellative_;
  std::vector<ShiftTerm> terms_;
};

GridFunction apply_shift(const ShiftSpec& spec, const std::vector<GridFunction>& f,
                         const Lattice& lattice);

/// Paraproduct sum_P beta_P prod_i <f_i>_P h_P with the Carleson normalization
///   sup_{P0} |P0|^{-2 eta - 1} sum_{P in P0} beta_P^2 <= 1
/// enforced at construction.
class ParaproductSpec {
public:
  static ParaproductSpec create(int m, double eta,
                                std::vector<std::pair<DyadicCube, double>> coefficients);

  int m() const { return m_; }
  double eta() const { return eta_; }
  const std::vector<std::pair<DyadicCube, double>>& coefficients() const { return coefficients_; }
  /// The attained Carleson supremum (<= 1 by construction).
  double carleson_constant() const { return carleson_; }

private:
  ParaproductSpec() = default;
  int m_ = 0;
  double eta_ = 0.0;
  double carleson_ = 0.0;
  std::vector<std::pair<DyadicCube, double>> coefficients_;
};

GridFunction apply_paraproduct(const ParaproductSpec& spec, const std::vector<GridFunction>& f,
                               const Lattice& lattice);

/// Carleson supremum of a coefficient family (also usable before create).
double carleson_constant(double eta, const std::vector<std::pair<DyadicCube, double>>& coefficients);

} // namespace fbmoo
