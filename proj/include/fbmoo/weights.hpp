#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fbmoo/grid_function.hpp"
#include "fbmoo/rational.hpp"

#include <json.hpp>

namespace fbmoo {

/// Exponent data (m, eta, p, r, s) with every derived exponent carried in
/// exact rational arithmetic. All entries are stored as reciprocals, so the
/// infinite exponents p_i = s = infinity are the honest value 0.
struct ExponentTuple {
  int m = 1;
  Rational eta{0};
  std::vector<Rational> inv_p; // 1/p_i, in [0,1)
  std::vector<Rational> inv_r; // 1/r_i, in (0,1]
  Rational inv_s{0};           // 1/s, in [0,1]

  // Derived.
  Rational inv_ptilde{0};            // 1/p~ = sum 1/p_i - eta
  Rational inv_rtilde{0};            // 1/r~ = sum 1/r_i - eta
  std::vector<Rational> inv_delta;   // m+1 entries; 1/delta_i = 1/r_i - 1/p_i,
                                     // 1/delta_{m+1} = 1/p~ - 1/s
  Rational inv_gamma{0};             // sum 1/r_i + 1/s'
  Rational zeta{0};                  // sum 1/delta_i = 1/gamma - (1+eta)
  std::vector<Rational> inv_theta;   // m+1 entries, 1/theta_i = zeta - 1/delta_i
  Rational inv_varrho{0};            // 1/delta_m + 1/delta_{m+1}
  bool degenerate = false;           // some 1/delta_i vanishes

  /// Theta = max{ p_i/(p_i - r_i), p~'/(p~' - s') }; nullopt when infinite.
  std::optional<Rational> theta_sharp;
  /// Xi = max{ p_i r_i/(p_i - r_i), p~' s'/(p~' - s') }; nullopt when infinite.
  std::optional<Rational> xi;

  double delta_exp(std::size_t i) const;  // delta_i as double (inf -> HUGE_VAL)
  double r_exp(std::size_t i) const;      // r_i as double
  double ptilde() const;                  // p~ as double
};

/// Validates admissibility ((r,s) below (p,p~): r_i <= p_i, p~ <= s, p~ > 0)
/// and computes every derived exponent. Violations throw with the violated
/// relation named.
ExponentTuple extrapolation_exponents(int m, const Rational& eta, std::vector<Rational> p,
                                      std::vector<Rational> r, const Rational& s);

/// Strictly positive weights omega_1..omega_m on a common grid.
struct WeightTuple {
  std::vector<GridFunction> omega;

  GridFunction product() const;
  void validate() const;
};

/// Muckenhoupt constant sup_B <w>_B <w^{1-p'}>_B^{p-1} over lattice cubes;
/// p = 1 uses the ess-sup form sup_B <w>_B max_B(1/w).
double ap_constant(const GridFunction& w, double p, const Lattice& lattice);

struct ConstantReport {
  double constant = 1.0;
  DyadicCube attaining_cube;
  nlohmann::json to_json() const;
};

ConstantReport ap_constant_report(const GridFunction& w, double p, const Lattice& lattice,
                                  const std::string& per_cube_csv = std::string());

/// Multiparameter multilinear fractional weight characteristic
///   sup_B prod_j <omega_j^{-1}>_{delta_j, B} * <omega>_{delta_{m+1}, B}
/// with normalized exponent brackets (ess-sup when 1/delta_j = 0).
double multilinear_constant(const WeightTuple& w, const ExponentTuple& exps,
                            const Lattice& lattice);

ConstantReport multilinear_constant_report(const WeightTuple& w, const ExponentTuple& exps,
                                           const Lattice& lattice,
                                           const std::string& per_cube_csv = std::string());

/// Two-exponent weighted class constant of W relative to d(mu) = mu dx:
///   sup_B (avg_B W^tau dmu)^{1/tau} (avg_B W^{-a'} dmu)^{1/a'},  a' = a/(a-1),
/// with ess-sup branches when a = 1 or tau = infinity.
double weighted_two_exponent_constant(const GridFunction& W, const GridFunction& mu,
                                      double a, double tau, const Lattice& lattice);

struct FactorizationReport {
  GridFunction omega_tilde; // (prod_{i<m} omega_i)^varrho
  GridFunction W;           // omega^{r_m} omega_tilde^{-r_m/delta_{m+1}}
  double base_constant = 1.0; // [w]_{A_{(p,p~),(r,s)}}
  struct Check {
    std::string name;
    double measured = 1.0;
    double bound = 1.0;
    bool pass = true;
  };
  std::vector<Check> checks; // the factor-constant inequalities
  bool all_pass() const;
};

/// Splits the weight tuple per the factorization identities and measures the
/// claimed constant inequalities on the lattice. Requires 1/varrho > 0 and
/// 1/theta_i > 0 for i < m.
FactorizationReport factorize_weights(const WeightTuple& w, const ExponentTuple& exps,
                                      const Lattice& lattice);

/// Rebuilds omega_m = W^{1/r_m} omega_tilde^{-1/delta_m} from the small
/// weights and W; the inverse of factorize_weights on its image.
WeightTuple inverse_factorize(const std::vector<GridFunction>& omega_small,
                              const GridFunction& W, const ExponentTuple& exps);

/// Bloom weight (omega_i / mu_i)^{1/k_i}; errors on k_i = 0.
GridFunction bloom_weight(const GridFunction& omega_i, const GridFunction& mu_i, int k_i);

/// Midpoint-sampled x^exponent; errors on exponent <= -1 (not integrable).
GridFunction power_weight(double exponent, int resolution);

} // namespace fbmoo
