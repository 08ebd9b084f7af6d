#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fbmoo/grid_function.hpp"

#include <json.hpp>

namespace fbmoo {

/// A family of cubes with designated subsets E_Q (stored as explicit grid
/// cells) and sparsity parameter delta: E_Q inside Q, pairwise disjoint,
/// |E_Q| >= delta |Q|.
struct SparseFamily {
  double delta = 0.5;
  int resolution = 0;
  std::vector<DyadicCube> cubes;
  std::vector<std::vector<std::uint32_t>> exceptional_cells;

  double exceptional_measure(std::size_t i) const;
};

struct SparseCertificate {
  bool sparse = true;
  /// Index of the first cube violating a condition, -1 when sparse.
  long long first_violation = -1;
  std::string reason;
};

SparseCertificate is_sparse(const SparseFamily& family);

/// Serialization: {delta, resolution, cubes:[{level,index,shift}],
/// exceptional_cells:[[cell indices]]}.
nlohmann::json sparse_to_json(const SparseFamily& family);
SparseFamily sparse_from_json(const nlohmann::json& j);

/// One stopping-time node: the cube and the total measure of its selected
/// (maximal over-threshold) descendants, for Markov-bound audits.
struct StoppingNode {
  DyadicCube cube;
  double selected_measure = 0.0;
};

/// Calderon-Zygmund stopping time. Starting at P0, the maximal dyadic
/// P in P0 with sum_i <f_i>_P / <f_i>_{P0} + <g>_P / <g>_{P0} > C0(delta)
/// are selected, E_{P0} = P0 minus their union, and the construction recurses.
/// C0(delta) = (m+1)/(1-delta) makes the Markov bound
/// sum |P| <= (1-delta)|P0| hold at every node. Zero-average inputs drop out
/// of the ratio sum.
SparseFamily build_sparse_cz(const std::vector<GridFunction>& f, const GridFunction& g,
                             const DyadicCube& P0, double delta,
                             std::vector<StoppingNode>* trace = nullptr);

/// Symbols b_i with orders k_i and splits t_i (0 <= t <= k component-wise).
struct SymbolData {
  std::vector<GridFunction> b;
  std::vector<int> k;
  std::vector<int> t;

  static SymbolData none(int m, int resolution);
  void validate(std::size_t m) const;
};

/// sum_{B in S} |B|^eta prod_i |b_i(x)-b_{i,B}|^{k_i-t_i}
///                      <|f_i (b_i-b_{i,B})^{t_i}|>_{r_i,B} chi_B(x).
double sparse_operator(const SparseFamily& family, const SymbolData& sym,
                       const std::vector<GridFunction>& f, const std::vector<double>& r,
                       double eta, double x);

/// The same sum evaluated on every grid cell.
GridFunction sparse_operator_grid(const SparseFamily& family, const SymbolData& sym,
                                  const std::vector<GridFunction>& f,
                                  const std::vector<double>& r, double eta);

/// sum_B |B|^{eta+1} prod_i <|f_i (b_i-b_{i,B})^{t_i}|>_{r_i,B}
///                        * <(prod_i |b_i-b_{i,B}|^{k_i-t_i}) psi>_{s',B}.
double sparse_form(const SparseFamily& family, const SymbolData& sym,
                   const std::vector<GridFunction>& f, const GridFunction& psi,
                   const std::vector<double>& r, double sprime, double eta);

} // namespace fbmoo
