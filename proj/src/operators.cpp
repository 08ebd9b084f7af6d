#include "fbmoo/operators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "fbmoo/common.hpp"

namespace fbmoo {

namespace {

void check_bump_exponents(std::size_t m, const std::vector<double>& r,
                          const std::vector<double>& eta) {
  require(r.size() == m && eta.size() == m, "need one (r_i, eta_i) per slot");
  for (std::size_t i = 0; i < m; ++i) {
    require(r[i] >= 1.0, "r_i must be >= 1");
    require(eta[i] * r[i] >= 0.0 && eta[i] * r[i] <= 1.0, "eta_i r_i outside [0,1]");
  }
}

void check_common_grid(const std::vector<GridFunction>& f) {
  require(!f.empty(), "need at least one input function");
  for (const GridFunction& g : f)
    require(g.resolution == f.front().resolution, "input resolutions differ");
}

} // namespace

double maximal(const std::vector<GridFunction>& f, double x, const Lattice& lattice,
               const std::vector<double>& r, const std::vector<double>& eta) {
  check_common_grid(f);
  check_bump_exponents(f.size(), r, eta);
  require(x >= 0.0 && x < 1.0, "point outside [0,1)");
  double best = 0.0;
  for (const DyadicCube& B : lattice.chain_containing(x)) {
    double prod = 1.0;
    for (std::size_t i = 0; i < f.size(); ++i) prod *= avg(f[i], B, r[i], eta[i]);
    best = std::max(best, prod);
  }
  return best;
}

double maximal_tensor(const std::vector<GridFunction>& f, double x, const Lattice& lattice,
                      const std::vector<double>& r, const std::vector<double>& eta) {
  check_common_grid(f);
  check_bump_exponents(f.size(), r, eta);
  require(x >= 0.0 && x < 1.0, "point outside [0,1)");
  double prod = 1.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    double best = 0.0;
    for (const DyadicCube& B : lattice.chain_containing(x))
      best = std::max(best, avg(f[i], B, r[i], eta[i]));
    prod *= best;
  }
  return prod;
}

GridFunction maximal_grid(const std::vector<GridFunction>& f, const Lattice& lattice,
                          const std::vector<double>& r, const std::vector<double>& eta) {
  check_common_grid(f);
  check_bump_exponents(f.size(), r, eta);
  const int n = f.front().resolution;
  require(lattice.max_level <= n, "lattice deeper than the grid");
  std::vector<PowerPrefix> sums;
  sums.reserve(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) sums.emplace_back(f[i], r[i]);

  GridFunction out = GridFunction::constant(n, 0.0);
  for (int k = 0; k <= lattice.max_level; ++k) {
    double len = std::ldexp(1.0, -k);
    for (std::int64_t j = 0; j < (std::int64_t(1) << k); ++j) {
      DyadicCube B = lattice.cube(k, j);
      double prod = 1.0;
      for (std::size_t i = 0; i < f.size(); ++i) {
        double er = eta[i] * r[i];
        prod *= std::pow(std::pow(len, -(1.0 - er)) * sums[i].integral(B), 1.0 / r[i]);
      }
      for (const CellRange& range : B.cell_ranges(n))
        for (std::uint32_t c = range.begin; c < range.end; ++c)
          out.values[c] = std::max(out.values[c], prod);
    }
  }
  return out;
}

namespace {

/// Kernel on integer total distances: w[t] = (t h)^{eta-m}, with w[0] = 0
/// (the all-coincident tuple is skipped) and w[t] = 0 for t h <= epsilon.
std::vector<double> kernel_table(std::size_t tmax, double h, const KernelSpec& kernel) {
  std::vector<double> w(tmax + 1, 0.0);
  double power = kernel.eta - static_cast<double>(kernel.m);
  for (std::size_t t = 1; t <= tmax; ++t) {
    double dist = static_cast<double>(t) * h;
    if (dist > kernel.epsilon) w[t] = std::pow(dist, power);
  }
  return w;
}

/// All-midpoints evaluation for m = 2 in O(4^N) total: the pair sum splits by
/// the sign pattern of (k0 - a, k0 - b) into two same-side pieces, updated by
/// diagonal-count recurrences, and two opposite-side pieces, updated by
/// row/column corrections.
std::vector<double> bilinear_grid_sweep(const std::vector<double>& u, const std::vector<double>& v,
                                        const std::vector<double>& w) {
  const std::size_t L = u.size();
  std::vector<double> same_minus(L, 0.0), same_plus(L, 0.0), out(L, 0.0);

  // same-side below: C[s] = sum_{a+b=s, a,b<=k0} u(a) v(b)
  {
    std::vector<double> C(2 * L, 0.0);
    for (std::size_t k0 = 0; k0 < L; ++k0) {
      for (std::size_t b = 0; b <= k0; ++b) C[k0 + b] += u[k0] * v[b];
      for (std::size_t a = 0; a + 1 <= k0; ++a) C[a + k0] += u[a] * v[k0];
      double acc = 0.0;
      for (std::size_t s = 0; s <= 2 * k0; ++s) acc += C[s] * w[2 * k0 - s];
      same_minus[k0] = acc;
    }
  }
  // same-side above: C[s] = sum_{a+b=s, a,b>k0} u(a) v(b)
  {
    std::vector<double> C(2 * L, 0.0);
    for (std::size_t k0 = L; k0-- > 0;) {
      std::size_t anew = k0 + 1;
      if (anew < L) {
        for (std::size_t b = anew; b < L; ++b) C[anew + b] += u[anew] * v[b];
        for (std::size_t a = anew + 1; a < L; ++a) C[a + anew] += u[a] * v[anew];
      }
      double acc = 0.0;
      for (std::size_t s = 2 * k0 + 2; s <= 2 * L - 2; ++s) acc += C[s] * w[s - 2 * k0];
      same_plus[k0] = acc;
    }
  }
  // opposite sides, both orientations
  double op1 = 0.0, op2 = 0.0;
  for (std::size_t k0 = 0; k0 < L; ++k0) {
    double srow = 0.0, scol = 0.0, trow = 0.0, tcol = 0.0;
    for (std::size_t b = k0 + 1; b < L; ++b) srow += v[b] * w[b - k0];
    for (std::size_t a = 0; a < k0; ++a) scol += u[a] * w[k0 - a];
    op1 += u[k0] * srow - v[k0] * scol;
    for (std::size_t a = k0 + 1; a < L; ++a) trow += u[a] * w[a - k0];
    for (std::size_t b = 0; b < k0; ++b) tcol += v[b] * w[k0 - b];
    op2 += v[k0] * trow - u[k0] * tcol;
    out[k0] = same_minus[k0] + same_plus[k0] + op1 + op2;
  }
  return out;
}

std::vector<double> point_distances(const GridFunction& f, double x) {
  std::vector<double> d(f.size());
  for (std::size_t k = 0; k < f.size(); ++k) d[k] = std::fabs(x - f.cell_midpoint(k));
  return d;
}

} // namespace

double fractional_integral(const std::vector<GridFunction>& f, double x,
                           const KernelSpec& kernel) {
  check_common_grid(f);
  require(static_cast<int>(f.size()) == kernel.m, "arity mismatch");
  require(kernel.eta > 0.0 && kernel.eta < kernel.m, "eta outside (0, m)");
  require(x >= 0.0 && x < 1.0, "point outside [0,1)");
  const double h = f.front().cell_width();
  const std::size_t L = f.front().size();
  const double power = kernel.eta - kernel.m;
  std::vector<double> dist = point_distances(f.front(), x);

  auto weight = [&](double total) {
    return (total > 0.0 && total > kernel.epsilon) ? std::pow(total, power) : 0.0;
  };

  double acc = 0.0;
  switch (kernel.m) {
    case 1: {
      for (std::size_t a = 0; a < L; ++a) acc += f[0].values[a] * weight(dist[a]);
      return acc * h;
    }
    case 2: {
      for (std::size_t a = 0; a < L; ++a) {
        if (f[0].values[a] == 0.0) continue;
        double partial = 0.0;
        for (std::size_t b = 0; b < L; ++b)
          partial += f[1].values[b] * weight(dist[a] + dist[b]);
        acc += f[0].values[a] * partial;
      }
      return acc * h * h;
    }
    case 3: {
      for (std::size_t a = 0; a < L; ++a) {
        if (f[0].values[a] == 0.0) continue;
        for (std::size_t b = 0; b < L; ++b) {
          if (f[1].values[b] == 0.0) continue;
          double partial = 0.0;
          for (std::size_t c = 0; c < L; ++c)
            partial += f[2].values[c] * weight(dist[a] + dist[b] + dist[c]);
          acc += f[0].values[a] * f[1].values[b] * partial;
        }
      }
      return acc * h * h * h;
    }
    default:
      throw std::invalid_argument("pointwise quadrature supports m <= 3");
  }
}

GridFunction fractional_integral_grid(const std::vector<GridFunction>& f,
                                      const KernelSpec& kernel) {
  check_common_grid(f);
  require(static_cast<int>(f.size()) == kernel.m, "arity mismatch");
  require(kernel.eta > 0.0 && kernel.eta < kernel.m, "eta outside (0, m)");
  const double h = f.front().cell_width();
  const std::size_t L = f.front().size();
  GridFunction out = GridFunction::constant(f.front().resolution, 0.0);

  if (kernel.m == 1) {
    std::vector<double> w = kernel_table(L - 1, h, kernel);
    const std::vector<double>& u = f[0].values;
    parallel_for(L, [&](std::size_t k0) {
      double acc = 0.0;
      for (std::size_t a = 0; a < L; ++a)
        acc += u[a] * w[k0 >= a ? k0 - a : a - k0];
      out.values[k0] = acc * h;
    });
    return out;
  }
  if (kernel.m == 2) {
    std::vector<double> w = kernel_table(2 * L - 2, h, kernel);
    std::vector<double> vals = bilinear_grid_sweep(f[0].values, f[1].values, w);
    for (std::size_t k0 = 0; k0 < L; ++k0) out.values[k0] = vals[k0] * h * h;
    return out;
  }
  throw std::invalid_argument("grid evaluation supports m <= 2");
}

ShiftSpec ShiftSpec::create(int m, double eta, std::vector<int> complexity,
                            std::vector<bool> input_cancellative,
                            std::vector<ShiftTerm> terms) {
  require(m >= 1, "arity must be >= 1");
  require(eta >= 0.0 && eta < m, "eta outside [0, m)");
  require(complexity.size() == static_cast<std::size_t>(m + 1),
          "complexity needs m+1 entries");
  for (int j : complexity) require(j >= 0, "complexity entries must be >= 0");
  require(input_cancellative.size() == static_cast<std::size_t>(m),
          "need one cancellation flag per input slot");
  bool any = false;
  for (bool c : input_cancellative) any = any || c;
  require(any, "at least one input slot must be cancellative");

  for (const ShiftTerm& term : terms) {
    require(term.J.size() == static_cast<std::size_t>(m + 1), "term needs m+1 cubes");
    double bound = 1.0;
    for (int i = 0; i <= m; ++i) {
      const DyadicCube& J = term.J[i];
      require(J.shift == term.P.shift, "term cubes on different grids");
      require(J.level == term.P.level + complexity[i],
              "cube scale does not match the complexity");
      require(J.level >= term.P.level &&
                  (J.index >> (J.level - term.P.level)) == term.P.index,
              "term cube not inside P");
      bound *= std::sqrt(J.length());
    }
    bound /= std::pow(term.P.length(), static_cast<double>(m) - eta);
    require(std::fabs(term.beta) <= bound * (1.0 + 1e-12),
            "coefficient exceeds the shift normalization");
  }
  ShiftSpec spec;
  spec.m_ = m;
  spec.eta_ = eta;
  spec.complexity_ = std::move(complexity);
  spec.input_cancellative_ = std::move(input_cancellative);
  spec.terms_ = std::move(terms);
  return spec;
}

GridFunction apply_shift(const ShiftSpec& spec, const std::vector<GridFunction>& f,
                         const Lattice& lattice) {
  check_common_grid(f);
  require(static_cast<int>(f.size()) == spec.m(), "arity mismatch");
  const int n = f.front().resolution;
  GridFunction out = GridFunction::constant(n, 0.0);
  std::vector<PowerPrefix> sums;
  sums.reserve(f.size());
  for (const GridFunction& g : f) sums.emplace_back(g, 1.0, false);

  for (const ShiftTerm& term : spec.terms()) {
    require(term.P.level <= lattice.max_level &&
                term.J.back().level + 1 <= std::min(n, lattice.max_level + 1),
            "term cube outside the lattice");
    double prod = term.beta;
    for (int i = 0; i < spec.m(); ++i) {
      const DyadicCube& J = term.J[i];
      double scale = 1.0 / std::sqrt(J.length());
      double ip;
      if (spec.input_cancellative()[i])
        ip = scale * (sums[i].integral(J.child(0)) - sums[i].integral(J.child(1)));
      else
        ip = scale * sums[i].integral(J);
      prod *= ip;
    }
    if (prod == 0.0) continue;
    const DyadicCube& Jout = term.J.back();
    double scale = 1.0 / std::sqrt(Jout.length());
    for (int which = 0; which < 2; ++which) {
      double sign = which == 0 ? scale : -scale;
      for (const CellRange& range : Jout.child(which).cell_ranges(n))
        for (std::uint32_t c = range.begin; c < range.end; ++c)
          out.values[c] += prod * sign;
    }
  }
  return out;
}

double carleson_constant(double eta,
                         const std::vector<std::pair<DyadicCube, double>>& coefficients) {
  if (coefficients.empty()) return 0.0;
  // Subtree sums of beta^2 over the tree generated by the coefficient cubes.
  std::map<std::pair<int, std::int64_t>, double> subtree;
  int deepest = 0;
  for (const auto& [cube, beta] : coefficients) {
    require(cube.shift == coefficients.front().first.shift,
            "coefficient cubes on different grids");
    subtree[{cube.level, cube.index}] += beta * beta;
    deepest = std::max(deepest, cube.level);
  }
  for (int level = deepest; level > 0; --level) {
    std::vector<std::pair<std::int64_t, double>> lifted;
    auto it = subtree.lower_bound({level, std::numeric_limits<std::int64_t>::min()});
    for (; it != subtree.end() && it->first.first == level; ++it)
      lifted.emplace_back(it->first.second / 2, it->second);
    for (const auto& [pidx, value] : lifted) subtree[{level - 1, pidx}] += value;
  }
  double best = 0.0;
  for (const auto& [key, value] : subtree) {
    double len = std::ldexp(1.0, -key.first);
    best = std::max(best, std::pow(len, -2.0 * eta - 1.0) * value);
  }
  return best;
}

ParaproductSpec ParaproductSpec::create(int m, double eta,
                                        std::vector<std::pair<DyadicCube, double>> coefficients) {
  require(m >= 1, "arity must be >= 1");
  require(eta >= 0.0 && eta < m, "eta outside [0, m)");
  double carleson = fbmoo::carleson_constant(eta, coefficients);
  require(carleson <= 1.0 + 1e-12, "coefficients violate the Carleson normalization");
  ParaproductSpec spec;
  spec.m_ = m;
  spec.eta_ = eta;
  spec.carleson_ = carleson;
  spec.coefficients_ = std::move(coefficients);
  return spec;
}

GridFunction apply_paraproduct(const ParaproductSpec& spec, const std::vector<GridFunction>& f,
                               const Lattice& lattice) {
  check_common_grid(f);
  require(static_cast<int>(f.size()) == spec.m(), "arity mismatch");
  const int n = f.front().resolution;
  GridFunction out = GridFunction::constant(n, 0.0);
  for (const auto& [P, beta] : spec.coefficients()) {
    require(P.level <= lattice.max_level && P.level + 1 <= n, "coefficient cube outside lattice");
    double prod = beta;
    for (const GridFunction& g : f) prod *= g.mean_over(P);
    if (prod == 0.0) continue;
    double scale = 1.0 / std::sqrt(P.length());
    for (int which = 0; which < 2; ++which) {
      double sign = which == 0 ? scale : -scale;
      for (const CellRange& range : P.child(which).cell_ranges(n))
        for (std::uint32_t c = range.begin; c < range.end; ++c)
          out.values[c] += prod * sign;
    }
  }
  return out;
}

} // namespace fbmoo
