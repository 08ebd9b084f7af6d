#include "fbmoo/weights.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <memory>

#include "fbmoo/common.hpp"

namespace fbmoo {

namespace {

double reciprocal_to_double(const Rational& inv) {
  return inv.is_zero() ? HUGE_VAL : 1.0 / inv.to_double();
}

} // namespace

double ExponentTuple::delta_exp(std::size_t i) const { return reciprocal_to_double(inv_delta.at(i)); }
double ExponentTuple::r_exp(std::size_t i) const { return reciprocal_to_double(inv_r.at(i)); }
double ExponentTuple::ptilde() const { return reciprocal_to_double(inv_ptilde); }

ExponentTuple extrapolation_exponents(int m, const Rational& eta, std::vector<Rational> p,
                                      std::vector<Rational> r, const Rational& s) {
  require(m >= 1, "arity must be >= 1");
  require(p.size() == static_cast<std::size_t>(m) && r.size() == static_cast<std::size_t>(m),
          "need one (p_i, r_i) per slot");
  require(eta >= Rational(0) && eta < Rational(m), "eta outside [0, m)");

  ExponentTuple out;
  out.m = m;
  out.eta = eta;
  out.inv_p.reserve(m);
  out.inv_r.reserve(m);
  for (int i = 0; i < m; ++i) {
    require(r[i] >= Rational(1), "r_i must satisfy r_i >= 1");
    require(p[i] > Rational(1) || p[i].is_zero(), "p_i must satisfy p_i > 1 (0 encodes infinity)");
    Rational inv_pi = p[i].is_zero() ? Rational(0) : p[i].reciprocal();
    Rational inv_ri = r[i].reciprocal();
    require(inv_ri >= inv_pi, "(r,s) below (p,p~) violated: r_i > p_i");
    out.inv_p.push_back(inv_pi);
    out.inv_r.push_back(inv_ri);
  }
  require(s >= Rational(1) || s.is_zero(), "s must satisfy s >= 1 (0 encodes infinity)");
  out.inv_s = s.is_zero() ? Rational(0) : s.reciprocal();

  Rational sum_inv_p(0), sum_inv_r(0);
  for (int i = 0; i < m; ++i) {
    sum_inv_p += out.inv_p[i];
    sum_inv_r += out.inv_r[i];
  }
  out.inv_ptilde = sum_inv_p - eta;
  out.inv_rtilde = sum_inv_r - eta;
  require(out.inv_ptilde > Rational(0), "1/p~ = sum 1/p_i - eta must be positive");
  require(out.inv_s <= out.inv_ptilde, "(r,s) below (p,p~) violated: p~ > s");

  out.inv_delta.reserve(m + 1);
  for (int i = 0; i < m; ++i) out.inv_delta.push_back(out.inv_r[i] - out.inv_p[i]);
  out.inv_delta.push_back(out.inv_ptilde - out.inv_s);
  for (const Rational& d : out.inv_delta)
    if (d.is_zero()) out.degenerate = true;

  // 1/gamma = sum 1/r_i + 1/s'  with  1/s' = 1 - 1/s.
  out.inv_gamma = sum_inv_r + (Rational(1) - out.inv_s);
  out.zeta = Rational(0);
  for (const Rational& d : out.inv_delta) out.zeta += d;

  out.inv_theta.reserve(m + 1);
  for (int i = 0; i <= m; ++i) out.inv_theta.push_back(out.zeta - out.inv_delta[i]);
  out.inv_varrho = out.inv_delta[m - 1 < 0 ? 0 : m - 1] + out.inv_delta[m];

  // Theta = max{ p_i/(p_i - r_i), p~'/(p~' - s') } in reciprocal form:
  // p/(p-r) = (1/r)/(1/r - 1/p), p~'/(p~'-s') = (1/s')/(1/s' - 1/p~').
  bool finite = true;
  Rational theta(0);
  auto take = [&](const Rational& num, const Rational& den) {
    if (den.is_zero()) {
      finite = false;
      return;
    }
    Rational v = num / den;
    theta = std::max(theta, v);
  };
  for (int i = 0; i < m; ++i) take(out.inv_r[i], out.inv_delta[i]);
  Rational inv_sprime = Rational(1) - out.inv_s;
  Rational inv_ptilde_prime = Rational(1) - out.inv_ptilde;
  take(inv_sprime, inv_sprime - inv_ptilde_prime);
  if (finite) out.theta_sharp = theta;

  // Xi = max{ p_i r_i/(p_i - r_i), p~' s'/(p~' - s') } = max{ delta_i, 1/(1/s' - 1/p~') }.
  bool xi_finite = true;
  Rational xi(0);
  auto take_xi = [&](const Rational& den) {
    if (den.is_zero()) {
      xi_finite = false;
      return;
    }
    xi = std::max(xi, den.reciprocal());
  };
  for (int i = 0; i < m; ++i) take_xi(out.inv_delta[i]);
  take_xi(inv_sprime - inv_ptilde_prime);
  if (xi_finite) out.xi = xi;
  return out;
}

GridFunction WeightTuple::product() const {
  require(!omega.empty(), "empty weight tuple");
  GridFunction prod = omega.front();
  for (std::size_t i = 1; i < omega.size(); ++i) prod = prod * omega[i];
  return prod;
}

void WeightTuple::validate() const {
  require(!omega.empty(), "empty weight tuple");
  for (const GridFunction& w : omega) {
    require(w.resolution == omega.front().resolution, "weight resolutions differ");
    require(w.finite(), "weight has non-finite values");
    for (double v : w.values) require(v > 0.0, "weights must be strictly positive");
  }
}

double ap_constant(const GridFunction& w, double p, const Lattice& lattice) {
  require(p >= 1.0, "p must be >= 1");
  for (double v : w.values) require(v > 0.0, "weight must be strictly positive");
  PowerPrefix mean(w, 1.0, false);
  if (p == 1.0) {
    double best = 0.0;
    for (const DyadicCube& B : lattice.all_cubes()) {
      double m = mean.integral(B) / B.length();
      double invsup = 0.0;
      for (const CellRange& range : B.cell_ranges(w.resolution))
        for (std::uint32_t k = range.begin; k < range.end; ++k)
          invsup = std::max(invsup, 1.0 / w.values[k]);
      best = std::max(best, m * invsup);
    }
    return best;
  }
  double pprime = p / (p - 1.0);
  PowerPrefix dual(w, 1.0 - pprime, false);
  double best = 0.0;
  for (const DyadicCube& B : lattice.all_cubes()) {
    double a = mean.integral(B) / B.length();
    double b = dual.integral(B) / B.length();
    best = std::max(best, a * std::pow(b, p - 1.0));
  }
  return best;
}

namespace {

void write_per_cube_csv(const std::string& path,
                        const std::vector<std::pair<DyadicCube, double>>& rows) {
  std::ofstream out(path);
  require(out.good(), "cannot open CSV for writing: " + path);
  out << "level,index,value\n";
  out.precision(17);
  for (const auto& [cube, value] : rows)
    out << cube.level << "," << cube.index << "," << value << "\n";
}

} // namespace

nlohmann::json ConstantReport::to_json() const {
  return nlohmann::json{{"constant", constant},
                        {"attaining_cube",
                         {{"level", attaining_cube.level},
                          {"index", attaining_cube.index},
                          {"shift", attaining_cube.shift.to_double()}}}};
}

ConstantReport ap_constant_report(const GridFunction& w, double p, const Lattice& lattice,
                                  const std::string& per_cube_csv) {
  ConstantReport report;
  report.constant = 0.0;
  std::vector<std::pair<DyadicCube, double>> rows;
  for (const DyadicCube& B : lattice.all_cubes()) {
    double a = w.integral_over(B) / B.length();
    double v;
    if (p == 1.0) {
      double invsup = 0.0;
      for (const CellRange& range : B.cell_ranges(w.resolution))
        for (std::uint32_t k = range.begin; k < range.end; ++k)
          invsup = std::max(invsup, 1.0 / w.values[k]);
      v = a * invsup;
    } else {
      double pprime = p / (p - 1.0);
      double b = 0.0;
      for (const CellRange& range : B.cell_ranges(w.resolution))
        for (std::uint32_t k = range.begin; k < range.end; ++k)
          b += std::pow(w.values[k], 1.0 - pprime);
      b *= w.cell_width() / B.length();
      v = a * std::pow(b, p - 1.0);
    }
    rows.emplace_back(B, v);
    if (v > report.constant) {
      report.constant = v;
      report.attaining_cube = B;
    }
  }
  if (!per_cube_csv.empty()) write_per_cube_csv(per_cube_csv, rows);
  return report;
}

namespace {

/// Per-cube value of the multilinear characteristic.
std::vector<std::pair<DyadicCube, double>> multilinear_values(const WeightTuple& w,
                                                              const ExponentTuple& exps,
                                                              const Lattice& lattice) {
  w.validate();
  require(static_cast<int>(w.omega.size()) == exps.m, "weight tuple arity mismatch");
  for (const Rational& d : exps.inv_delta)
    require(d >= Rational(0), "negative bracket exponent: tuple is inadmissible here");

  const std::size_t m = w.omega.size();
  GridFunction omega = w.product();
  // Prefix sums of omega_j^{-delta_j} and omega^{delta_{m+1}} when finite.
  std::vector<std::unique_ptr<PowerPrefix>> inv_sums(m);
  std::unique_ptr<PowerPrefix> prod_sum;
  for (std::size_t j = 0; j < m; ++j)
    if (!exps.inv_delta[j].is_zero())
      inv_sums[j] = std::make_unique<PowerPrefix>(w.omega[j], -exps.delta_exp(j), false);
  if (!exps.inv_delta[m].is_zero())
    prod_sum = std::make_unique<PowerPrefix>(omega, exps.delta_exp(m), false);

  std::vector<std::pair<DyadicCube, double>> rows;
  rows.reserve(lattice.cube_count());
  for (const DyadicCube& B : lattice.all_cubes()) {
    double value = 1.0;
    for (std::size_t j = 0; j < m; ++j) {
      if (inv_sums[j]) {
        double dj = exps.delta_exp(j);
        value *= std::pow(inv_sums[j]->integral(B) / B.length(), 1.0 / dj);
      } else {
        double sup = 0.0;
        for (const CellRange& range : B.cell_ranges(omega.resolution))
          for (std::uint32_t k = range.begin; k < range.end; ++k)
            sup = std::max(sup, 1.0 / w.omega[j].values[k]);
        value *= sup;
      }
    }
    if (prod_sum) {
      double dm = exps.delta_exp(m);
      value *= std::pow(prod_sum->integral(B) / B.length(), 1.0 / dm);
    } else {
      value *= norm_avg(omega, B, HUGE_VAL);
    }
    rows.emplace_back(B, value);
  }
  return rows;
}

} // namespace

double multilinear_constant(const WeightTuple& w, const ExponentTuple& exps,
                            const Lattice& lattice) {
  double best = 0.0;
  for (const auto& [cube, value] : multilinear_values(w, exps, lattice))
    best = std::max(best, value);
  return best;
}

ConstantReport multilinear_constant_report(const WeightTuple& w, const ExponentTuple& exps,
                                           const Lattice& lattice,
                                           const std::string& per_cube_csv) {
  ConstantReport report;
  report.constant = 0.0;
  auto rows = multilinear_values(w, exps, lattice);
  for (const auto& [cube, value] : rows)
    if (value > report.constant) {
      report.constant = value;
      report.attaining_cube = cube;
    }
  if (!per_cube_csv.empty()) write_per_cube_csv(per_cube_csv, rows);
  return report;
}

double weighted_two_exponent_constant(const GridFunction& W, const GridFunction& mu,
                                      double a, double tau, const Lattice& lattice) {
  require(a >= 1.0, "exponent a must be >= 1");
  require(tau > 0.0, "exponent tau must be positive");
  require(W.resolution == mu.resolution, "resolution mismatch");
  PowerPrefix mu_sum(mu, 1.0, false);
  double best = 0.0;
  for (const DyadicCube& B : lattice.all_cubes()) {
    double muB = mu_sum.integral(B);
    require(muB > 0.0, "degenerate reference weight");
    // (avg_B W^tau dmu)^{1/tau}
    double acc = 0.0;
    for (const CellRange& range : B.cell_ranges(W.resolution))
      for (std::uint32_t k = range.begin; k < range.end; ++k)
        acc += std::pow(W.values[k], tau) * mu.values[k];
    double first = std::pow(acc * W.cell_width() / muB, 1.0 / tau);
    double second;
    if (a == 1.0) {
      double sup = 0.0;
      for (const CellRange& range : B.cell_ranges(W.resolution))
        for (std::uint32_t k = range.begin; k < range.end; ++k)
          sup = std::max(sup, 1.0 / W.values[k]);
      second = sup;
    } else {
      double aprime = a / (a - 1.0);
      double acc2 = 0.0;
      for (const CellRange& range : B.cell_ranges(W.resolution))
        for (std::uint32_t k = range.begin; k < range.end; ++k)
          acc2 += std::pow(W.values[k], -aprime) * mu.values[k];
      second = std::pow(acc2 * W.cell_width() / muB, 1.0 / aprime);
    }
    best = std::max(best, first * second);
  }
  return best;
}

bool FactorizationReport::all_pass() const {
  for (const Check& c : checks)
    if (!c.pass) return false;
  return true;
}

FactorizationReport factorize_weights(const WeightTuple& w, const ExponentTuple& exps,
                                      const Lattice& lattice) {
  w.validate();
  require(static_cast<int>(w.omega.size()) == exps.m, "weight tuple arity mismatch");
  require(exps.inv_varrho > Rational(0), "1/varrho must be positive");
  const int m = exps.m;
  for (int i = 0; i + 1 < m; ++i)
    require(exps.inv_theta[i] > Rational(0), "1/theta_i must be positive for i < m");

  const double varrho = 1.0 / exps.inv_varrho.to_double();
  const double zeta = exps.zeta.to_double();
  const double r_m = exps.r_exp(m - 1);
  const int n = w.omega.front().resolution;

  GridFunction omega_tilde = GridFunction::constant(n, 1.0);
  for (int i = 0; i + 1 < m; ++i) omega_tilde = omega_tilde * w.omega[i];
  omega_tilde = pointwise_pow(omega_tilde, varrho);

  GridFunction omega = w.product();
  double inv_dm1 = exps.inv_delta[m].to_double();
  GridFunction W = pointwise_pow(omega, r_m) * pointwise_pow(omega_tilde, -r_m * inv_dm1);

  FactorizationReport report;
  report.omega_tilde = omega_tilde;
  report.W = W;
  report.base_constant = multilinear_constant(w, exps, lattice);

  const double slack = 1e-9; // measured-vs-claimed comparisons allow roundoff
  for (int i = 0; i + 1 < m; ++i) {
    double theta_i = 1.0 / exps.inv_theta[i].to_double();
    double measured = ap_constant(pointwise_pow(w.omega[i], theta_i), zeta * theta_i, lattice);
    double bound = std::pow(report.base_constant, theta_i);
    report.checks.push_back({"omega_" + std::to_string(i + 1) + "^theta in A_{zeta theta}",
                             measured, bound, measured <= bound * (1.0 + slack)});
  }
  {
    double measured = ap_constant(omega_tilde, zeta * varrho, lattice);
    double bound = std::pow(report.base_constant, varrho);
    report.checks.push_back(
        {"omega~ in A_{zeta varrho}", measured, bound, measured <= bound * (1.0 + slack)});
  }
  // a = p_m / r_m, tau = delta_{m+1} / r_m; skipped when either is infinite.
  if (!exps.inv_p[m - 1].is_zero() && !exps.inv_delta[m].is_zero()) {
    double p_m = 1.0 / exps.inv_p[m - 1].to_double();
    double tau = exps.delta_exp(m) / r_m;
    double measured = weighted_two_exponent_constant(W, omega_tilde, p_m / r_m, tau, lattice);
    double bound = std::pow(report.base_constant, r_m);
    report.checks.push_back({"W in A_{p_m/r_m, delta_{m+1}/r_m}(omega~)", measured, bound,
                             measured <= bound * (1.0 + slack)});
  }
  return report;
}

WeightTuple inverse_factorize(const std::vector<GridFunction>& omega_small,
                              const GridFunction& W, const ExponentTuple& exps) {
  require(static_cast<int>(omega_small.size()) == exps.m - 1,
          "need the m-1 leading weights");
  for (const GridFunction& g : omega_small)
    for (double v : g.values) require(v > 0.0, "weights must be strictly positive");
  for (double v : W.values) require(v > 0.0, "W must be strictly positive");
  require(exps.inv_varrho > Rational(0), "1/varrho must be positive");

  const int m = exps.m;
  const int n = W.resolution;
  const double varrho = 1.0 / exps.inv_varrho.to_double();
  GridFunction omega_tilde = GridFunction::constant(n, 1.0);
  for (const GridFunction& g : omega_small) omega_tilde = omega_tilde * g;
  omega_tilde = pointwise_pow(omega_tilde, varrho);

  const double r_m = exps.r_exp(m - 1);
  const double inv_dm = exps.inv_delta[m - 1].to_double();
  GridFunction omega_m =
      pointwise_pow(W, 1.0 / r_m) * pointwise_pow(omega_tilde, -inv_dm);

  WeightTuple out;
  out.omega = omega_small;
  out.omega.push_back(omega_m);
  return out;
}

GridFunction bloom_weight(const GridFunction& omega_i, const GridFunction& mu_i, int k_i) {
  require(k_i >= 1, "k_i must be >= 1");
  require(omega_i.resolution == mu_i.resolution, "resolution mismatch");
  for (double v : omega_i.values) require(v > 0.0, "weights must be strictly positive");
  for (double v : mu_i.values) require(v > 0.0, "weights must be strictly positive");
  GridFunction out = omega_i;
  for (std::size_t k = 0; k < out.size(); ++k)
    out.values[k] = std::pow(omega_i.values[k] / mu_i.values[k], 1.0 / k_i);
  return out;
}

GridFunction power_weight(double exponent, int resolution) {
  require(exponent > -1.0, "exponent must exceed -1 for integrability");
  return GridFunction::sample(resolution, [exponent](double x) { return std::pow(x, exponent); });
}

} // namespace fbmoo
