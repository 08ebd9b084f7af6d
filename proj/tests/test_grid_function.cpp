#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>

#include "fbmoo/common.hpp"
#include "fbmoo/grid_function.hpp"

using namespace fbmoo;

namespace {
const DyadicCube kRoot{0, 0, Rational(0)};

// Independent quadrature for the bump: plain loops over cells.
double avg_oracle(const GridFunction& f, double lo, double hi, double r, double eta) {
  double h = f.cell_width();
  double s = 0.0;
  for (std::size_t k = 0; k < f.size(); ++k) {
    double x = static_cast<double>(k) * h;
    if (x >= lo && x < hi) s += std::pow(std::fabs(f.values[k]), r) * h;
  }
  double len = hi - lo;
  return std::pow(std::pow(len, -(1.0 - eta * r)) * s, 1.0 / r);
}
} // namespace

TEST_CASE("fractional average bumps") {
  const int N = 12;
  GridFunction one = GridFunction::constant(N, 1.0);
  CHECK(avg(one, kRoot, 1.0, 0.0) == doctest::Approx(1.0));

  GridFunction lin = GridFunction::sample(N, [](double x) { return x; });
  // exact integral of x^2 is 1/3; midpoint sampling is within O(h^2)
  CHECK(avg(lin, kRoot, 2.0, 0.0) ==
        doctest::Approx(1.0 / std::sqrt(3.0)).epsilon(1e-6));
  CHECK(avg(lin, kRoot, 2.0, 0.0) ==
        doctest::Approx(avg_oracle(lin, 0.0, 1.0, 2.0, 0.0)).epsilon(1e-14));

  // eta r = 1 collapses the volume factor
  DyadicCube half{1, 0, Rational(0)};
  CHECK(avg(one, half, 2.0, 0.5) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-12));

  CHECK_THROWS(avg(one, kRoot, 2.0, 0.6));  // eta r > 1
  CHECK_THROWS(avg(one, kRoot, 0.5, 0.0));  // r < 1
}

TEST_CASE("bump monotonicity and Hoelder, random inputs") {
  Rng rng(77);
  for (int trial = 0; trial < 25; ++trial) {
    const int N = 7;
    GridFunction f = GridFunction::sample(N, [&](double) { return rng.uniform(); });
    GridFunction g = GridFunction::sample(N, [&](double) { return rng.uniform(); });
    DyadicCube Q{2, static_cast<std::int64_t>(rng.integer(4)), Rational(0)};
    double r1 = rng.uniform(1.0, 2.0), r2 = r1 + rng.uniform(0.0, 2.0);
    CHECK(avg(f, Q, r1, 0.0) <= avg(f, Q, r2, 0.0) * (1 + 1e-12));

    // Hoelder: 1/t = 1/t1 + 1/t2
    double t1 = rng.uniform(1.5, 3.0), t2 = rng.uniform(1.5, 3.0);
    double t = 1.0 / (1.0 / t1 + 1.0 / t2);
    if (t >= 1.0)
      CHECK(avg(f * g, Q, t, 0.0) <= avg(f, Q, t1, 0.0) * avg(g, Q, t2, 0.0) * (1 + 1e-12));
  }
}

TEST_CASE("maximal average bump by enumeration") {
  const int N = 8;
  Lattice lat = build_lattice(4, Rational(0));
  GridFunction f = GridFunction::indicator(N, 0.0, 0.25);
  DyadicCube q1{2, 0, Rational(0)}; // [0, 1/4)
  CHECK(maximal_avg(f, q1, lat, 1.0, 0.0) == doctest::Approx(1.0));
  DyadicCube q2{1, 1, Rational(0)}; // [1/2, 1)
  CHECK(maximal_avg(f, q2, lat, 1.0, 0.0) == doctest::Approx(0.25));
  GridFunction one = GridFunction::constant(N, 1.0);
  CHECK(maximal_avg(one, q2, lat, 1.0, 0.0) == doctest::Approx(1.0));

  Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    GridFunction g = GridFunction::sample(N, [&](double) { return rng.uniform(); });
    DyadicCube Q{3, static_cast<std::int64_t>(rng.integer(8)), Rational(0)};
    CHECK(maximal_avg(g, Q, lat, 1.5, 0.25) >= avg(g, Q, 1.5, 0.25) - 1e-15);
  }
}

TEST_CASE("luxemburg norm") {
  const int N = 8;
  GridFunction zero = GridFunction::constant(N, 0.0);
  CHECK(luxemburg_norm(zero, kRoot, YoungFunction::expl(1.0)) == 0.0);

  double c = 2.3;
  GridFunction cf = GridFunction::constant(N, c);
  CHECK(luxemburg_norm(cf, kRoot, YoungFunction::expl(1.0)) ==
        doctest::Approx(c / std::log(2.0)).epsilon(1e-8));
  CHECK(luxemburg_norm(cf, kRoot, YoungFunction::power(3.0)) == doctest::Approx(c).epsilon(1e-8));

  // power kind agrees with the plain L^p average
  Rng rng(123);
  for (int trial = 0; trial < 10; ++trial) {
    GridFunction f = GridFunction::sample(N, [&](double) { return rng.uniform(0.1, 3.0); });
    double p = rng.uniform(1.0, 4.0);
    double lux = luxemburg_norm(f, kRoot, YoungFunction::power(p));
    CHECK(lux == doctest::Approx(avg(f, kRoot, p, 0.0)).epsilon(1e-9));
  }

  // LlogL is sandwiched between L^1 and L^2 averages on a cube
  GridFunction f = GridFunction::sample(N, [&](double x) { return 0.2 + x; });
  double l1 = avg(f, kRoot, 1.0, 0.0);
  double llogl = luxemburg_norm(f, kRoot, YoungFunction::llogl(1.0));
  CHECK(llogl >= l1 * (1 - 1e-9));
}

TEST_CASE("bmo norms") {
  const int N = 10;
  Lattice lat = build_lattice(8, Rational(0));
  GridFunction c = GridFunction::constant(N, 4.2);
  CHECK(bmo_norm(c, lat) == doctest::Approx(0.0));

  // oscillation of x on an interval of length h is h/4; the root attains 1/4
  GridFunction lin = GridFunction::sample(N, [](double x) { return x; });
  CHECK(bmo_norm(lin, lat) == doctest::Approx(0.25).epsilon(1e-12));

  GridFunction one = GridFunction::constant(N, 1.0);
  CHECK(bmo_norm_weighted(lin, one, lat) == doctest::Approx(bmo_norm(lin, lat)));
}

TEST_CASE("fractional BMO via Haar coefficients") {
  const int N = 9;
  Lattice lat = build_lattice(N - 1, Rational(0));
  GridFunction c = GridFunction::constant(N, 1.0);
  CHECK(fbmo_norm_haar(c, lat, 0.0) == doctest::Approx(0.0));

  GridFunction h = GridFunction::haar_function(kRoot, N);
  CHECK(fbmo_norm_haar(h, lat, 0.0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(fbmo_norm_haar(h, lat, 0.5) == doctest::Approx(1.0).epsilon(1e-12));

  Rng rng(321);
  for (int trial = 0; trial < 8; ++trial) {
    GridFunction f = GridFunction::sample(N, [&](double) { return rng.uniform(-1.0, 1.0); });
    CHECK(fbmo_norm_haar(f, lat, 0.0) ==
          doctest::Approx(bmo2_norm_direct(f, lat)).epsilon(1e-8));
  }
}

TEST_CASE("parseval on the finite lattice") {
  const int N = 8;
  Lattice lat = build_lattice(N - 1, Rational(0));
  Rng rng(9);
  GridFunction f = GridFunction::sample(N, [&](double) { return rng.uniform(-1.0, 1.0); });
  double total = 0.0;
  for (const DyadicCube& Q : lat.all_cubes()) {
    double coeff = inner_product(f, GridFunction::haar_function(Q, N));
    total += coeff * coeff;
  }
  double mean = f.integral();
  total += mean * mean;
  double l2 = f.lp_norm(2.0);
  CHECK(total == doctest::Approx(l2 * l2).epsilon(1e-10));
}

TEST_CASE("csv round trip") {
  Rng rng(55);
  GridFunction f = GridFunction::sample(6, [&](double) { return rng.uniform(-5.0, 5.0); });
  std::string path = "gridfn_roundtrip_test.csv";
  write_csv(f, path);
  GridFunction g = read_csv(path);
  REQUIRE(g.resolution == f.resolution);
  for (std::size_t k = 0; k < f.size(); ++k) CHECK(g.values[k] == doctest::Approx(f.values[k]));
  std::remove(path.c_str());
}

TEST_CASE("norm_avg brackets") {
  const int N = 6;
  GridFunction f = GridFunction::sample(N, [](double x) { return 1.0 + x; });
  CHECK(norm_avg(f, kRoot, HUGE_VAL) == doctest::Approx(f.max_abs()));
  CHECK(norm_avg(f, kRoot, 1.0) == doctest::Approx(f.integral()));
  CHECK_THROWS(norm_avg(f, kRoot, 0.0));
}
