#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "fbmoo/common.hpp"
#include "fbmoo/sparse.hpp"

using namespace fbmoo;

namespace {
const Rational kZero(0);

std::vector<std::uint32_t> range_cells(std::uint32_t lo, std::uint32_t hi) {
  std::vector<std::uint32_t> out;
  for (std::uint32_t k = lo; k < hi; ++k) out.push_back(k);
  return out;
}
} // namespace

TEST_CASE("is_sparse on hand-built families") {
  const int N = 4;
  SparseFamily whole;
  whole.delta = 0.999; // delta must be < 1; E = Q works for any delta
  whole.resolution = N;
  whole.cubes = {DyadicCube{0, 0, kZero}};
  whole.exceptional_cells = {range_cells(0, 16)};
  CHECK(is_sparse(whole).sparse);

  SparseFamily two;
  two.delta = 0.5;
  two.resolution = N;
  two.cubes = {DyadicCube{0, 0, kZero}, DyadicCube{1, 0, kZero}};
  two.exceptional_cells = {range_cells(8, 16), range_cells(0, 4)};
  CHECK(is_sparse(two).sparse);

  SparseFamily overlap = two;
  overlap.exceptional_cells = {range_cells(6, 16), range_cells(0, 8)};
  SparseCertificate cert = is_sparse(overlap);
  CHECK_FALSE(cert.sparse);
  CHECK(cert.first_violation == 1);
  CHECK(cert.reason == "exceptional sets overlap");

  SparseFamily thin = two;
  thin.exceptional_cells = {range_cells(8, 16), range_cells(0, 3)};
  CHECK_FALSE(is_sparse(thin).sparse); // |E| = 3/16 < (1/2)(1/2)

  SparseFamily outside = two;
  outside.exceptional_cells = {range_cells(8, 16), range_cells(9, 13)};
  CHECK_FALSE(is_sparse(outside).sparse); // E not inside [0, 1/2)
}

TEST_CASE("stopping time: constants select nothing") {
  const int N = 6;
  GridFunction one = GridFunction::constant(N, 1.0);
  std::vector<StoppingNode> trace;
  SparseFamily fam =
      build_sparse_cz({one, one}, one, DyadicCube{0, 0, kZero}, 0.5, &trace);
  REQUIRE(fam.cubes.size() == 1);
  CHECK(fam.exceptional_cells[0].size() == (1u << N));
  CHECK(trace.size() == 1);
  CHECK(trace[0].selected_measure == 0.0);
  CHECK(is_sparse(fam).sparse);
}

TEST_CASE("stopping time: hand-traced selection") {
  // m=1, f = 4 chi_[0,1/4), g = 1, delta = 1/2 -> C0 = 4.
  // On [0,1/2): 2 + 1 <= 4, keep descending; on [0,1/4): 4 + 1 > 4, select.
  const int N = 6;
  GridFunction f = 4.0 * GridFunction::indicator(N, 0.0, 0.25);
  GridFunction g = GridFunction::constant(N, 1.0);
  std::vector<StoppingNode> trace;
  SparseFamily fam = build_sparse_cz({f}, g, DyadicCube{0, 0, kZero}, 0.5, &trace);

  bool has_quarter = false, has_half = false;
  for (const DyadicCube& Q : fam.cubes) {
    if (Q.level == 2 && Q.index == 0) has_quarter = true;
    if (Q.level == 1 && Q.index == 0) has_half = true;
  }
  CHECK(has_quarter);
  CHECK_FALSE(has_half);
  CHECK(is_sparse(fam).sparse);
  // root node selected exactly [0, 1/4)
  CHECK(trace[0].selected_measure == doctest::Approx(0.25));
}

TEST_CASE("stopping time: zero inputs collapse to the root") {
  const int N = 5;
  GridFunction zero = GridFunction::constant(N, 0.0);
  SparseFamily fam = build_sparse_cz({zero}, zero, DyadicCube{0, 0, kZero}, 0.5);
  REQUIRE(fam.cubes.size() == 1);
  CHECK(is_sparse(fam).sparse);
}

TEST_CASE("stopping time: random inputs stay sparse and obey Markov") {
  Rng rng(2024);
  for (int trial = 0; trial < 30; ++trial) {
    const int N = 7;
    int m = 1 + static_cast<int>(rng.integer(2));
    double delta = rng.integer(2) ? 0.25 : 0.5;
    std::vector<GridFunction> f;
    for (int i = 0; i < m; ++i) {
      GridFunction fi = GridFunction::sample(N, [&](double) {
        return rng.integer(4) ? rng.uniform() : 0.0; // sprinkle zeros
      });
      f.push_back(fi);
    }
    GridFunction g = f[0];
    for (int i = 1; i < m; ++i) g = g + f[i];
    std::vector<StoppingNode> trace;
    SparseFamily fam = build_sparse_cz(f, g, DyadicCube{0, 0, kZero}, delta, &trace);
    SparseCertificate cert = is_sparse(fam);
    CHECK(cert.sparse);
    for (const StoppingNode& node : trace)
      CHECK(node.selected_measure <= (1.0 - delta) * node.cube.length() + 1e-12);
  }
}

TEST_CASE("sparse operator on single-cube families") {
  const int N = 6;
  SparseFamily fam;
  fam.delta = 0.5;
  fam.resolution = N;
  fam.cubes = {DyadicCube{0, 0, kZero}};
  fam.exceptional_cells = {range_cells(0, 1u << N)};

  GridFunction f = GridFunction::indicator(N, 0.0, 0.5);
  SymbolData sym = SymbolData::none(1, N);
  CHECK(sparse_operator(fam, sym, {f}, {1.0}, 0.0, 0.3) == doctest::Approx(0.5));
  CHECK(sparse_operator(fam, sym, {f}, {1.0}, 0.0, 0.9) == doctest::Approx(0.5));

  GridFunction zero = GridFunction::constant(N, 0.0);
  CHECK(sparse_operator(fam, sym, {zero}, {1.0}, 0.0, 0.3) == 0.0);

  // constant symbol with k=1, t=0 kills every term
  SymbolData csym;
  csym.b = {GridFunction::constant(N, 2.0)};
  csym.k = {1};
  csym.t = {0};
  CHECK(sparse_operator(fam, csym, {f}, {1.0}, 0.0, 0.3) == 0.0);
}

TEST_CASE("sparse form examples and duality") {
  const int N = 6;
  SparseFamily fam;
  fam.delta = 0.5;
  fam.resolution = N;
  fam.cubes = {DyadicCube{0, 0, kZero}};
  fam.exceptional_cells = {range_cells(32, 64)};

  GridFunction one = GridFunction::constant(N, 1.0);
  SymbolData sym = SymbolData::none(1, N);
  CHECK(sparse_form(fam, sym, {one}, one, {1.0}, 1.0, 0.0) == doctest::Approx(1.0));

  GridFunction zero = GridFunction::constant(N, 0.0);
  CHECK(sparse_form(fam, sym, {one}, zero, {1.0}, 1.0, 0.0) == 0.0);

  SparseFamily fam2 = fam;
  fam2.cubes.push_back(DyadicCube{1, 0, kZero});
  fam2.exceptional_cells = {range_cells(32, 64), range_cells(0, 16)};
  CHECK(is_sparse(fam2).sparse);
  CHECK(sparse_form(fam2, sym, {one}, one, {1.0}, 1.0, 0.0) == doctest::Approx(1.5));

  // duality at s' = 1, k = 0: form = integral of operator * psi, grid-exact
  Rng rng(31);
  GridFunction f = GridFunction::sample(N, [&](double) { return rng.uniform(); });
  GridFunction g = GridFunction::sample(N, [&](double) { return rng.uniform(); });
  GridFunction psi = GridFunction::sample(N, [&](double) { return rng.uniform(); });
  SymbolData sym2 = SymbolData::none(2, N);
  double form = sparse_form(fam2, sym2, {f, g}, psi, {1.0, 2.0}, 1.0, 0.5);
  GridFunction op = sparse_operator_grid(fam2, sym2, {f, g}, {1.0, 2.0}, 0.5);
  CHECK(form == doctest::Approx(inner_product(op, psi)).epsilon(1e-12));
}

TEST_CASE("sparse operator grows with the family") {
  const int N = 6;
  Rng rng(8);
  GridFunction f = GridFunction::sample(N, [&](double) { return rng.uniform(); });
  SymbolData sym = SymbolData::none(1, N);

  SparseFamily small;
  small.delta = 0.5;
  small.resolution = N;
  small.cubes = {DyadicCube{0, 0, kZero}};
  small.exceptional_cells = {range_cells(32, 64)};
  SparseFamily big = small;
  big.cubes.push_back(DyadicCube{1, 0, kZero});
  big.exceptional_cells.push_back(range_cells(0, 16));

  for (double x : {0.1, 0.4, 0.9})
    CHECK(sparse_operator(small, sym, {f}, {1.0}, 0.25, x) <=
          sparse_operator(big, sym, {f}, {1.0}, 0.25, x) + 1e-15);
}

TEST_CASE("sparse family json round trip") {
  const int N = 5;
  GridFunction f = GridFunction::indicator(N, 0.0, 0.25);
  GridFunction g = GridFunction::constant(N, 1.0);
  SparseFamily fam = build_sparse_cz({4.0 * f}, g, DyadicCube{0, 0, kZero}, 0.5);
  nlohmann::json j = sparse_to_json(fam);
  SparseFamily back = sparse_from_json(j);
  CHECK(back.delta == fam.delta);
  CHECK(back.resolution == fam.resolution);
  REQUIRE(back.cubes.size() == fam.cubes.size());
  for (std::size_t i = 0; i < fam.cubes.size(); ++i) {
    CHECK(back.cubes[i] == fam.cubes[i]);
    CHECK(back.exceptional_cells[i] == fam.exceptional_cells[i]);
  }
  CHECK(is_sparse(back).sparse);
}
