#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>

#include "slra/budget.hpp"
#include "slra/dense_matrix.hpp"
#include "slra/factor.hpp"
#include "slra/io.hpp"
#include "slra/oracle.hpp"
#include "slra/rng.hpp"
#include "slra/svd.hpp"

#if SLRA_HAVE_EIGEN
#include <Eigen/Dense>
#include <Eigen/SVD>
#endif

using namespace slra;

namespace {

DenseMatrix diag(std::vector<double> d) {
  DenseMatrix m(int(d.size()), int(d.size()));
  for (std::size_t i = 0; i < d.size(); ++i) m(int(i), int(i)) = d[i];
  return m;
}

double max_abs_diff(const DenseMatrix& a, const DenseMatrix& b) {
  DenseMatrix d = a;
  d.add_scaled(b, -1.0);
  return d.max_abs();
}

// Independent oracle: plain power iteration on A^T A run to convergence.
double power_iteration_norm(const DenseMatrix& a, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> v(a.cols());
  for (double& x : v) x = rng.normal();
  double prev = 0.0;
  for (int it = 0; it < 200000; ++it) {
    std::vector<double> w = a.tmatvec(a.matvec(v));
    double nw = 0.0;
    for (double x : w) nw += x * x;
    nw = std::sqrt(nw);
    if (nw == 0.0) return 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) v[i] = w[i] / nw;
    const double est = std::sqrt(nw);
    if (it > 4 && std::fabs(est - prev) <= 1e-12 * est) return est;
    prev = est;
  }
  return prev;
}

}  // namespace

TEST_CASE("svd_truncated on diagonal and zero matrices") {
  SvdResult r = svd_truncated(diag({3, 2, 1}), 2);
  CHECK(r.sigma[0] == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(r.sigma[1] == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(std::fabs(std::fabs(r.U(0, 0)) - 1.0) < 1e-12);
  CHECK(std::fabs(std::fabs(r.V(1, 1)) - 1.0) < 1e-12);

  SvdResult z = svd_truncated(DenseMatrix(3, 3), 1);
  CHECK(z.sigma[0] == 0.0);
  // Orthonormal U even at sigma = 0.
  double n0 = 0.0;
  for (int i = 0; i < 3; ++i) n0 += z.U(i, 0) * z.U(i, 0);
  CHECK(n0 == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("svd reconstruction and orthonormality on random matrices") {
  for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
    DenseMatrix a = DenseMatrix::gaussian(7, 5, seed);
    SvdResult r = svd_full(a);
    CHECK(max_abs_diff(r.reconstruct(), a) <= 1e-8 * a.frob_norm());
    DenseMatrix utu = DenseMatrix::multiply(r.U.transpose(), r.U);
    DenseMatrix vtv = DenseMatrix::multiply(r.V.transpose(), r.V);
    utu.add_scaled(DenseMatrix::identity(utu.rows()), -1.0);
    vtv.add_scaled(DenseMatrix::identity(vtv.rows()), -1.0);
    CHECK(utu.max_abs() <= 1e-9);
    CHECK(vtv.max_abs() <= 1e-9);
    // Eckart-Young consistency: residual matches the sigma tail.
    for (int k = 1; k < 5; ++k) {
      SvdResult t = svd_truncated(a, k);
      DenseMatrix diff = a;
      diff.add_scaled(t.reconstruct(), -1.0);
      double tail = 0.0;
      for (std::size_t i = k; i < r.sigma.size(); ++i) tail += r.sigma[i] * r.sigma[i];
      CHECK(diff.frob_norm_sq() == doctest::Approx(tail).epsilon(1e-8));
    }
  }
}

#if SLRA_HAVE_EIGEN
TEST_CASE("svd matches an independent Jacobi-rotation oracle") {
  DenseMatrix a = DenseMatrix::gaussian(5, 4, 77);
  SvdResult r = svd_truncated(a, 4);
  CHECK(max_abs_diff(r.reconstruct(), a) <= 1e-8 * a.frob_norm());

  Eigen::MatrixXd ea(5, 4);
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 4; ++j) ea(i, j) = a(i, j);
  Eigen::JacobiSVD<Eigen::MatrixXd> esvd(ea);
  for (int i = 0; i < 4; ++i)
    CHECK(r.sigma[i] == doctest::Approx(esvd.singularValues()[i]).epsilon(1e-10));
}
#endif

TEST_CASE("spectral norm") {
  CHECK(spectral_norm(diag({3, 2})) == doctest::Approx(3.0).epsilon(1e-12));
  DenseMatrix ones(2, 2, {1, 1, 1, 1});
  CHECK(spectral_norm(ones) == doctest::Approx(2.0).epsilon(1e-12));
  DenseMatrix a = DenseMatrix::gaussian(6, 6, 123);
  CHECK(spectral_norm(a) == doctest::Approx(power_iteration_norm(a, 9)).epsilon(1e-9));
}

TEST_CASE("restrict project and extract") {
  DenseMatrix a(2, 2, {1, 2, 3, 4});
  SupportPair sup{{0}, {0}};
  DenseMatrix p = restrict_to(a, sup, RestrictMode::Project);
  CHECK(p(0, 0) == 1.0);
  CHECK(p(0, 1) == 0.0);
  CHECK(p(1, 0) == 0.0);
  CHECK(p(1, 1) == 0.0);
  DenseMatrix e = restrict_to(a, sup, RestrictMode::Extract);
  CHECK(e.rows() == 1);
  CHECK(e(0, 0) == 1.0);

  SupportPair all{{0, 1}, {0, 1}};
  CHECK(max_abs_diff(restrict_to(a, all, RestrictMode::Project), a) == 0.0);
  CHECK(max_abs_diff(restrict_to(a, all, RestrictMode::Extract), a) == 0.0);

  SupportPair bad{{0, 5}, {0}};
  CHECK_THROWS_AS(restrict_to(a, bad, RestrictMode::Extract), std::invalid_argument);
}

TEST_CASE("entry and row tails") {
  DenseMatrix a(2, 2, {3, 0, 0, 4});
  CHECK(entry_tail_frobenius(a, 1) == doctest::Approx(3.0));
  CHECK(entry_tail_frobenius(a, 0) == doctest::Approx(a.frob_norm()));
  DenseMatrix ones(2, 2, {1, 1, 1, 1});
  CHECK(entry_tail_frobenius(ones, 2) == doctest::Approx(std::sqrt(2.0)));

  DenseMatrix b(2, 2, {3, 4, 0, 1});
  CHECK(row_tail_frobenius(b, 1) == doctest::Approx(1.0));
  CHECK(row_tail_frobenius(b, 2) == doctest::Approx(0.0));

  // Sort-based oracle on a seeded 8x8.
  DenseMatrix c = DenseMatrix::gaussian(8, 8, 4);
  std::vector<double> norms(8);
  for (int i = 0; i < 8; ++i) norms[i] = c.row_norm_sq(i);
  std::sort(norms.begin(), norms.end(), std::greater<double>());
  double expect = 0.0;
  for (int i = 3; i < 8; ++i) expect += norms[i];
  CHECK(row_tail_frobenius(c, 3) == doctest::Approx(std::sqrt(expect)).epsilon(1e-12));

  // Monotone nonincreasing in the zeroed count.
  for (std::uint64_t t = 1; t <= 64; ++t)
    CHECK(entry_tail_frobenius(c, t) <= entry_tail_frobenius(c, t - 1) + 1e-12);
}

TEST_CASE("cauchy interlacing on random submatrices") {
  Rng rng(99);
  for (int trial = 0; trial < 40; ++trial) {
    const int n = 4 + int(rng.index(10));
    const int d = 4 + int(rng.index(10));
    DenseMatrix a = DenseMatrix::gaussian(n, d, rng.next_u64());
    SupportPair sup;
    sup.rows = Rng(rng.next_u64()).sample_without_replacement(n, 2 + int(rng.index(n - 2)));
    sup.cols = Rng(rng.next_u64()).sample_without_replacement(d, 2 + int(rng.index(d - 2)));
    sup.normalize();
    const std::vector<double> sub = singular_values(restrict_to(a, sup, RestrictMode::Extract));
    const std::vector<double> full = singular_values(a);
    for (std::size_t j = 0; j < sub.size(); ++j)
      CHECK(sub[j] <= full[j] * (1 + 1e-9) + 1e-12);
  }
}

TEST_CASE("materialize") {
  SparseRankKFactor f;
  f.s = 1;
  f.k = 1;
  f.components.push_back({2.0, {{0}, {1.0}}, {{1}, {1.0}}});
  DenseMatrix m = materialize(f, 2, 2);
  CHECK(m(0, 1) == 2.0);
  CHECK(m(0, 0) == 0.0);
  CHECK(m(1, 0) == 0.0);

  SparseRankKFactor empty;
  CHECK(materialize(empty, 3, 3).frob_norm_sq() == 0.0);

  SparseRankKFactor two;
  two.s = 1;
  two.k = 2;
  two.components.push_back({3.0, {{0}, {1.0}}, {{0}, {1.0}}});
  two.components.push_back({4.0, {{1}, {1.0}}, {{1}, {1.0}}});
  CHECK(two.disjoint_supports());
  CHECK(materialize(two, 2, 2).frob_norm_sq() == doctest::Approx(25.0));
  CHECK(two.frob_norm_sq_disjoint() == doctest::Approx(25.0));
}

TEST_CASE("brute force oracle, submatrix variant") {
  // A = e1 e1^T: the oracle recovers it exactly.
  DenseMatrix a(4, 4);
  a(0, 0) = 1.0;
  OracleResult r = brute_force_sparse_lra(a, 1, 1, OracleVariant::Submatrix);
  CHECK(r.cost == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(r.factor.components.size() == 1);
  CHECK(r.factor.components[0].x.idx[0] == 0);

  // Identity, s=1: greedy per-component captures one diagonal entry per round.
  OracleResult g = greedy_sparse_oracle(DenseMatrix::identity(3), 1, 2);
  CHECK(g.cost == doctest::Approx(1.0).epsilon(1e-9));

  // Duplicate-implementation oracle on a seeded 6x6, s=2, k=1.
  DenseMatrix b = DenseMatrix::gaussian(6, 6, 17);
  OracleResult o = brute_force_sparse_lra(b, 2, 1, OracleVariant::Submatrix);
  double best_gain = 0.0;
  for (int i1 = 0; i1 < 6; ++i1)
    for (int i2 = i1 + 1; i2 < 6; ++i2)
      for (int j1 = 0; j1 < 6; ++j1)
        for (int j2 = j1 + 1; j2 < 6; ++j2) {
          SupportPair sup{{i1, i2}, {j1, j2}};
          const std::vector<double> sv = singular_values(restrict_to(b, sup, RestrictMode::Extract));
          best_gain = std::max(best_gain, sv[0] * sv[0]);
        }
  CHECK(o.cost == doctest::Approx(b.frob_norm_sq() - best_gain).epsilon(1e-9));

  // The oracle's cost never exceeds a manual candidate's cost.
  DenseMatrix manual = b;
  SupportPair sup{{0, 1}, {0, 1}};
  DenseMatrix blk = restrict_to(b, sup, RestrictMode::Extract);
  manual.add_scaled(scatter(svd_truncated(blk, 1).reconstruct(), sup, 6, 6), -1.0);
  CHECK(o.cost <= manual.frob_norm_sq() + 1e-9);
}

TEST_CASE("matrix and factor file round trips") {
  DenseMatrix a = DenseMatrix::gaussian(5, 3, 11);
  write_matrix_text(a, "tmp_core_a.mtx");
  CHECK(max_abs_diff(read_matrix_text("tmp_core_a.mtx"), a) < 1e-15);
  write_matrix_binary(a, "tmp_core_a.bin");
  CHECK(max_abs_diff(read_matrix_binary("tmp_core_a.bin"), a) == 0.0);

  SparseRankKFactor f;
  f.s = 2;
  f.k = 1;
  f.components.push_back({1.5, {{0, 2}, {0.6, 0.8}}, {{1, 2}, {0.8, -0.6}}});
  write_factor(f, 5, 3, "tmp_core_f.factor");
  int n = 0, d = 0;
  SparseRankKFactor g = read_factor("tmp_core_f.factor", &n, &d);
  CHECK(n == 5);
  CHECK(d == 3);
  CHECK(max_abs_diff(materialize(g, 5, 3), materialize(f, 5, 3)) < 1e-15);

  std::vector<StreamUpdate> ups = matrix_to_stream(a);
  write_stream(ups, "tmp_core_s.txt");
  const auto back = read_stream("tmp_core_s.txt");
  REQUIRE(back.size() == ups.size());
  CHECK(back[3].delta == ups[3].delta);
  std::remove("tmp_core_a.mtx");
  std::remove("tmp_core_a.bin");
  std::remove("tmp_core_f.factor");
  std::remove("tmp_core_s.txt");
}

TEST_CASE("factor validation") {
  SparseRankKFactor f;
  f.s = 1;
  f.k = 1;
  f.tau_max = 2.0;
  f.components.push_back({1.0, {{0}, {1.0}}, {{0}, {1.0}}});
  CHECK_NOTHROW(f.validate(2, 2));
  f.components[0].tau = 5.0;
  CHECK_THROWS_AS(f.validate(2, 2), std::invalid_argument);
  f.components[0].tau = 1.0;
  f.components[0].x.val[0] = 0.9;
  CHECK_THROWS_AS(f.validate(2, 2), std::invalid_argument);
}

TEST_CASE("io error paths") {
  CHECK_THROWS_AS(read_matrix_text("no_such_file.mtx"), std::runtime_error);
  {
    std::ofstream f("tmp_core_bad.mtx");
    f << "2 2\n1 2\n3\n";  // truncated payload
  }
  CHECK_THROWS_AS(read_matrix_text("tmp_core_bad.mtx"), std::runtime_error);
  {
    std::ofstream f("tmp_core_bad.bin");
    f << "NOPE";
  }
  CHECK_THROWS_AS(read_matrix_binary("tmp_core_bad.bin"), std::runtime_error);
  {
    std::ofstream f("tmp_core_bad.stream");
    f << "1 2 not_a_number\n";
  }
  CHECK_THROWS_AS(read_stream("tmp_core_bad.stream"), std::runtime_error);
  std::remove("tmp_core_bad.mtx");
  std::remove("tmp_core_bad.bin");
  std::remove("tmp_core_bad.stream");
}

TEST_CASE("oracle enumeration budget guard") {
  DenseMatrix big = DenseMatrix::gaussian(60, 60, 2);
  CHECK_THROWS_AS(brute_force_sparse_lra(big, 5, 1, OracleVariant::Submatrix), BudgetExceeded);
}
