#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "slra/chebyshev.hpp"
#include "slra/krylov.hpp"
#include "slra/rng.hpp"
#include "slra/svd.hpp"

using namespace slra;

namespace {

// Planted sparse low-rank signal plus a Gaussian residual on the complement
// rows and columns, so the top singular vectors stay exactly s-sparse (the
// algorithm's promise). The planted ladder sits sigma_ratio[j] above the
// residual's spectral norm.
DenseMatrix planted_sparse(int n, int s, int k, const std::vector<double>& sigma_ratio,
                           std::uint64_t seed, SparseRankKFactor* x_out = nullptr) {
  Rng rng(mix64(seed, 0xbead));
  std::vector<int> rows = rng.sample_without_replacement(n, s * k);
  std::vector<int> cols = rng.sample_without_replacement(n, s * k);
  DenseMatrix noise = DenseMatrix::gaussian(n, n, rng.next_u64());
  for (int i : rows)
    for (int j = 0; j < n; ++j) noise(i, j) = 0.0;
  for (int j : cols)
    for (int i = 0; i < n; ++i) noise(i, j) = 0.0;
  const double noise_norm = spectral_norm(noise);
  SparseRankKFactor x;
  x.s = s;
  x.k = k;
  x.tau_max = 1e9;
  for (int c = 0; c < k; ++c) {
    RankOneComponent comp;
    comp.tau = sigma_ratio[c] * noise_norm;
    comp.x.idx.assign(rows.begin() + c * s, rows.begin() + (c + 1) * s);
    comp.y.idx.assign(cols.begin() + c * s, cols.begin() + (c + 1) * s);
    std::sort(comp.x.idx.begin(), comp.x.idx.end());
    std::sort(comp.y.idx.begin(), comp.y.idx.end());
    for (int i = 0; i < s; ++i) comp.x.val.push_back(rng.normal());
    for (int i = 0; i < s; ++i) comp.y.val.push_back(rng.normal());
    comp.x.normalize();
    comp.y.normalize();
    x.components.push_back(comp);
  }
  if (x_out) *x_out = x;
  DenseMatrix a = materialize(x, n, n);
  a.add_scaled(noise, 1.0);
  return a;
}

}  // namespace

TEST_CASE("krylov iterates on identity and diagonal matrices") {
  DenseMatrix eye = DenseMatrix::identity(4);
  KrylovIterates it = krylov_build(eye, 3, 5);
  for (int i = 1; i <= 3; ++i)
    for (int c = 0; c < 4; ++c)
      CHECK(it.vectors[i][c] == doctest::Approx(it.vectors[0][c]).epsilon(1e-12));

  DenseMatrix dg(2, 2, {2, 0, 0, 1});
  KrylovIterates d = krylov_build(dg, 2, 9);
  // Component structure (2^(2i) g1', g2') relative to the i = 0 iterate.
  for (int i = 1; i <= 2; ++i) {
    CHECK(d.vectors[i][0] == doctest::Approx(std::pow(4.0, i) * d.vectors[0][0]).epsilon(1e-12));
    CHECK(d.vectors[i][1] == doctest::Approx(d.vectors[0][1]).epsilon(1e-12));
  }

  // Naive dense recomputation oracle plus the 2-mults-per-iterate accounting.
  DenseMatrix a = DenseMatrix::gaussian(6, 5, 31);
  MultCounter ctr;
  KrylovIterates r = krylov_build(a, 3, 77, &ctr);
  CHECK(ctr.a_mults == 1 + 2 * 3);
  CHECK(ctr.nnz_flops == a.nnz() * (1 + 2 * 3));
  std::vector<double> g(5);
  for (int i = 0; i < 5; ++i) g[i] = normal_at(77, std::uint64_t(i));
  std::vector<double> v = a.matvec(g);
  for (int i = 0; i <= 3; ++i) {
    for (int c = 0; c < 6; ++c) CHECK(r.vectors[i][c] == doctest::Approx(v[c]).epsilon(1e-10));
    if (i < 3) v = a.matvec(a.tmatvec(v));
  }
}

TEST_CASE("chebyshev polynomial invariants and dual-path evaluation") {
  for (int q : {1, 3, 5, 9}) {
    for (double alpha : {0.5, 1.0, 2.0}) {
      for (double gamma : {0.04, 0.25, 1.0}) {
        ChebyshevPoly p = chebyshev_poly(q, alpha, gamma);
        const double fix = (1 + gamma) * alpha;
        CHECK(p.eval_coeffs(fix) == doctest::Approx(fix).epsilon(1e-9));
        for (int t = 0; t < 50; ++t) {
          const double x = fix + t * fix / 49.0;
          CHECK(p.eval_coeffs(x) >= x - 1e-9 * x);
        }
        const double bound = alpha / std::pow(2.0, q * std::sqrt(gamma) - 1.0);
        for (int t = 0; t < 50; ++t) {
          const double x = alpha * t / 49.0;
          CHECK(std::fabs(p.eval_coeffs(x)) <= bound * (1 + 1e-9));
        }
        for (int t = 0; t < 100; ++t) {
          const double x = 2.2 * alpha * t / 99.0;
          const double ref = p.eval_recurrence(x);
          CHECK(p.eval_coeffs(x) ==
                doctest::Approx(ref).epsilon(1e-9).scale(std::max(1.0, std::fabs(ref))));
        }
        if (q % 2 == 1) {
          const std::vector<double> c = p.coefficients();
          for (int j = 0; j <= q; j += 2) CHECK(c[j] == 0.0);
        }
      }
    }
  }
  CHECK_THROWS_AS(chebyshev_poly(65, 1.0, 0.5), std::invalid_argument);
}

TEST_CASE("q=1 polynomial is the identity map") {
  ChebyshevPoly p = chebyshev_poly(1, 2.0, 0.3);
  for (double x : {0.0, 0.5, 1.0, 2.0, 3.0})
    CHECK(p.eval_coeffs(x) == doctest::Approx(x).epsilon(1e-12));
}

TEST_CASE("power_support on a single clean component") {
  DenseMatrix a(4, 4);
  a(2, 2) = 5.0;
  SupportPair sup = power_support(a, 1, 1, 0.25, KrylovOptions{1.5, 2.0, 3});
  REQUIRE(sup.rows.size() == 1);
  REQUIRE(sup.cols.size() == 1);
  CHECK(sup.rows[0] == 2);
  CHECK(sup.cols[0] == 2);
}

TEST_CASE("power_support of the zero matrix falls back to smallest indices") {
  DenseMatrix z(6, 6);
  SupportPair sup = power_support(z, 2, 1, 0.25, KrylovOptions{1.5, 2.0, 4});
  CHECK(sup.rows == std::vector<int>{0, 1});
  CHECK(sup.cols == std::vector<int>{0, 1});
}

TEST_CASE("power_support catches two well-separated components, Monte Carlo") {
  const int n = 60, s = 2, k = 2;
  int hits = 0;
  const int trials = 60;
  for (int t = 0; t < trials; ++t) {
    SparseRankKFactor x;
    DenseMatrix a = planted_sparse(n, s, k, {3.0, 2.2}, mix64(50, t), &x);
    SupportPair sup = power_support(a, k, s, 0.2, KrylovOptions{1.5, 2.0, mix64(51, t)});
    bool all = true;
    for (const auto& c : x.components)
      for (int idx : c.x.idx)
        all = all && std::binary_search(sup.rows.begin(), sup.rows.end(), idx);
    hits += all ? 1 : 0;
  }
  CHECK(hits >= int(0.95 * trials));
}

TEST_CASE("sv_bounds on a diagonal matrix with full support") {
  DenseMatrix a(5, 5);
  for (int i = 0; i < 5; ++i) a(i, i) = 5.0 - i;
  SupportPair all{{0, 1, 2, 3, 4}, {0, 1, 2, 3, 4}};
  for (int j = 1; j <= 3; ++j) {
    SvBounds b = sv_bounds(a, all, j, 0.1, KrylovOptions{1.5, 2.0, 11});
    const double true_sq = (5.0 - (j - 1)) * (5.0 - (j - 1));
    CHECK(b.lower <= true_sq * (1 + 1e-6));
    CHECK(b.upper >= true_sq * (1 - 1e-6));
    CHECK(b.upper / b.lower <= 1.0 + 20 * 0.1);
  }
}

TEST_CASE("sv_bounds certification on planted gapped instances, Monte Carlo") {
  const int n = 60, s = 2, k = 2;
  const double eps = 0.15;
  int tight_ok = 0, trials = 40;
  for (int t = 0; t < trials; ++t) {
    DenseMatrix a = planted_sparse(n, s, k, {2.0, 1.7}, mix64(60, t));
    const std::vector<double> sv = singular_values(a);
    SupportPair sup = power_support(a, k, s, eps, KrylovOptions{1.5, 2.0, mix64(61, t)});
    bool tight = true;
    for (int j = 1; j <= k; ++j) {
      SvBounds b = sv_bounds(a, sup, j, eps, KrylovOptions{1.5, 2.0, mix64(62, t)});
      const double true_sq = sv[j - 1] * sv[j - 1];
      CHECK(b.lower <= true_sq * (1 + 1e-6));  // unconditional halves
      CHECK(b.upper >= true_sq * (1 - 1e-6));
      if (sv[j - 1] >= (1 + std::sqrt(eps)) * sv[k])
        tight = tight && (b.upper / b.lower <= 1 + 20 * eps);
    }
    tight_ok += tight ? 1 : 0;
  }
  CHECK(tight_ok >= int(0.95 * trials));
}

TEST_CASE("no-gap index still yields sound bounds") {
  DenseMatrix a(6, 6);
  for (int i = 0; i < 6; ++i) a(i, i) = i < 2 ? 4.0 : 1.0;  // sigma_3 has no gap
  SupportPair all{{0, 1, 2, 3, 4, 5}, {0, 1, 2, 3, 4, 5}};
  SvBounds b = sv_bounds(a, all, 3, 0.1, KrylovOptions{1.5, 2.0, 5});
  CHECK(b.lower <= 1.0 + 1e-6);
  CHECK(b.upper >= 1.0 - 1e-6);
}

TEST_CASE("find_sigma_k1 brackets the true value") {
  DenseMatrix a(8, 8);
  a(0, 0) = 10.0;
  for (int i = 1; i < 8; ++i) a(i, i) = 1.0;
  SupportPair sup = power_support(a, 1, 1, 0.1, KrylovOptions{1.5, 2.0, 21});
  SigmaInterval w = find_sigma_k1(a, sup, 1, 0.1, KrylovOptions{1.5, 2.0, 21});
  CHECK(w.lo <= 1.0);
  CHECK(w.hi >= 1.0);
  CHECK(w.probes <= 1 + 1);

  // Full gap at k: the deflation route still brackets sigma_{k+1}.
  DenseMatrix b(10, 10);
  b(0, 0) = 9.0;
  b(1, 1) = 6.0;
  for (int i = 2; i < 10; ++i) b(i, i) = 1.0 - 0.01 * i;
  SupportPair sb = power_support(b, 2, 1, 0.1, KrylovOptions{1.5, 2.0, 22});
  SigmaInterval wb = find_sigma_k1(b, sb, 2, 0.1, KrylovOptions{1.5, 2.0, 22});
  const std::vector<double> sv = singular_values(b);
  CHECK(wb.lo <= sv[2] * (1 + 1e-6));
  CHECK(wb.hi >= sv[2] * (1 - 1e-6));

  // Degenerate rank bound: 1x1 matrix, sigma_2 = 0.
  DenseMatrix one(1, 1, {3.0});
  SupportPair s1{{0}, {0}};
  SigmaInterval w1 = find_sigma_k1(one, s1, 1, 0.1, KrylovOptions{1.5, 2.0, 23});
  CHECK(w1.lo == 0.0);
  CHECK(w1.hi <= 1e-12);
}

TEST_CASE("bucket_sweep finds the coordinate at a swept singular value") {
  const int n = 12;
  DenseMatrix a(n, n);
  a(7, 7) = 1.3;
  for (int i = 0; i < n; ++i)
    if (i != 7) a(i, i) = 0.4;
  KrylovIterates left = krylov_build(a, 10, 91);
  KrylovIterates right = krylov_build(a.transpose(), 10, 92);
  SupportPair add = bucket_sweep(left, right, 1.0, 0.2, 1, 1);
  CHECK(std::binary_search(add.rows.begin(), add.rows.end(), 7));
  CHECK(std::binary_search(add.cols.begin(), add.cols.end(), 7));
  // Cardinality bounded by sk per bucket.
  const int buckets = int(std::ceil(2.0 / std::sqrt(0.2))) + 3;
  CHECK(int(add.rows.size()) <= buckets);
}

TEST_CASE("sparse_spectral_lra end to end") {
  // Exact sparse input: zero residual.
  SparseRankKFactor x;
  x.s = 2;
  x.k = 1;
  x.components.push_back({4.0, {{1, 3}, {0.6, 0.8}}, {{0, 2}, {0.8, -0.6}}});
  DenseMatrix a = materialize(x, 10, 10);
  SpectralLraResult r = sparse_spectral_lra(a, 1, 2, 0.2, 7);
  DenseMatrix diff = a;
  diff.add_scaled(materialize(r.factor, 10, 10), -1.0);
  CHECK(spectral_norm(diff) <= 1e-8);
  CHECK(r.err <= 1e-8);

  // Zero matrix: zero factor.
  SpectralLraResult z = sparse_spectral_lra(DenseMatrix(6, 6), 1, 1, 0.2, 3);
  CHECK(z.factor.components.empty());
  CHECK(z.err == 0.0);

  // Planted gapped instances at reduced scale; exact-SVD oracle.
  const int n = 80, s = 3, k = 2;
  const double eps = 0.2;
  int ok = 0, trials = 25;
  for (int t = 0; t < trials; ++t) {
    DenseMatrix p = planted_sparse(n, s, k, {1.5, 1.3}, mix64(70, t));
    SpectralLraResult res = sparse_spectral_lra(p, k, s, eps, mix64(71, t));
    DenseMatrix d = p;
    d.add_scaled(materialize(res.factor, n, n), -1.0);
    const std::vector<double> sv = singular_values(p);
    ok += spectral_norm(d) <= (1 + eps) * sv[k] ? 1 : 0;
  }
  CHECK(ok >= int(0.9 * trials));
}

TEST_CASE("enlarging the support never increases the residual cost") {
  DenseMatrix a = DenseMatrix::gaussian(12, 12, 4);
  SupportPair small{{0, 1, 2}, {0, 1, 2}};
  SupportPair big{{0, 1, 2, 3, 4}, {0, 1, 2, 3, 4}};
  auto cost_for = [&](const SupportPair& sup) {
    DenseMatrix m = restrict_to(a, sup, RestrictMode::Extract);
    SvdResult svd = svd_truncated(m, 2);
    DenseMatrix d = a;
    d.add_scaled(scatter(svd.reconstruct(), sup, 12, 12), -1.0);
    return d.frob_norm_sq();
  };
  CHECK(cost_for(big) <= cost_for(small) + 1e-9);
}
