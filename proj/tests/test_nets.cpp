#include <doctest.h>

#include <cmath>
#include <set>

#include "slra/budget.hpp"
#include "slra/nets.hpp"
#include "slra/rng.hpp"

using namespace slra;

namespace {

double vec_dist(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

double factor_dist(const SparseRankKFactor& f, const DenseMatrix& target, int n, int d) {
  DenseMatrix m = materialize(f, n, d);
  m.add_scaled(target, -1.0);
  return m.frob_norm();
}

}  // namespace

TEST_CASE("sphere net in one dimension contains the poles") {
  SphereNet net(1, 0.5);
  std::set<double> pts;
  std::vector<double> p;
  while (net.next(p)) pts.insert(p[0]);
  CHECK(pts.count(1.0) == 1);
  CHECK(pts.count(-1.0) == 1);
}

TEST_CASE("sphere net covers the circle at chord distance eps") {
  const double eps = 0.5;
  SphereNet net(2, eps);
  std::vector<std::vector<double>> pts;
  std::vector<double> p;
  while (net.next(p)) pts.push_back(p);
  REQUIRE(!pts.empty());
  for (int deg = 0; deg < 360; ++deg) {
    const double th = deg * 3.14159265358979323846 / 180.0;
    const std::vector<double> x = {std::cos(th), std::sin(th)};
    double best = 1e300;
    for (const auto& q : pts) best = std::min(best, vec_dist(x, q));
    CHECK(best <= eps + 1e-12);
  }
}

TEST_CASE("sphere net size bound and determinism") {
  for (double eps : {0.3, 0.5, 0.8}) {
    for (int d : {1, 2, 3}) {
      const double bound = std::pow(12.0 / eps, d);
      CHECK(double(count_sphere_net(d, eps)) <= bound);
      CHECK(count_sphere_net(d, eps) == count_sphere_net(d, eps));
    }
  }
  // Identical enumeration order on restart.
  SphereNet a(2, 0.4), b(2, 0.4);
  std::vector<double> pa, pb;
  while (a.next(pa)) {
    REQUIRE(b.next(pb));
    CHECK(pa == pb);
  }
  CHECK(!b.next(pb));
}

TEST_CASE("sparse rank-1 net includes all +-ei ej patterns at s=1") {
  SparseRank1Net net(2, 2, 1, 0.5);
  std::set<std::tuple<int, int, int, int>> seen;  // (i, j, sign x, sign y)
  SparseVec x, y;
  while (net.next(x, y))
    seen.insert({x.idx[0], y.idx[0], x.val[0] > 0 ? 1 : -1, y.val[0] > 0 ? 1 : -1});
  CHECK(seen.size() == 16);  // all four supports times four sign patterns
}

TEST_CASE("sparse rank-1 net covers planted 1-sparse products") {
  const int n = 4, d = 4;
  const double eps = 0.5;
  DenseMatrix target(n, d);
  target(2, 1) = 1.0;  // u v^T with u = e2, v = e1
  SparseRank1Net net(n, d, 1, eps);
  SparseVec x, y;
  double best = 1e300;
  std::uint64_t count = 0;
  while (net.next(x, y)) {
    ++count;
    SparseRankKFactor f;
    f.s = 1;
    f.k = 1;
    f.components.push_back({1.0, x, y});
    best = std::min(best, factor_dist(f, target, n, d));
  }
  CHECK(best <= eps + 1e-12);
  // Paper count bound (6 e n / (eps s))^(2s).
  CHECK(double(count) <= std::pow(6.0 * 2.718281828 * n / (eps * 1.0), 2.0));
}

TEST_CASE("ssk net covers a planted bounded S_{1,1} matrix on 3x3") {
  NetSpec spec;
  spec.n = spec.d = 3;
  spec.s = 1;
  spec.k = 1;
  spec.eps = 0.5;
  spec.tau_max = 2.0;
  SskNet net(spec);
  DenseMatrix target(3, 3);
  target(1, 2) = 1.0;  // tau = 1 on the grid
  SparseRankKFactor f;
  double best = 1e300;
  while (net.next(f)) best = std::min(best, factor_dist(f, target, 3, 3));
  CHECK(best <= spec.eps + 1e-12);
}

TEST_CASE("ssk covering property on random bounded targets") {
  NetSpec spec;
  spec.n = spec.d = 3;
  spec.s = 1;
  spec.k = 1;
  spec.eps = 0.5;
  spec.tau_max = 2.0;
  Rng rng(15);
  for (int trial = 0; trial < 25; ++trial) {
    // Random member of the structure class: tau u v^T with 1-sparse units.
    SparseRankKFactor target;
    target.s = 1;
    target.k = 1;
    const int i = int(rng.index(3)), j = int(rng.index(3));
    const double tau = (rng.uniform() * 4.0 - 2.0);
    target.components.push_back({tau,
                                 {{i}, {rng.uniform() < 0.5 ? 1.0 : -1.0}},
                                 {{j}, {rng.uniform() < 0.5 ? 1.0 : -1.0}}});
    DenseMatrix tm = materialize(target, 3, 3);
    SskNet net(spec);
    SparseRankKFactor f;
    double best = 1e300;
    while (net.next(f)) best = std::min(best, factor_dist(f, tm, 3, 3));
    CHECK(best <= spec.eps + 1e-12);
  }
}

TEST_CASE("osk emits strictly fewer factors than ssk when supports can overlap") {
  NetSpec spec;
  spec.n = spec.d = 2;
  spec.s = 1;
  spec.k = 2;
  spec.eps = 0.5;
  spec.tau_max = 1.0;
  spec.structure = NetStructure::Ssk;
  std::uint64_t ssk_count = 0, osk_count = 0;
  {
    SskNet net(spec);
    SparseRankKFactor f;
    while (net.next(f)) ++ssk_count;
  }
  spec.structure = NetStructure::Osk;
  {
    SskNet net(spec);
    SparseRankKFactor f;
    while (net.next(f)) ++osk_count;
  }
  CHECK(osk_count < ssk_count);
  CHECK(osk_count > 0);
}

TEST_CASE("budget guard rejects infeasible nets") {
  CHECK_THROWS_AS(SphereNet(40, 0.1), BudgetExceeded);
}
