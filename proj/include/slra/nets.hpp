#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "slra/factor.hpp"

namespace slra {

enum class NetStructure { Sphere, SparseRank1, Ssk, Osk };

struct NetSpec {
  int n = 0, d = 0;
  int s = 1, k = 1;
  double eps = 0.5;
  double tau_max = 1e6;
  NetStructure structure = NetStructure::Ssk;
};

// Deterministic covering net of the unit sphere in `dim` dimensions: grid over
// [-1,1]^dim with step eps/sqrt(dim), points with norm in [1-eps, 1] kept and
// normalized. Restartable; enumeration order is fixed by the grid odometer.
class SphereNet {
 public:
  SphereNet(int dim, double eps);

  bool next(std::vector<double>& out);
  void reset();
  std::uint64_t grid_size() const { return grid_size_; }

 private:
  int dim_;
  double eps_;
  double step_;
  int radius_;  // grid indices run over [-radius, radius]
  std::uint64_t grid_size_;
  std::vector<int> odo_;
  bool exhausted_ = false;

  bool advance();
};

std::uint64_t count_sphere_net(int dim, double eps);

// Support choices C(n,s) x C(d,s) crossed with sphere nets of resolution
// eps/2 on each side; covers unit-Frobenius s x s-sparse rank-1 matrices to
// distance eps.
class SparseRank1Net {
 public:
  SparseRank1Net(int n, int d, int s, double eps);

  bool next(SparseVec& x, SparseVec& y);
  void reset();
  std::uint64_t size_bound() const { return size_bound_; }

 private:
  int n_, d_, s_;
  std::vector<int> row_sup_, col_sup_;
  SphereNet x_net_, y_net_;
  std::vector<double> x_pt_, y_pt_;
  bool fresh_ = true;
  bool exhausted_ = false;
  std::uint64_t size_bound_;

  bool advance_supports();
};

// k-fold product of rank-1 nets with a tau grid of step eps/2k, optionally
// filtered to pairwise-disjoint component supports (Osk).
class SskNet {
 public:
  explicit SskNet(const NetSpec& spec);

  bool next(SparseRankKFactor& out);
  void reset();

 private:
  NetSpec spec_;
  std::vector<double> tau_grid_;
  double component_eps_;
  std::uint64_t component_count_;

  // Enumerated component list (support pair + unit vectors), shared across the
  // k odometer positions.
  struct Component {
    SparseVec x, y;
  };
  std::vector<Component> components_;
  std::vector<std::uint64_t> odo_;  // k digits over components x tau grid
  bool exhausted_ = false;

  bool disjoint_ok(const SparseRankKFactor& f) const;
};

// Number of s-subsets of [n]; throws if it overflows the enumeration budget.
std::uint64_t binomial(int n, int s);

// Lexicographic next s-combination over [0, n); returns false after the last.
bool next_combination(std::vector<int>& comb, int n);

}  // namespace slra
