#pragma once

#include <vector>

#include "slra/dense_matrix.hpp"

namespace slra {

// Sparse vector with sorted index list.
struct SparseVec {
  std::vector<int> idx;
  std::vector<double> val;

  int nnz() const { return int(idx.size()); }
  double norm_sq() const {
    double s = 0.0;
    for (double v : val) s += v * v;
    return s;
  }
  void normalize();
  double dot(const SparseVec& o) const;
};

struct RankOneComponent {
  double tau = 0.0;
  SparseVec x;  // over [n]
  SparseVec y;  // over [d]
};

// Sum of at most k rank-1 terms tau_i x_i y_i^T with s-sparse unit factors.
struct SparseRankKFactor {
  std::vector<RankOneComponent> components;
  int s = 0;
  int k = 0;
  double tau_max = 1e6;

  // Checks sparsity, unit norms (1e-10), component count and |tau| <= tau_max.
  void validate(int n, int d) const;

  // Entry supports of the rank-1 terms are pairwise disjoint rectangles.
  bool disjoint_supports() const;

  double frob_norm_sq_disjoint() const;  // sum tau_i^2; valid when disjoint
};

DenseMatrix materialize(const SparseRankKFactor& f, int n, int d);

}  // namespace slra
