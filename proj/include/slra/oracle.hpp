#pragma once

#include "slra/dense_matrix.hpp"
#include "slra/factor.hpp"

namespace slra {

enum class OracleVariant { Submatrix, General };

struct OracleResult {
  SparseRankKFactor factor;
  double cost = 0.0;        // ||A - B||_F^2 of the returned factor
  double resolution = 0.0;  // net resolution for the general variant, 0 otherwise
};

// Ground-truth minimizer for tests and --oracle runs. The submatrix variant
// enumerates every (S,T) in C(n,s) x C(d,s) and takes the rank-k SVD of the
// extracted block: exact for rank k supported on one s x s submatrix. The
// general variant scans the constructive S_{s,k} net at resolution grid_eps
// and returns the best net point, so its cost is optimal only up to the net
// resolution (reported back in `resolution`).
OracleResult brute_force_sparse_lra(const DenseMatrix& a, int s, int k, OracleVariant variant,
                                    double grid_eps = 0.25, double tau_max = 1e6);

// Greedy k-round composition of the submatrix variant (deflating the best
// rank-1 block each round). Feasible at scales where the general variant is
// not; its cost upper-bounds the true S_{s,k} optimum.
OracleResult greedy_sparse_oracle(const DenseMatrix& a, int s, int k);

}  // namespace slra
