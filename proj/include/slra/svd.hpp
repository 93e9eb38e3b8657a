#pragma once

#include <vector>

#include "slra/dense_matrix.hpp"

namespace slra {

// U (n x r) and V (d x r) have orthonormal columns, sigma is nonincreasing.
struct SvdResult {
  DenseMatrix U;
  std::vector<double> sigma;
  DenseMatrix V;

  DenseMatrix reconstruct() const;
};

// Full SVD by one-sided Jacobi on the smaller Gram dimension. Deterministic
// cyclic sweep order; converges when every off-diagonal rotation falls below
// 1e-12 relative. Zero singular directions get orthonormal basis completions.
SvdResult svd_full(const DenseMatrix& a);

// Top-k factors of svd_full. 1 <= k <= min(rows, cols).
SvdResult svd_truncated(const DenseMatrix& a, int k);

// Singular values only (no basis accumulation), nonincreasing.
std::vector<double> singular_values(const DenseMatrix& a);

// sigma_1(A), relative accuracy ~1e-12.
double spectral_norm(const DenseMatrix& a);

}  // namespace slra
