#pragma once

#include <cstdint>
#include <vector>

#include "slra/dense_matrix.hpp"
#include "slra/factor.hpp"

namespace slra {

// Running-time accounting: every multiplication by A or A^T counts one
// a_mult and nnz(A) weighted flops. Work on extracted submatrices is not
// charged here.
struct MultCounter {
  std::uint64_t a_mults = 0;
  std::uint64_t nnz_flops = 0;

  void charge(std::uint64_t nnz, int times = 1) {
    a_mults += times;
    nnz_flops += nnz * std::uint64_t(times);
  }
};

struct KrylovOptions {
  // Multiplier on the iterate-depth formula q = ceil(C/sqrt(eps) * log(...)).
  // Calibrated to 1.5 so the end-to-end multiplication budget holds; the
  // standalone support op can afford larger values.
  double depth_c = 1.5;
  // Multiplier on spectral-estimate iteration counts.
  double est_c = 2.0;
  std::uint64_t seed = 1;
};

// vectors[i] = (A A^T)^i A g, i = 0..depth, for a seeded Gaussian g.
struct KrylovIterates {
  int depth = 0;
  std::uint64_t g_seed = 0;
  std::vector<std::vector<double>> vectors;
};

KrylovIterates krylov_build(const DenseMatrix& a, int depth, std::uint64_t seed,
                            MultCounter* ctr = nullptr);

int power_depth(int n, int d, int s, int k, double eps, double c);

// Top-sk coordinates of the final left and right power iterates; contains
// every heavy coordinate of singular vectors with a (1+sqrt(eps)) gap over
// sigma_{k+1}. Ties break toward smaller indices.
SupportPair power_support(const DenseMatrix& a, int k, int s, double eps,
                          const KrylovOptions& opt = {}, MultCounter* ctr = nullptr);

struct SvBounds {
  int j = 0;
  double lower = 0.0;  // certified lower bound on sigma_j(A)^2
  double upper = 0.0;  // upper bound on sigma_j(A)^2 (holds w.h.p.)
};

SvBounds sv_bounds(const DenseMatrix& a, const SupportPair& sup, int j, double eps,
                   const KrylovOptions& opt = {}, MultCounter* ctr = nullptr);

struct SigmaInterval {
  double lo = 0.0;
  double hi = 0.0;
  int probes = 0;  // sv_bounds calls spent by the binary search
};

// Binary search over j in [k]: tight bounds mean sigma_{k+1} lies lower,
// loose bounds mean search higher. Returns an interval of ratio at most
// (1+sqrt(eps))^2 containing sigma_{k+1}(A).
SigmaInterval find_sigma_k1(const DenseMatrix& a, const SupportPair& sup, int k, double eps,
                            const KrylovOptions& opt = {}, MultCounter* ctr = nullptr);

// Sweep O(1/sqrt(eps)) jump locations alpha across the window above lo,
// combining precomputed iterates with gap-amplifying polynomial coefficients;
// never multiplies by A again. Returns the coordinates to add.
SupportPair bucket_sweep(const KrylovIterates& left, const KrylovIterates& right, double lo,
                         double eps, int s, int k);

struct SpectralLraResult {
  SparseRankKFactor factor;  // rank <= k supported on rows x cols
  SupportPair support;
  double err = 0.0;  // certified estimate of ||A - Ahat||_2
  double sigma_lo = 0.0, sigma_hi = 0.0;
  MultCounter counter;
};

// Full pipeline: power-iteration support discovery, interlacing-certified
// binary search for sigma_{k+1}, Chebyshev bucket sweep, rank-k SVD of the
// extracted submatrix. Assumes the caller's promise that the top-k singular
// vectors are s-sparse.
SpectralLraResult sparse_spectral_lra(const DenseMatrix& a, int k, int s, double eps,
                                      std::uint64_t seed, const KrylovOptions& opt = {});

// Lanczos (Golub-Kahan) value estimate of ||M||_2 for M = A - embedded B; the
// estimate never exceeds the true norm and reaches (1-eps) of it w.h.p.
double spectral_estimate(const DenseMatrix& a, const SparseRankKFactor* deflate, int iters,
                         std::uint64_t seed, MultCounter* ctr = nullptr);

}  // namespace slra
