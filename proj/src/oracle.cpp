#include "slra/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "slra/budget.hpp"
#include "slra/nets.hpp"
#include "slra/svd.hpp"

namespace slra {

namespace {

double rank_k_gain(const DenseMatrix& block, int k, SvdResult* svd_out) {
  SvdResult svd = svd_full(block);
  double gain = 0.0;
  const int kk = std::min<int>(k, int(svd.sigma.size()));
  for (int i = 0; i < kk; ++i) gain += svd.sigma[i] * svd.sigma[i];
  if (svd_out) *svd_out = std::move(svd);
  return gain;
}

// Captured squared mass of the best rank-k approximation of an s x s block,
// with closed forms for s <= 2 to keep the enumeration loop allocation-free.
double block_gain(const DenseMatrix& a, const std::vector<int>& rows,
                  const std::vector<int>& cols, int s, int k) {
  if (s == 1) {
    const double v = a(rows[0], cols[0]);
    return v * v;
  }
  if (s == 2) {
    const double p = a(rows[0], cols[0]), q = a(rows[0], cols[1]);
    const double r = a(rows[1], cols[0]), t = a(rows[1], cols[1]);
    const double mass = p * p + q * q + r * r + t * t;
    if (k >= 2) return mass;
    const double det = p * t - q * r;
    const double disc = std::sqrt(std::max(0.0, mass * mass - 4.0 * det * det));
    return 0.5 * (mass + disc);
  }
  DenseMatrix block(s, s);
  for (int i = 0; i < s; ++i)
    for (int j = 0; j < s; ++j) block(i, j) = a(rows[i], cols[j]);
  return rank_k_gain(block, k, nullptr);
}

SparseRankKFactor factor_from_block_svd(const SvdResult& svd, const std::vector<int>& rows,
                                        const std::vector<int>& cols, int s, int k,
                                        double tau_max) {
  SparseRankKFactor f;
  f.s = s;
  f.k = k;
  f.tau_max = tau_max;
  const int kk = std::min<int>(k, int(svd.sigma.size()));
  for (int c = 0; c < kk; ++c) {
    if (svd.sigma[c] <= 0.0) break;
    RankOneComponent comp;
    comp.tau = svd.sigma[c];
    for (std::size_t i = 0; i < rows.size(); ++i) {
      comp.x.idx.push_back(rows[i]);
      comp.x.val.push_back(svd.U(int(i), c));
    }
    for (std::size_t j = 0; j < cols.size(); ++j) {
      comp.y.idx.push_back(cols[j]);
      comp.y.val.push_back(svd.V(int(j), c));
    }
    f.components.push_back(std::move(comp));
  }
  return f;
}

OracleResult submatrix_oracle(const DenseMatrix& a, int s, int k, double tau_max) {
  const int n = a.rows(), d = a.cols();
  const std::uint64_t count = binomial(n, s) * binomial(d, s);
  check_budget(count, "submatrix oracle");

  const double total = a.frob_norm_sq();
  double best_gain = -1.0;
  std::vector<int> best_rows, best_cols;

  std::vector<int> rows(s), cols(s);
  for (int i = 0; i < s; ++i) rows[i] = i;
  do {
    for (int i = 0; i < s; ++i) cols[i] = i;
    do {
      const double gain = block_gain(a, rows, cols, s, k);
      if (gain > best_gain) {
        best_gain = gain;
        best_rows = rows;
        best_cols = cols;
      }
    } while (next_combination(cols, d));
  } while (next_combination(rows, n));

  DenseMatrix best_block(s, s);
  for (int i = 0; i < s; ++i)
    for (int j = 0; j < s; ++j) best_block(i, j) = a(best_rows[i], best_cols[j]);
  SvdResult svd;
  rank_k_gain(best_block, k, &svd);

  OracleResult r;
  r.factor = factor_from_block_svd(svd, best_rows, best_cols, s, k, tau_max);
  r.cost = std::max(0.0, total - best_gain);
  r.resolution = 0.0;
  return r;
}

OracleResult general_oracle(const DenseMatrix& a, int s, int k, double grid_eps, double tau_max) {
  NetSpec spec;
  spec.n = a.rows();
  spec.d = a.cols();
  spec.s = s;
  spec.k = k;
  spec.eps = grid_eps;
  spec.tau_max = tau_max;
  spec.structure = NetStructure::Ssk;
  SskNet net(spec);

  OracleResult r;
  r.resolution = grid_eps;
  r.cost = a.frob_norm_sq();
  r.factor.s = s;
  r.factor.k = k;
  r.factor.tau_max = tau_max;

  SparseRankKFactor cand;
  while (net.next(cand)) {
    DenseMatrix diff = a;
    diff.add_scaled(materialize(cand, a.rows(), a.cols()), -1.0);
    const double cost = diff.frob_norm_sq();
    if (cost < r.cost) {
      r.cost = cost;
      r.factor = cand;
    }
  }
  return r;
}

}  // namespace

OracleResult brute_force_sparse_lra(const DenseMatrix& a, int s, int k, OracleVariant variant,
                                    double grid_eps, double tau_max) {
  if (s < 1 || s > std::min(a.rows(), a.cols()))
    throw std::invalid_argument("oracle sparsity out of range");
  if (k < 1) throw std::invalid_argument("oracle rank must be positive");
  if (variant == OracleVariant::Submatrix) return submatrix_oracle(a, s, k, tau_max);
  return general_oracle(a, s, k, grid_eps, tau_max);
}

OracleResult greedy_sparse_oracle(const DenseMatrix& a, int s, int k) {
  DenseMatrix residual = a;
  OracleResult out;
  out.factor.s = s;
  out.factor.k = k;
  for (int round = 0; round < k; ++round) {
    OracleResult step = submatrix_oracle(residual, s, 1, 1e18);
    if (step.factor.components.empty()) break;
    residual.add_scaled(materialize(step.factor, a.rows(), a.cols()), -1.0);
    out.factor.components.push_back(step.factor.components[0]);
  }
  out.cost = residual.frob_norm_sq();
  out.resolution = 0.0;
  return out;
}

}  // namespace slra
