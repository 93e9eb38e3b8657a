#pragma once

#include <cstdint>
#include <vector>

#include "slra/dense_matrix.hpp"
#include "slra/factor.hpp"
#include "slra/fixed_accum.hpp"
#include "slra/ledger.hpp"
#include "slra/rng.hpp"

namespace slra {

// m implicit i.i.d. N(0,1) rows over a flattened index space. Rows are never
// stored; entry (l, i) is regenerated from (seed, l, i), so streaming uses
// O(m) memory. Normalization a_m = sqrt(m).
class GaussianSketch {
 public:
  GaussianSketch(std::uint64_t domain, int m, std::uint64_t seed,
                 MeasurementLedger* ledger = nullptr, const std::string& ledger_name = "gaussian");

  void update_flat(std::uint64_t index, double delta);

  double row_entry(int l, std::uint64_t index) const {
    return normal_at(seed_, std::uint64_t(l) * domain_ + index);
  }

  int m() const { return m_; }
  double a_m() const { return a_m_; }
  std::uint64_t domain() const { return domain_; }

  std::vector<double> accumulated() const;

  // (1/a_m^2) ||G vec(A)||^2, an unbiased ||A||_F^2 estimate.
  double frob_norm_sq_estimate() const;

  // (1/a_m^2) <G vec(A), G vec(X)> for a sparse factor X; estimates <A, X>.
  double inner_product_estimate(const SparseRankKFactor& x, int n, int d) const;

  // (1/a_m^2) ||G vec(A) - G vec(X)||^2; estimates ||A - X||_F^2.
  double residual_cost_estimate(const SparseRankKFactor& x, int n, int d) const;

  // Y with Y_ij = (1/a_m^2) sum_l z_l g(l, ij); estimates A entrywise.
  DenseMatrix backproject(int n, int d) const;

  void merge(const GaussianSketch& o);
  const std::vector<FixedAccum>& raw() const { return acc_; }

 private:
  std::uint64_t domain_;
  int m_;
  std::uint64_t seed_;
  double a_m_;
  std::vector<FixedAccum> acc_;

  std::vector<double> sketch_of(const SparseRankKFactor& x, int n, int d) const;
};

}  // namespace slra
