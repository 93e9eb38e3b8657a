#pragma once

#include <cstdint>
#include <vector>

#include "slra/dense_matrix.hpp"
#include "slra/fixed_accum.hpp"
#include "slra/io.hpp"
#include "slra/ledger.hpp"
#include "slra/rng.hpp"

namespace slra {

// Bucket/sign hashes shared by every CountSketch structure. A seeded 64-bit
// mix per (seed, rep) stands in for pairwise independence.
inline int cs_bucket(std::uint64_t seed, int rep, std::uint64_t i, int buckets) {
  return int(mix64(seed ^ (0x517cc1b727220a95ULL * std::uint64_t(rep + 1)), i) % std::uint64_t(buckets));
}

inline double cs_sign(std::uint64_t seed, int rep, std::uint64_t i) {
  return (mix64(seed ^ (0xda942042e4dd58b5ULL * std::uint64_t(rep + 1)), i) >> 63) ? 1.0 : -1.0;
}

// Rounds up to the next odd value so the median over reps is a single cell.
inline int odd_reps(int reps) { return reps % 2 == 0 ? reps + 1 : reps; }

double median_of(std::vector<double>& v);

// r independent sign/bucket tables over a flattened index space. Linear in
// the stream, mergeable across shards with identical configuration.
class CountSketchState {
 public:
  CountSketchState(std::uint64_t domain, int buckets, int reps, std::uint64_t seed,
                   MeasurementLedger* ledger = nullptr, const std::string& ledger_name = "countsketch");

  void update_flat(std::uint64_t index, double delta);
  void update(const StreamUpdate& u, int cols) { update_flat(std::uint64_t(u.row) * cols + u.col, u.delta); }

  // Median-of-reps point estimate.
  double recover_entry(std::uint64_t index) const;

  void merge(const CountSketchState& o);

  std::uint64_t domain() const { return domain_; }
  int buckets() const { return buckets_; }
  int reps() const { return reps_; }
  std::uint64_t seed() const { return seed_; }
  std::uint64_t measurement_rows() const { return std::uint64_t(buckets_) * reps_; }
  std::size_t table_size() const { return std::size_t(reps_) * buckets_; }

  const std::vector<FixedAccum>& raw_tables() const { return tables_; }

 private:
  std::uint64_t domain_;
  int buckets_;
  int reps_;
  std::uint64_t seed_;
  std::vector<FixedAccum> tables_;  // reps_ x buckets_, allocated on first update

  void ensure_tables();
};

// Left CountSketch of a matrix: r tables of buckets x width rows, hashing row
// indices. Supports row recovery (median per coordinate).
class RowSketch {
 public:
  RowSketch(int domain, int width, int buckets, int reps, std::uint64_t seed,
            MeasurementLedger* ledger = nullptr, const std::string& ledger_name = "rowsketch");

  void update(int row, int col, double delta);
  std::vector<double> recover_row(int row) const;
  void merge(const RowSketch& o);

  int buckets() const { return buckets_; }
  int reps() const { return reps_; }
  std::uint64_t measurement_rows() const { return std::uint64_t(buckets_) * reps_ * width_; }
  std::size_t table_size() const { return std::size_t(reps_) * buckets_ * width_; }
  const std::vector<FixedAccum>& raw_tables() const { return tables_; }

 private:
  int domain_, width_, buckets_, reps_;
  std::uint64_t seed_;
  std::vector<FixedAccum> tables_;  // reps x buckets x width

  void ensure_tables();
};

// Row-norm estimator: CountSketch on the left of A G^T where G is a g x width
// Gaussian compression, so per-row l2 norms survive to within (1 +/- alpha)
// plus a tail term. Used to find heavy rows in one pass.
class RowNormSketch {
 public:
  // domain: number of rows hashed; width: ambient length of each row.
  RowNormSketch(int domain, int width, int buckets, int reps, int g, std::uint64_t seed,
                MeasurementLedger* ledger = nullptr, const std::string& ledger_name = "rownorm");

  // Standard parameterization: O(1/eps) buckets, O(log 1/delta) tables, and an
  // O(alpha^-2 log(domain/delta))-row Gaussian compression. Estimates then
  // carry error alpha * ||row|| + sqrt((1+alpha) eps) * (tail Frobenius norm).
  static RowNormSketch with_params(int domain, int width, double eps, double alpha, double delta,
                                   std::uint64_t seed, MeasurementLedger* ledger = nullptr,
                                   const std::string& ledger_name = "rownorm");

  void update(int row, int col, double delta);
  double estimate(int row) const;
  std::vector<double> estimate_all() const;
  void merge(const RowNormSketch& o);

  std::uint64_t measurement_rows() const { return std::uint64_t(buckets_) * reps_ * g_; }
  std::size_t table_size() const { return std::size_t(reps_) * buckets_ * g_; }
  const std::vector<FixedAccum>& raw_tables() const { return tables_; }

 private:
  int domain_, width_, buckets_, reps_, g_;
  std::uint64_t seed_;
  std::vector<double> gauss_;  // g_ x width_, regenerated deterministically from seed
  std::vector<FixedAccum> tables_;

  void ensure_tables();
};

// Test harness for the approximate-matrix-product guarantee: returns
// ||A S^T S B^T - A B^T||_F for one r x d CountSketch S on the shared inner
// dimension.
double cs_amm_check(const DenseMatrix& a, const DenseMatrix& b, int r, std::uint64_t seed);

}  // namespace slra
