#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "slra/countsketch.hpp"
#include "slra/dense_matrix.hpp"
#include "slra/factor.hpp"
#include "slra/gaussian_sketch.hpp"
#include "slra/io.hpp"
#include "slra/ledger.hpp"

namespace slra {

enum class StreamAlgo { Net, RelErr, AddErr };

// Hidden constants behind the O(.)'s; defaults are the frozen calibration.
struct StreamConstants {
  double net_m = 4.0;            // m = ceil(net_m * sk/eps^2 * ln(n/s))
  double entry_buckets = 4.0;    // ceil(entry_buckets * s^2 k^2 / eps^4)
  double entry_reps = 2.0;       // odd(ceil(entry_reps * ln(nd)))
  double rownorm_buckets = 0.25; // ceil(rownorm_buckets * 100 sk / eps)
  double rownorm_g = 1.0;        // ceil(rownorm_g * 16 * ln(n/delta))
  double rownorm_reps = 1.0;     // odd(ceil(rownorm_reps * ln(1/delta)))
  double delta = 0.01;
  double level_buckets = 0.5;    // ceil(level_buckets * s k^2 ln(n/eps) / eps^6)
  double level_reps = 0.65;      // odd(ceil(level_reps * ln(nd)))
  double amm_t_rows = 4.0;       // ceil(amm_t_rows * sk / eps^3)
  double amm_r_rows = 4.0;       // ceil(amm_r_rows * k / eps^2)
  double amm_reps = 1.0;         // ceil(amm_reps * ln(nsk/eps))
  int fnorm_m = 200;             // Frobenius-estimate Gaussian rows
  double select_cap = 8.0;       // |S|,|T| <= ceil(select_cap * sk/eps)
  double qualify = 0.25;         // level qualification constant (calibrated)
};

struct StreamConfig {
  int n = 0, d = 0;
  int s = 1, k = 1;
  double eps = 0.5;
  std::uint64_t seed = 1;
  StreamAlgo algo = StreamAlgo::Net;
  double tau_max = 10.0;             // bound for the net search space
  bool restricted_submatrix = false; // single-submatrix variant: k -> 1 in level budgets
  StreamConstants c;
};

// T^(j) A R^T tables: per-rep row CountSketches against one shared column
// CountSketch R, used to read approximate rows of A R^T after the pass.
class AmmSketch {
 public:
  AmmSketch(int n, int d, int t_rows, int r_rows, int reps, std::uint64_t seed,
            MeasurementLedger* ledger);

  void update(int row, int col, double delta);
  void merge(const AmmSketch& o);

  int r_rows() const { return r_rows_; }
  int reps() const { return reps_; }
  std::size_t table_size() const { return std::size_t(reps_) * t_rows_ * r_rows_; }
  const std::vector<FixedAccum>& raw() const { return tables_; }

  // Median-of-reps estimate of row i of (A R^T) * p, for p (r_rows x width).
  std::vector<double> recover_row_times(int row, const DenseMatrix& p) const;

  int col_bucket(int col) const { return cs_bucket(seed_ ^ 0xa11c, 0, std::uint64_t(col), r_rows_); }
  double col_sign(int col) const { return cs_sign(seed_ ^ 0xa11c, 0, std::uint64_t(col)); }

 private:
  int n_, d_, t_rows_, r_rows_, reps_;
  std::uint64_t seed_;
  std::vector<FixedAccum> tables_;  // reps x t_rows x r_rows

  void ensure_tables();
};

struct BicriteriaOutput {
  SupportPair support;
  DenseMatrix left;   // |S| x k
  DenseMatrix right;  // |T| x k, D = left * right^T scattered on the support
  double cost_estimate = 0.0;

  DenseMatrix materialize(int n, int d) const;
  SparseRankKFactor as_factor() const;
};

struct NetRecoverResult {
  SparseRankKFactor factor;
  double sketched_cost = 0.0;
};

// One-pass context holding every sketch an algorithm registered. All input
// flows through ingest(); after finalize() the recovery routines may only
// read sketch state.
class StreamContext {
 public:
  explicit StreamContext(const StreamConfig& cfg);

  void ingest(const StreamUpdate& u);
  void ingest(const std::vector<StreamUpdate>& updates);
  void finalize() { finalized_ = true; }
  bool finalized() const { return finalized_; }

  // Shard merging; both contexts must share the configuration.
  void merge(const StreamContext& o);

  // FNV-1a over all accumulator state, for bit-exactness checks.
  std::uint64_t state_digest() const;

  const StreamConfig& config() const { return cfg_; }
  const MeasurementLedger& ledger() const { return ledger_; }

  NetRecoverResult net_recover();
  BicriteriaOutput rel_err_recover();
  BicriteriaOutput add_err_recover();

  // Per-row l2 norm estimates (rows of A / columns of A).
  std::vector<double> row_norm_estimates() const;
  std::vector<double> col_norm_estimates() const;

  double frob_norm_sq_estimate() const;

 private:
  StreamConfig cfg_;
  MeasurementLedger ledger_;
  bool finalized_ = false;

  std::optional<GaussianSketch> gauss_;    // net recovery (Net) / F-norm + costs (others)
  std::optional<CountSketchState> entry_;  // RelErr entrywise
  std::optional<RowNormSketch> rownorm_, colnorm_;
  std::vector<CountSketchState> levels_;   // AddErr per-level entrywise
  std::vector<double> level_alpha_;
  std::optional<AmmSketch> amm_;

  std::uint64_t membership_seed() const { return mix64(cfg_.seed, 0xadd1); }
  bool level_member(int row, double alpha) const {
    return to_unit(mix64(membership_seed(), std::uint64_t(row))) < alpha;
  }

  std::vector<int> select_heavy(const std::vector<double>& est, double threshold) const;
  double cost_estimate_for(const SparseRankKFactor& f) const;
};

// FKV/DKM right factor from a weighted l2 row sample. Rows carry sampling
// probabilities; each is scaled by 1/sqrt(c * p_i). Returns a width x k
// orthonormal matrix (rank may drop; padding with zero rows is implicit).
DenseMatrix linear_time_svd(const std::vector<std::vector<double>>& rows,
                            const std::vector<double>& probs, double c, int k);

}  // namespace slra
