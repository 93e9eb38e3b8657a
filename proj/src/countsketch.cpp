#include "slra/countsketch.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace slra {

double median_of(std::vector<double>& v) {
  if (v.empty()) throw std::invalid_argument("median of empty vector");
  auto mid = v.begin() + v.size() / 2;
  std::nth_element(v.begin(), mid, v.end());
  return *mid;
}

CountSketchState::CountSketchState(std::uint64_t domain, int buckets, int reps, std::uint64_t seed,
                                   MeasurementLedger* ledger, const std::string& ledger_name)
    : domain_(domain), buckets_(buckets), reps_(odd_reps(reps)), seed_(seed) {
  if (buckets < 1 || reps < 1) throw std::invalid_argument("countsketch needs buckets,reps >= 1");
  if (ledger) ledger->add(ledger_name, measurement_rows());
}

void CountSketchState::ensure_tables() {
  if (tables_.empty()) tables_.resize(std::size_t(reps_) * buckets_);
}

void CountSketchState::update_flat(std::uint64_t index, double delta) {
  if (index >= domain_) throw std::invalid_argument("countsketch index out of domain");
  ensure_tables();
  for (int r = 0; r < reps_; ++r) {
    const int b = cs_bucket(seed_, r, index, buckets_);
    tables_[std::size_t(r) * buckets_ + b].add(cs_sign(seed_, r, index) * delta);
  }
}

double CountSketchState::recover_entry(std::uint64_t index) const {
  if (index >= domain_) throw std::invalid_argument("countsketch index out of domain");
  if (tables_.empty()) return 0.0;
  std::vector<double> est(reps_);
  for (int r = 0; r < reps_; ++r) {
    const int b = cs_bucket(seed_, r, index, buckets_);
    est[r] = cs_sign(seed_, r, index) * tables_[std::size_t(r) * buckets_ + b].value();
  }
  return median_of(est);
}

void CountSketchState::merge(const CountSketchState& o) {
  if (domain_ != o.domain_ || buckets_ != o.buckets_ || reps_ != o.reps_ || seed_ != o.seed_)
    throw std::invalid_argument("countsketch merge: configuration mismatch");
  if (o.tables_.empty()) return;
  ensure_tables();
  for (std::size_t i = 0; i < tables_.size(); ++i) tables_[i].merge(o.tables_[i]);
}

RowSketch::RowSketch(int domain, int width, int buckets, int reps, std::uint64_t seed,
                     MeasurementLedger* ledger, const std::string& ledger_name)
    : domain_(domain), width_(width), buckets_(buckets), reps_(odd_reps(reps)), seed_(seed) {
  if (buckets < 1 || reps < 1 || width < 1) throw std::invalid_argument("rowsketch bad config");
  if (ledger) ledger->add(ledger_name, measurement_rows());
}

void RowSketch::ensure_tables() {
  if (tables_.empty()) tables_.resize(std::size_t(reps_) * buckets_ * width_);
}

void RowSketch::update(int row, int col, double delta) {
  if (row < 0 || row >= domain_ || col < 0 || col >= width_)
    throw std::invalid_argument("rowsketch update out of range");
  ensure_tables();
  for (int r = 0; r < reps_; ++r) {
    const int b = cs_bucket(seed_, r, std::uint64_t(row), buckets_);
    const double s = cs_sign(seed_, r, std::uint64_t(row));
    tables_[(std::size_t(r) * buckets_ + b) * width_ + col].add(s * delta);
  }
}

std::vector<double> RowSketch::recover_row(int row) const {
  std::vector<double> out(width_, 0.0);
  if (tables_.empty()) return out;
  std::vector<double> est(reps_);
  for (int c = 0; c < width_; ++c) {
    for (int r = 0; r < reps_; ++r) {
      const int b = cs_bucket(seed_, r, std::uint64_t(row), buckets_);
      const double s = cs_sign(seed_, r, std::uint64_t(row));
      est[r] = s * tables_[(std::size_t(r) * buckets_ + b) * width_ + c].value();
    }
    out[c] = median_of(est);
  }
  return out;
}

void RowSketch::merge(const RowSketch& o) {
  if (domain_ != o.domain_ || width_ != o.width_ || buckets_ != o.buckets_ || reps_ != o.reps_ ||
      seed_ != o.seed_)
    throw std::invalid_argument("rowsketch merge: configuration mismatch");
  if (o.tables_.empty()) return;
  ensure_tables();
  for (std::size_t i = 0; i < tables_.size(); ++i) tables_[i].merge(o.tables_[i]);
}

RowNormSketch::RowNormSketch(int domain, int width, int buckets, int reps, int g,
                             std::uint64_t seed, MeasurementLedger* ledger,
                             const std::string& ledger_name)
    : domain_(domain), width_(width), buckets_(buckets), reps_(odd_reps(reps)), g_(g), seed_(seed) {
  if (buckets < 1 || reps < 1 || g < 1) throw std::invalid_argument("rownorm sketch bad config");
  gauss_.resize(std::size_t(g_) * width_);
  for (std::size_t i = 0; i + 1 < gauss_.size(); i += 2)
    normal_pair(seed ^ 0x6a09e667f3bcc909ULL, i / 2, gauss_[i], gauss_[i + 1]);
  if (gauss_.size() % 2) {
    double z0, z1;
    normal_pair(seed ^ 0x6a09e667f3bcc909ULL, gauss_.size() / 2, z0, z1);
    gauss_.back() = z0;
  }
  if (ledger) ledger->add(ledger_name, measurement_rows());
}

RowNormSketch RowNormSketch::with_params(int domain, int width, double eps, double alpha,
                                         double delta, std::uint64_t seed,
                                         MeasurementLedger* ledger,
                                         const std::string& ledger_name) {
  if (!(eps > 0.0) || !(alpha > 0.0) || !(delta > 0.0 && delta < 1.0))
    throw std::invalid_argument("rownorm params: eps, alpha > 0 and delta in (0,1)");
  const int buckets = std::max(2, int(std::ceil(4.0 / eps)));
  const int reps = std::max(1, int(std::ceil(std::log(1.0 / delta))));
  const int g = std::max(4, int(std::ceil(std::log(double(domain) / delta) / (alpha * alpha))));
  return RowNormSketch(domain, width, buckets, reps, g, seed, ledger, ledger_name);
}

void RowNormSketch::ensure_tables() {
  if (tables_.empty()) tables_.resize(std::size_t(reps_) * buckets_ * g_);
}

void RowNormSketch::update(int row, int col, double delta) {
  if (row < 0 || row >= domain_ || col < 0 || col >= width_)
    throw std::invalid_argument("rownorm update out of range");
  ensure_tables();
  const double* gcol = nullptr;  // gauss_ is g x width, walk column `col`
  for (int r = 0; r < reps_; ++r) {
    const int b = cs_bucket(seed_, r, std::uint64_t(row), buckets_);
    const double s = cs_sign(seed_, r, std::uint64_t(row)) * delta;
    FixedAccum* cell = &tables_[(std::size_t(r) * buckets_ + b) * g_];
    gcol = &gauss_[col];
    for (int l = 0; l < g_; ++l) cell[l].add(s * gcol[std::size_t(l) * width_]);
  }
}

double RowNormSketch::estimate(int row) const {
  if (tables_.empty()) return 0.0;
  std::vector<double> est(reps_);
  double nsq = 0.0;
  for (int l = 0; l < g_; ++l) {
    for (int r = 0; r < reps_; ++r) {
      const int b = cs_bucket(seed_, r, std::uint64_t(row), buckets_);
      const double s = cs_sign(seed_, r, std::uint64_t(row));
      est[r] = s * tables_[(std::size_t(r) * buckets_ + b) * g_ + l].value();
    }
    const double m = median_of(est);
    nsq += m * m;
  }
  return std::sqrt(nsq / g_);
}

std::vector<double> RowNormSketch::estimate_all() const {
  std::vector<double> out(domain_);
  for (int i = 0; i < domain_; ++i) out[i] = estimate(i);
  return out;
}

void RowNormSketch::merge(const RowNormSketch& o) {
  if (domain_ != o.domain_ || width_ != o.width_ || buckets_ != o.buckets_ ||
      reps_ != o.reps_ || g_ != o.g_ || seed_ != o.seed_)
    throw std::invalid_argument("rownorm merge: configuration mismatch");
  if (o.tables_.empty()) return;
  ensure_tables();
  for (std::size_t i = 0; i < tables_.size(); ++i) tables_[i].merge(o.tables_[i]);
}

double cs_amm_check(const DenseMatrix& a, const DenseMatrix& b, int r, std::uint64_t seed) {
  if (a.cols() != b.cols()) throw std::invalid_argument("amm check: inner dimension mismatch");
  const int d = a.cols();
  // A S^T (n x r) and B S^T (m x r) for one CountSketch S over columns.
  DenseMatrix as(a.rows(), r), bs(b.rows(), r);
  for (int j = 0; j < d; ++j) {
    const int bk = cs_bucket(seed, 0, std::uint64_t(j), r);
    const double sg = cs_sign(seed, 0, std::uint64_t(j));
    for (int i = 0; i < a.rows(); ++i) as(i, bk) += sg * a(i, j);
    for (int i = 0; i < b.rows(); ++i) bs(i, bk) += sg * b(i, j);
  }
  DenseMatrix approx = DenseMatrix::multiply(as, bs.transpose());
  DenseMatrix exact = DenseMatrix::multiply(a, b.transpose());
  approx.add_scaled(exact, -1.0);
  return approx.frob_norm();
}

}  // namespace slra
