#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace slra {

// Row-major dense matrix; the universal carrier for inputs, submatrices and
// recovered estimates. All entries must be finite.
class DenseMatrix {
 public:
  DenseMatrix() = default;

  DenseMatrix(int rows, int cols)
      : rows_(rows), cols_(cols), data_(std::size_t(rows) * std::size_t(cols), 0.0) {
    if (rows < 0 || cols < 0) throw std::invalid_argument("negative matrix dimension");
  }

  DenseMatrix(int rows, int cols, std::vector<double> entries)
      : rows_(rows), cols_(cols), data_(std::move(entries)) {
    if (rows < 0 || cols < 0) throw std::invalid_argument("negative matrix dimension");
    if (data_.size() != std::size_t(rows) * std::size_t(cols))
      throw std::invalid_argument("entry count does not match dimensions");
    validate_finite();
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }

  double& operator()(int i, int j) { return data_[std::size_t(i) * cols_ + j]; }
  double operator()(int i, int j) const { return data_[std::size_t(i) * cols_ + j]; }

  const std::vector<double>& data() const { return data_; }
  std::vector<double>& data() { return data_; }

  void validate_finite() const {
    for (double v : data_)
      if (!std::isfinite(v)) throw std::invalid_argument("matrix entry not finite");
  }

  DenseMatrix transpose() const {
    DenseMatrix t(cols_, rows_);
    for (int i = 0; i < rows_; ++i)
      for (int j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
  }

  // y = A x
  std::vector<double> matvec(const std::vector<double>& x) const {
    if (int(x.size()) != cols_) throw std::invalid_argument("matvec dimension mismatch");
    std::vector<double> y(rows_, 0.0);
    for (int i = 0; i < rows_; ++i) {
      const double* row = &data_[std::size_t(i) * cols_];
      double acc = 0.0;
      for (int j = 0; j < cols_; ++j) acc += row[j] * x[j];
      y[i] = acc;
    }
    return y;
  }

  // y = A^T x
  std::vector<double> tmatvec(const std::vector<double>& x) const {
    if (int(x.size()) != rows_) throw std::invalid_argument("tmatvec dimension mismatch");
    std::vector<double> y(cols_, 0.0);
    for (int i = 0; i < rows_; ++i) {
      const double* row = &data_[std::size_t(i) * cols_];
      const double xi = x[i];
      for (int j = 0; j < cols_; ++j) y[j] += row[j] * xi;
    }
    return y;
  }

  static DenseMatrix multiply(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.cols_ != b.rows_) throw std::invalid_argument("multiply dimension mismatch");
    DenseMatrix c(a.rows_, b.cols_);
    for (int i = 0; i < a.rows_; ++i) {
      for (int k = 0; k < a.cols_; ++k) {
        const double aik = a(i, k);
        if (aik == 0.0) continue;
        const double* brow = &b.data_[std::size_t(k) * b.cols_];
        double* crow = &c.data_[std::size_t(i) * c.cols_];
        for (int j = 0; j < b.cols_; ++j) crow[j] += aik * brow[j];
      }
    }
    return c;
  }

  DenseMatrix& add_scaled(const DenseMatrix& o, double alpha) {
    if (o.rows_ != rows_ || o.cols_ != cols_)
      throw std::invalid_argument("add_scaled dimension mismatch");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += alpha * o.data_[i];
    return *this;
  }

  double frob_norm_sq() const {
    double s = 0.0;
    for (double v : data_) s += v * v;
    return s;
  }
  double frob_norm() const { return std::sqrt(frob_norm_sq()); }

  double max_abs() const {
    double m = 0.0;
    for (double v : data_) m = std::max(m, std::fabs(v));
    return m;
  }

  std::uint64_t nnz() const {
    std::uint64_t c = 0;
    for (double v : data_)
      if (v != 0.0) ++c;
    return c;
  }

  double row_norm_sq(int i) const {
    const double* row = &data_[std::size_t(i) * cols_];
    double s = 0.0;
    for (int j = 0; j < cols_; ++j) s += row[j] * row[j];
    return s;
  }

  double col_norm_sq(int j) const {
    double s = 0.0;
    for (int i = 0; i < rows_; ++i) s += (*this)(i, j) * (*this)(i, j);
    return s;
  }

  static DenseMatrix identity(int n) {
    DenseMatrix m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  static DenseMatrix gaussian(int rows, int cols, std::uint64_t seed);

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> data_;
};

// Sorted, duplicate-free index sets selecting a row block S and column block T.
struct SupportPair {
  std::vector<int> rows;
  std::vector<int> cols;

  void normalize();
  void validate(int n, int d) const;
};

enum class RestrictMode { Project, Extract };

// Project: zero everything outside S x T, keeping the ambient shape.
// Extract: return the |S| x |T| block itself.
DenseMatrix restrict_to(const DenseMatrix& a, const SupportPair& sup, RestrictMode mode);

// Scatter a |S| x |T| block back into an n x d matrix of zeros.
DenseMatrix scatter(const DenseMatrix& block, const SupportPair& sup, int n, int d);

// Frobenius norm after zeroing the b entries largest in absolute value.
// Ties break lexicographically by (row, col), smaller index zeroed first.
double entry_tail_frobenius(const DenseMatrix& a, std::uint64_t b);

// Frobenius norm after zeroing the b rows of largest l2 norm (ties: smaller
// row index first).
double row_tail_frobenius(const DenseMatrix& a, int b);

}  // namespace slra
