#include "slra/dense_matrix.hpp"

#include <algorithm>
#include <tuple>

#include "slra/rng.hpp"

namespace slra {

DenseMatrix DenseMatrix::gaussian(int rows, int cols, std::uint64_t seed) {
  DenseMatrix m(rows, cols);
  Rng rng(seed);
  for (double& v : m.data()) v = rng.normal();
  return m;
}

void SupportPair::normalize() {
  std::sort(rows.begin(), rows.end());
  rows.erase(std::unique(rows.begin(), rows.end()), rows.end());
  std::sort(cols.begin(), cols.end());
  cols.erase(std::unique(cols.begin(), cols.end()), cols.end());
}

void SupportPair::validate(int n, int d) const {
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] < 0 || rows[i] >= n) throw std::invalid_argument("row index out of range");
    if (i > 0 && rows[i] <= rows[i - 1]) throw std::invalid_argument("row set not sorted-unique");
  }
  for (std::size_t i = 0; i < cols.size(); ++i) {
    if (cols[i] < 0 || cols[i] >= d) throw std::invalid_argument("col index out of range");
    if (i > 0 && cols[i] <= cols[i - 1]) throw std::invalid_argument("col set not sorted-unique");
  }
}

DenseMatrix restrict_to(const DenseMatrix& a, const SupportPair& sup, RestrictMode mode) {
  sup.validate(a.rows(), a.cols());
  if (mode == RestrictMode::Extract) {
    DenseMatrix b(int(sup.rows.size()), int(sup.cols.size()));
    for (std::size_t i = 0; i < sup.rows.size(); ++i)
      for (std::size_t j = 0; j < sup.cols.size(); ++j) b(int(i), int(j)) = a(sup.rows[i], sup.cols[j]);
    return b;
  }
  DenseMatrix b(a.rows(), a.cols());
  for (int r : sup.rows)
    for (int c : sup.cols) b(r, c) = a(r, c);
  return b;
}

DenseMatrix scatter(const DenseMatrix& block, const SupportPair& sup, int n, int d) {
  if (int(sup.rows.size()) != block.rows() || int(sup.cols.size()) != block.cols())
    throw std::invalid_argument("scatter support does not match block shape");
  sup.validate(n, d);
  DenseMatrix a(n, d);
  for (int i = 0; i < block.rows(); ++i)
    for (int j = 0; j < block.cols(); ++j) a(sup.rows[i], sup.cols[j]) = block(i, j);
  return a;
}

double entry_tail_frobenius(const DenseMatrix& a, std::uint64_t b) {
  const std::uint64_t total = std::uint64_t(a.rows()) * std::uint64_t(a.cols());
  if (b > total) throw std::invalid_argument("tail count exceeds entry count");
  if (b == 0) return a.frob_norm();
  std::vector<std::tuple<double, int, int>> ent;
  ent.reserve(total);
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) ent.emplace_back(-std::fabs(a(i, j)), i, j);
  std::sort(ent.begin(), ent.end());
  double s = 0.0;
  for (std::uint64_t t = b; t < total; ++t) {
    const double v = -std::get<0>(ent[t]);
    s += v * v;
  }
  return std::sqrt(s);
}

double row_tail_frobenius(const DenseMatrix& a, int b) {
  if (b < 0 || b > a.rows()) throw std::invalid_argument("tail row count out of range");
  std::vector<std::pair<double, int>> rows(a.rows());
  for (int i = 0; i < a.rows(); ++i) rows[i] = {-a.row_norm_sq(i), i};
  std::sort(rows.begin(), rows.end());
  double s = 0.0;
  for (int t = b; t < a.rows(); ++t) s += -rows[t].first;
  return std::sqrt(s);
}

}  // namespace slra
