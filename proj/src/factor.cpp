#include "slra/factor.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace slra {

void SparseVec::normalize() {
  const double n = std::sqrt(norm_sq());
  if (n == 0.0) throw std::invalid_argument("cannot normalize zero sparse vector");
  for (double& v : val) v /= n;
}

double SparseVec::dot(const SparseVec& o) const {
  double s = 0.0;
  std::size_t a = 0, b = 0;
  while (a < idx.size() && b < o.idx.size()) {
    if (idx[a] < o.idx[b])
      ++a;
    else if (idx[a] > o.idx[b])
      ++b;
    else
      s += val[a++] * o.val[b++];
  }
  return s;
}

namespace {

void check_sparse_unit(const SparseVec& v, int dim, int s) {
  if (v.idx.size() != v.val.size()) throw std::invalid_argument("index/value length mismatch");
  if (v.nnz() > s) throw std::invalid_argument("factor sparsity exceeds s");
  for (std::size_t i = 0; i < v.idx.size(); ++i) {
    if (v.idx[i] < 0 || v.idx[i] >= dim) throw std::invalid_argument("factor index out of range");
    if (i > 0 && v.idx[i] <= v.idx[i - 1]) throw std::invalid_argument("factor indices not sorted");
  }
  if (std::fabs(v.norm_sq() - 1.0) > 2e-10) throw std::invalid_argument("factor vector not unit norm");
}

bool sorted_disjoint(const std::vector<int>& a, const std::vector<int>& b) {
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] < b[j])
      ++i;
    else if (a[i] > b[j])
      ++j;
    else
      return false;
  }
  return true;
}

}  // namespace

void SparseRankKFactor::validate(int n, int d) const {
  if (int(components.size()) > k) throw std::invalid_argument("component count exceeds k");
  for (const auto& c : components) {
    check_sparse_unit(c.x, n, s);
    check_sparse_unit(c.y, d, s);
    if (std::fabs(c.tau) > tau_max) throw std::invalid_argument("|tau| exceeds tau_max");
  }
}

bool SparseRankKFactor::disjoint_supports() const {
  for (std::size_t a = 0; a + 1 < components.size(); ++a)
    for (std::size_t b = a + 1; b < components.size(); ++b) {
      // Rectangles S_a x T_a and S_b x T_b are disjoint iff rows or cols are.
      if (!sorted_disjoint(components[a].x.idx, components[b].x.idx) &&
          !sorted_disjoint(components[a].y.idx, components[b].y.idx))
        return false;
    }
  return true;
}

double SparseRankKFactor::frob_norm_sq_disjoint() const {
  double s2 = 0.0;
  for (const auto& c : components) s2 += c.tau * c.tau;
  return s2;
}

DenseMatrix materialize(const SparseRankKFactor& f, int n, int d) {
  DenseMatrix a(n, d);
  for (const auto& c : f.components) {
    for (std::size_t ix = 0; ix < c.x.idx.size(); ++ix) {
      if (c.x.idx[ix] >= n) throw std::invalid_argument("materialize: row index out of range");
      const double txi = c.tau * c.x.val[ix];
      for (std::size_t iy = 0; iy < c.y.idx.size(); ++iy) {
        if (c.y.idx[iy] >= d) throw std::invalid_argument("materialize: col index out of range");
        a(c.x.idx[ix], c.y.idx[iy]) += txi * c.y.val[iy];
      }
    }
  }
  return a;
}

}  // namespace slra
