#include "slra/svd.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace slra {

namespace {

constexpr double kRotTol = 1e-12;
constexpr int kMaxSweeps = 64;

// One-sided Jacobi on column-contiguous W (n x m, m <= n preferred). Rotates
// column pairs until all normalized off-diagonal Gram entries are below tol.
// If v != nullptr it accumulates the right rotations (m x m, column-major).
void jacobi_columns(std::vector<double>& w, int n, int m, std::vector<double>* v) {
  auto col = [&](int j) { return &w[std::size_t(j) * n]; };
  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    bool changed = false;
    for (int p = 0; p < m - 1; ++p) {
      for (int q = p + 1; q < m; ++q) {
        double* cp = col(p);
        double* cq = col(q);
        double app = 0.0, aqq = 0.0, apq = 0.0;
        for (int i = 0; i < n; ++i) {
          app += cp[i] * cp[i];
          aqq += cq[i] * cq[i];
          apq += cp[i] * cq[i];
        }
        if (apq * apq <= kRotTol * kRotTol * app * aqq) continue;
        changed = true;
        const double zeta = (aqq - app) / (2.0 * apq);
        const double t = (zeta >= 0.0 ? 1.0 : -1.0) / (std::fabs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (int i = 0; i < n; ++i) {
          const double xp = cp[i], xq = cq[i];
          cp[i] = c * xp - s * xq;
          cq[i] = s * xp + c * xq;
        }
        if (v) {
          double* vp = &(*v)[std::size_t(p) * m];
          double* vq = &(*v)[std::size_t(q) * m];
          for (int i = 0; i < m; ++i) {
            const double xp = vp[i], xq = vq[i];
            vp[i] = c * xp - s * xq;
            vq[i] = s * xp + c * xq;
          }
        }
      }
    }
    if (!changed) break;
  }
}

// Orthonormal completion for a (near) null column: first standard basis vector
// with residual norm >= 1/2 after projecting out the columns marked done.
void complete_column(std::vector<double>& u, int n, int m, int target,
                     const std::vector<bool>& done) {
  auto col = [&](int j) { return &u[std::size_t(j) * n]; };
  for (int e = 0; e < n; ++e) {
    std::vector<double> cand(n, 0.0);
    cand[e] = 1.0;
    for (int j = 0; j < m; ++j) {
      if (!done[j]) continue;
      const double* cj = col(j);
      double dot = 0.0;
      for (int i = 0; i < n; ++i) dot += cand[i] * cj[i];
      for (int i = 0; i < n; ++i) cand[i] -= dot * cj[i];
    }
    double nrm = 0.0;
    for (int i = 0; i < n; ++i) nrm += cand[i] * cand[i];
    nrm = std::sqrt(nrm);
    if (nrm >= 0.5) {
      double* ct = col(target);
      for (int i = 0; i < n; ++i) ct[i] = cand[i] / nrm;
      return;
    }
  }
  throw std::runtime_error("orthonormal completion failed");
}

struct JacobiFactor {
  std::vector<double> left;   // n x m column-major, orthonormal columns
  std::vector<double> right;  // m x m column-major, orthonormal columns
  std::vector<double> sigma;  // length m, nonincreasing
};

// Factor A (n x m with m <= n assumed by caller) as left * diag(sigma) * right^T.
JacobiFactor factor_tall(const DenseMatrix& a, bool want_bases) {
  const int n = a.rows(), m = a.cols();
  std::vector<double> w(std::size_t(n) * m);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j) w[std::size_t(j) * n + i] = a(i, j);

  std::vector<double> v;
  if (want_bases) {
    v.assign(std::size_t(m) * m, 0.0);
    for (int j = 0; j < m; ++j) v[std::size_t(j) * m + j] = 1.0;
  }
  jacobi_columns(w, n, m, want_bases ? &v : nullptr);

  std::vector<double> nrm(m);
  for (int j = 0; j < m; ++j) {
    double s = 0.0;
    const double* cj = &w[std::size_t(j) * n];
    for (int i = 0; i < n; ++i) s += cj[i] * cj[i];
    nrm[j] = std::sqrt(s);
  }

  std::vector<int> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int x, int y) { return nrm[x] > nrm[y]; });

  JacobiFactor f;
  f.sigma.resize(m);
  for (int j = 0; j < m; ++j) f.sigma[j] = nrm[order[j]];
  if (!want_bases) return f;

  f.left.assign(std::size_t(n) * m, 0.0);
  f.right.assign(std::size_t(m) * m, 0.0);
  const double tiny = (f.sigma.empty() ? 0.0 : f.sigma[0]) * 1e-300;
  std::vector<bool> done(m, false);
  for (int j = 0; j < m; ++j) {
    const int src = order[j];
    for (int i = 0; i < m; ++i) f.right[std::size_t(j) * m + i] = v[std::size_t(src) * m + i];
    if (f.sigma[j] > tiny && f.sigma[j] > 0.0) {
      const double inv = 1.0 / f.sigma[j];
      const double* cs = &w[std::size_t(src) * n];
      double* cd = &f.left[std::size_t(j) * n];
      for (int i = 0; i < n; ++i) cd[i] = cs[i] * inv;
      done[j] = true;
    }
  }
  for (int j = 0; j < m; ++j) {
    if (done[j]) continue;
    complete_column(f.left, n, m, j, done);
    done[j] = true;
  }
  return f;
}

DenseMatrix from_colmajor(const std::vector<double>& cm, int n, int keep) {
  DenseMatrix out(n, keep);
  for (int j = 0; j < keep; ++j)
    for (int i = 0; i < n; ++i) out(i, j) = cm[std::size_t(j) * n + i];
  return out;
}

}  // namespace

DenseMatrix SvdResult::reconstruct() const {
  DenseMatrix us = U;
  for (int i = 0; i < us.rows(); ++i)
    for (int j = 0; j < us.cols(); ++j) us(i, j) *= sigma[j];
  return DenseMatrix::multiply(us, V.transpose());
}

SvdResult svd_full(const DenseMatrix& a) {
  const int n = a.rows(), d = a.cols();
  if (n == 0 || d == 0) throw std::invalid_argument("svd of empty matrix");
  SvdResult r;
  if (d <= n) {
    JacobiFactor f = factor_tall(a, true);
    r.U = from_colmajor(f.left, n, d);
    r.V = from_colmajor(f.right, d, d);
    r.sigma = std::move(f.sigma);
  } else {
    JacobiFactor f = factor_tall(a.transpose(), true);
    r.V = from_colmajor(f.left, d, n);
    r.U = from_colmajor(f.right, n, n);
    r.sigma = std::move(f.sigma);
  }
  return r;
}

SvdResult svd_truncated(const DenseMatrix& a, int k) {
  const int m = std::min(a.rows(), a.cols());
  if (k < 1 || k > m) throw std::invalid_argument("truncation rank out of range");
  SvdResult full = svd_full(a);
  SvdResult r;
  r.sigma.assign(full.sigma.begin(), full.sigma.begin() + k);
  r.U = DenseMatrix(a.rows(), k);
  r.V = DenseMatrix(a.cols(), k);
  for (int j = 0; j < k; ++j) {
    for (int i = 0; i < a.rows(); ++i) r.U(i, j) = full.U(i, j);
    for (int i = 0; i < a.cols(); ++i) r.V(i, j) = full.V(i, j);
  }
  return r;
}

std::vector<double> singular_values(const DenseMatrix& a) {
  if (a.rows() == 0 || a.cols() == 0) throw std::invalid_argument("svd of empty matrix");
  JacobiFactor f = a.cols() <= a.rows() ? factor_tall(a, false) : factor_tall(a.transpose(), false);
  return f.sigma;
}

double spectral_norm(const DenseMatrix& a) { return singular_values(a)[0]; }

}  // namespace slra
