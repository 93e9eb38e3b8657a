#include "slra/krylov.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "slra/chebyshev.hpp"
#include "slra/rng.hpp"
#include "slra/svd.hpp"

namespace slra {

namespace {

std::vector<double> gaussian_vec(int dim, std::uint64_t seed) {
  std::vector<double> g(dim);
  for (int i = 0; i < dim; ++i) g[i] = normal_at(seed, std::uint64_t(i));
  return g;
}

// Indices of the `count` largest |v| entries, ties toward smaller index.
std::vector<int> top_coords(const std::vector<double>& v, int count) {
  std::vector<int> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  count = std::min<int>(count, int(v.size()));
  std::partial_sort(idx.begin(), idx.begin() + count, idx.end(), [&](int a, int b) {
    const double fa = std::fabs(v[a]), fb = std::fabs(v[b]);
    if (fa != fb) return fa > fb;
    return a < b;
  });
  idx.resize(count);
  std::sort(idx.begin(), idx.end());
  return idx;
}

// y = (A - B) x and its transpose, with B given in factored form.
std::vector<double> op_apply(const DenseMatrix& a, const SparseRankKFactor* b,
                             const std::vector<double>& x, bool transpose, MultCounter* ctr) {
  std::vector<double> y = transpose ? a.tmatvec(x) : a.matvec(x);
  if (ctr) ctr->charge(a.nnz());
  if (b) {
    for (const auto& c : b->components) {
      const SparseVec& in = transpose ? c.x : c.y;
      const SparseVec& out = transpose ? c.y : c.x;
      double dot = 0.0;
      for (std::size_t t = 0; t < in.idx.size(); ++t) dot += in.val[t] * x[in.idx[t]];
      dot *= c.tau;
      for (std::size_t t = 0; t < out.idx.size(); ++t) y[out.idx[t]] -= dot * out.val[t];
    }
  }
  return y;
}

void orthogonalize_against(std::vector<double>& w, const std::vector<std::vector<double>>& basis) {
  for (int pass = 0; pass < 2; ++pass) {
    for (const auto& q : basis) {
      double dot = 0.0;
      for (std::size_t i = 0; i < w.size(); ++i) dot += w[i] * q[i];
      for (std::size_t i = 0; i < w.size(); ++i) w[i] -= dot * q[i];
    }
  }
}

double norm2(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

int est_iters(int n, int d, double eps, double c) {
  const double it = (c / std::sqrt(eps)) * std::log(4.0 * std::max(n, d));
  return std::max(4, int(std::ceil(it)));
}

}  // namespace

KrylovIterates krylov_build(const DenseMatrix& a, int depth, std::uint64_t seed, MultCounter* ctr) {
  if (depth < 1) throw std::invalid_argument("krylov depth must be >= 1");
  KrylovIterates it;
  it.depth = depth;
  it.g_seed = seed;
  it.vectors.reserve(std::size_t(depth) + 1);
  std::vector<double> g = gaussian_vec(a.cols(), seed);
  std::vector<double> v = a.matvec(g);
  if (ctr) ctr->charge(a.nnz());
  it.vectors.push_back(v);
  for (int i = 1; i <= depth; ++i) {
    std::vector<double> w = a.tmatvec(v);
    v = a.matvec(w);
    if (ctr) ctr->charge(a.nnz(), 2);
    it.vectors.push_back(v);
  }
  return it;
}

int power_depth(int n, int d, int s, int k, double eps, double c) {
  const double r_est = double(std::min(n, d));
  const double arg = s * double(k) * k * std::sqrt(s * r_est * std::log(std::max(3.0, double(n)))) / eps;
  const double q = (c / std::sqrt(eps)) * std::log(std::max(arg, 2.718281828459045));
  return std::max(1, int(std::ceil(q)));
}

SupportPair power_support(const DenseMatrix& a, int k, int s, double eps, const KrylovOptions& opt,
                          MultCounter* ctr) {
  if (!(eps > 0.0 && eps < 0.5)) throw std::invalid_argument("power_support eps must be in (0, 1/2)");
  const int depth = power_depth(a.rows(), a.cols(), s, k, eps, opt.depth_c);
  KrylovIterates left = krylov_build(a, depth, mix64(opt.seed, 0x4b41), ctr);
  KrylovIterates right = krylov_build(a.transpose(), depth, mix64(opt.seed, 0x4b42), ctr);
  SupportPair sup;
  sup.rows = top_coords(left.vectors.back(), s * k);
  sup.cols = top_coords(right.vectors.back(), s * k);
  return sup;
}

double spectral_estimate(const DenseMatrix& a, const SparseRankKFactor* deflate, int iters,
                         std::uint64_t seed, MultCounter* ctr) {
  // Golub-Kahan bidiagonalization with full reorthogonalization; the top
  // singular value of the bidiagonal projection never exceeds ||A - B||_2.
  const int d = a.cols();
  std::vector<std::vector<double>> us, vs;
  std::vector<double> alphas, betas;

  std::vector<double> v = gaussian_vec(d, mix64(seed, 0x6b1));
  const double vn = norm2(v);
  if (vn == 0.0) return 0.0;
  for (double& x : v) x /= vn;
  vs.push_back(v);

  std::vector<double> u = op_apply(a, deflate, v, false, ctr);
  double alpha = norm2(u);
  if (alpha == 0.0) return 0.0;
  for (double& x : u) x /= alpha;
  us.push_back(u);
  alphas.push_back(alpha);

  for (int t = 1; t < iters; ++t) {
    std::vector<double> w = op_apply(a, deflate, us.back(), true, ctr);
    orthogonalize_against(w, vs);
    const double beta = norm2(w);
    if (beta <= 1e-300) break;
    for (double& x : w) x /= beta;
    betas.push_back(beta);
    vs.push_back(w);

    std::vector<double> z = op_apply(a, deflate, w, false, ctr);
    orthogonalize_against(z, us);
    alpha = norm2(z);
    if (alpha <= 1e-300) {
      alphas.push_back(0.0);
      break;
    }
    for (double& x : z) x /= alpha;
    us.push_back(z);
    alphas.push_back(alpha);
  }

  const int m = int(alphas.size());
  DenseMatrix bi(m, m);
  for (int i = 0; i < m; ++i) {
    bi(i, i) = alphas[i];
    if (i + 1 < m && i < int(betas.size())) bi(i, i + 1) = betas[i];
  }
  return singular_values(bi)[0];
}

namespace {

// Lower estimates for the top singular values of a small extracted matrix via
// a right block-Krylov subspace; exact once the subspace saturates.
struct SubspaceFactor {
  std::vector<double> sigma;
  SvdResult svd;       // of M * Q
  DenseMatrix qbasis;  // cols span the right subspace
};

SubspaceFactor block_krylov_factor(const DenseMatrix& m, int want, double eps, double est_c,
                                   std::uint64_t seed) {
  const int rows = m.rows(), cols = m.cols();
  const int block = std::min(cols, want + 2);
  const int iters = est_iters(rows, cols, eps, est_c);

  std::vector<std::vector<double>> basis;
  std::vector<std::vector<double>> cur(block);
  for (int b = 0; b < block; ++b) cur[b] = gaussian_vec(cols, mix64(seed, 0x5b10 + b));
  for (int t = 0; t <= iters && int(basis.size()) < cols; ++t) {
    for (int b = 0; b < block && int(basis.size()) < cols; ++b) {
      std::vector<double> w = cur[b];
      orthogonalize_against(w, basis);
      const double nw = norm2(w);
      if (nw > 1e-12) {
        for (double& x : w) x /= nw;
        basis.push_back(w);
      }
    }
    if (t == iters) break;
    for (int b = 0; b < block; ++b) cur[b] = m.tmatvec(m.matvec(cur[b]));
    // Rescale to dodge overflow across many powers.
    for (int b = 0; b < block; ++b) {
      const double nb = norm2(cur[b]);
      if (nb > 0.0)
        for (double& x : cur[b]) x /= nb;
    }
  }

  SubspaceFactor f;
  const int dim = int(basis.size());
  if (dim == 0) {
    f.sigma.assign(want, 0.0);
    return f;
  }
  f.qbasis = DenseMatrix(cols, dim);
  for (int j = 0; j < dim; ++j)
    for (int i = 0; i < cols; ++i) f.qbasis(i, j) = basis[j][i];
  DenseMatrix mq = DenseMatrix::multiply(m, f.qbasis);
  f.svd = svd_full(mq);
  f.sigma = f.svd.sigma;
  f.sigma.resize(std::max(want, int(f.sigma.size())), 0.0);
  return f;
}

// Rank-r approximation of the extracted block, embedded on the support.
SparseRankKFactor embedded_approx(const SubspaceFactor& f, const SupportPair& sup, int r) {
  SparseRankKFactor fac;
  fac.s = int(std::max(sup.rows.size(), sup.cols.size()));
  fac.k = r;
  fac.tau_max = 1e18;
  if (f.qbasis.rows() == 0) return fac;
  // M ~ U_r S_r (Q V_r)^T
  for (int c = 0; c < r && c < int(f.svd.sigma.size()); ++c) {
    if (f.svd.sigma[c] <= 0.0) break;
    RankOneComponent comp;
    comp.tau = f.svd.sigma[c];
    for (std::size_t i = 0; i < sup.rows.size(); ++i) {
      comp.x.idx.push_back(sup.rows[i]);
      comp.x.val.push_back(f.svd.U(int(i), c));
    }
    // right vector = Q * V(:, c), then scattered to the column support
    for (std::size_t j = 0; j < sup.cols.size(); ++j) {
      double acc = 0.0;
      for (int t = 0; t < f.qbasis.cols(); ++t) acc += f.qbasis(int(j), t) * f.svd.V(t, c);
      comp.y.idx.push_back(sup.cols[j]);
      comp.y.val.push_back(acc);
    }
    fac.components.push_back(std::move(comp));
  }
  return fac;
}

}  // namespace

SvBounds sv_bounds(const DenseMatrix& a, const SupportPair& sup, int j, double eps,
                   const KrylovOptions& opt, MultCounter* ctr) {
  if (j < 1) throw std::invalid_argument("sv_bounds index must be >= 1");
  DenseMatrix m = restrict_to(a, sup, RestrictMode::Extract);
  SvBounds out;
  out.j = j;

  if (m.rows() == 0 || m.cols() == 0) {
    out.lower = 0.0;
  } else {
    SubspaceFactor f = block_krylov_factor(m, j, eps, opt.est_c, mix64(opt.seed, 0x5e0 + j));
    out.lower = j <= int(f.sigma.size()) ? f.sigma[j - 1] * f.sigma[j - 1] : 0.0;

    const int iters = est_iters(a.rows(), a.cols(), eps, opt.est_c);
    if (j == 1) {
      const double est = spectral_estimate(a, nullptr, iters, mix64(opt.seed, 0x5f1), ctr);
      out.upper = est * est * (1.0 + eps) * (1.0 + eps);
    } else {
      SparseRankKFactor bhat = embedded_approx(f, sup, j - 1);
      const double est = spectral_estimate(a, &bhat, iters, mix64(opt.seed, 0x5f0 + j), ctr);
      out.upper = est * est * (1.0 + eps) * (1.0 + eps);
    }
  }
  out.upper = std::max(out.upper, out.lower);
  return out;
}

SigmaInterval find_sigma_k1(const DenseMatrix& a, const SupportPair& sup, int k, double eps,
                            const KrylovOptions& opt, MultCounter* ctr) {
  const double tight_ratio = 1.0 + 20.0 * eps;
  int lo_j = 1, hi_j = k, best = 0;
  SigmaInterval out;
  while (lo_j <= hi_j) {
    const int mid = (lo_j + hi_j) / 2;
    SvBounds b = sv_bounds(a, sup, mid, eps, opt, ctr);
    ++out.probes;
    const bool tight = b.lower > 0.0 && b.upper <= tight_ratio * b.lower;
    if (tight) {
      best = mid;
      lo_j = mid + 1;  // sigma_mid certified large; sigma_{k+1} lies lower
    } else {
      hi_j = mid - 1;
    }
  }

  // Deflate the certified prefix and read sigma_{k+1} off the remainder.
  DenseMatrix m = restrict_to(a, sup, RestrictMode::Extract);
  const int iters = est_iters(a.rows(), a.cols(), eps, opt.est_c);
  double est;
  if (best == 0) {
    est = spectral_estimate(a, nullptr, iters, mix64(opt.seed, 0x7a0), ctr);
  } else {
    SubspaceFactor f = block_krylov_factor(m, best, eps, opt.est_c, mix64(opt.seed, 0x7a1));
    SparseRankKFactor bhat = embedded_approx(f, sup, best);
    est = spectral_estimate(a, &bhat, iters, mix64(opt.seed, 0x7a2), ctr);
  }
  const double root_eps = std::sqrt(eps);
  if (est <= 1e-300) {
    out.lo = 0.0;
    out.hi = 1e-300;
    return out;
  }
  out.lo = est / ((1.0 + root_eps) * (1.0 + eps));
  out.hi = est * (1.0 + eps);
  return out;
}

SupportPair bucket_sweep(const KrylovIterates& left, const KrylovIterates& right, double lo,
                         double eps, int s, int k) {
  if (!(lo > 0.0)) throw std::invalid_argument("bucket_sweep needs a positive window base");
  // Degree capped at 47: the monomial-basis combination amplifies iterate
  // roundoff by roughly 2^(0.88 q), which stays ~1e-3 relative at 47.
  int q = std::min(2 * left.depth + 1, 47);
  if (q % 2 == 0) --q;
  const ChebyshevPoly unit_poly = chebyshev_poly(q, 1.0, eps);
  const std::vector<double> coeff = unit_poly.coefficients();

  const int n = int(left.vectors[0].size());
  const int d = int(right.vectors[0].size());
  const int top = s * k;
  const int t_hi = int(std::ceil(2.0 / std::sqrt(eps)));

  SupportPair add;
  auto sweep_side = [&](const KrylovIterates& it, int dim, std::vector<int>& accum) {
    std::vector<double> combo(dim);
    for (int t = -1; t <= t_hi + 1; ++t) {
      const double alpha = lo * std::pow(1.0 + eps, double(t));
      if (!(alpha > 1e-150 && alpha < 1e150)) continue;
      std::fill(combo.begin(), combo.end(), 0.0);
      // p_alpha(x) = alpha * p_unit(x/alpha): combine iterates i -> x^(2i+1).
      double inv_pow = 1.0 / alpha;  // alpha^-(2i+1)
      const double inv_sq = 1.0 / (alpha * alpha);
      for (int i = 0; i <= (q - 1) / 2 && i <= it.depth; ++i) {
        const double w = coeff[2 * i + 1] * inv_pow * alpha;
        if (w != 0.0) {
          const std::vector<double>& v = it.vectors[i];
          for (int c = 0; c < dim; ++c) combo[c] += w * v[c];
        }
        inv_pow *= inv_sq;
      }
      std::vector<int> sel = top_coords(combo, top);
      accum.insert(accum.end(), sel.begin(), sel.end());
    }
  };

  sweep_side(left, n, add.rows);
  sweep_side(right, d, add.cols);
  add.normalize();
  return add;
}

SpectralLraResult sparse_spectral_lra(const DenseMatrix& a, int k, int s, double eps,
                                      std::uint64_t seed, const KrylovOptions& opt_in) {
  if (k < 1 || s < 1) throw std::invalid_argument("sparse_spectral_lra needs k,s >= 1");
  if (!(eps > 0.0 && eps < 0.5)) throw std::invalid_argument("eps must be in (0, 1/2)");
  KrylovOptions opt = opt_in;
  opt.seed = seed;

  SpectralLraResult res;
  res.factor.s = s;
  res.factor.k = k;
  res.factor.tau_max = 1e18;
  if (a.frob_norm_sq() == 0.0) return res;

  const int depth = power_depth(a.rows(), a.cols(), s, k, eps, opt.depth_c);
  KrylovIterates left = krylov_build(a, depth, mix64(seed, 0x4b41), &res.counter);
  KrylovIterates right = krylov_build(a.transpose(), depth, mix64(seed, 0x4b42), &res.counter);

  SupportPair sup;
  sup.rows = top_coords(left.vectors.back(), s * k);
  sup.cols = top_coords(right.vectors.back(), s * k);

  SigmaInterval window = find_sigma_k1(a, sup, k, eps, opt, &res.counter);
  res.sigma_lo = window.lo;
  res.sigma_hi = window.hi;

  SupportPair grown = sup;
  if (window.lo > 1e-280) {
    // The sweep touches only precomputed iterates; a_mults stays flat here.
    SupportPair add = bucket_sweep(left, right, window.lo, eps, s, k);
    grown.rows.insert(grown.rows.end(), add.rows.begin(), add.rows.end());
    grown.cols.insert(grown.cols.end(), add.cols.begin(), add.cols.end());
    grown.normalize();
  }
  res.support = grown;

  DenseMatrix m = restrict_to(a, grown, RestrictMode::Extract);
  const int kk = std::min({k, m.rows(), m.cols()});
  if (kk >= 1) {
    SvdResult svd = svd_truncated(m, kk);
    for (int c = 0; c < kk; ++c) {
      if (svd.sigma[c] <= 0.0) break;
      RankOneComponent comp;
      comp.tau = svd.sigma[c];
      for (std::size_t i = 0; i < grown.rows.size(); ++i) {
        comp.x.idx.push_back(grown.rows[i]);
        comp.x.val.push_back(svd.U(int(i), c));
      }
      for (std::size_t j = 0; j < grown.cols.size(); ++j) {
        comp.y.idx.push_back(grown.cols[j]);
        comp.y.val.push_back(svd.V(int(j), c));
      }
      res.factor.components.push_back(std::move(comp));
    }
  }
  res.factor.s = std::max<int>(1, int(std::max(grown.rows.size(), grown.cols.size())));

  const int iters = est_iters(a.rows(), a.cols(), eps, opt.est_c);
  const double est =
      spectral_estimate(a, res.factor.components.empty() ? nullptr : &res.factor, iters,
                        mix64(seed, 0x9c1), &res.counter);
  res.err = est * 1.05;
  return res;
}

}  // namespace slra
