#include "slra/streaming.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "slra/budget.hpp"
#include "slra/nets.hpp"
#include "slra/svd.hpp"

namespace slra {

namespace {

int odd_ceil(double v) { return odd_reps(std::max(1, int(std::ceil(v)))); }

std::uint64_t fnv1a(std::uint64_t h, const void* data, std::size_t len) {
  const unsigned char* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Lazy tables hash as their logical size of zeros, so an untouched sketch and
// a cancelled-out sketch digest identically.
std::uint64_t digest_accums(std::uint64_t h, const std::vector<FixedAccum>& acc,
                            std::size_t logical_size) {
  for (std::size_t i = 0; i < logical_size; ++i) {
    const __int128 v = acc.empty() ? __int128(0) : acc[i].raw();
    h = fnv1a(h, &v, sizeof v);
  }
  return h;
}

}  // namespace

AmmSketch::AmmSketch(int n, int d, int t_rows, int r_rows, int reps, std::uint64_t seed,
                     MeasurementLedger* ledger)
    : n_(n), d_(d), t_rows_(t_rows), r_rows_(r_rows), reps_(odd_reps(reps)), seed_(seed) {
  if (t_rows < 1 || r_rows < 1 || reps < 1) throw std::invalid_argument("amm sketch bad config");
  if (ledger) ledger->add("amm", std::uint64_t(t_rows_) * r_rows_ * reps_);
}

void AmmSketch::ensure_tables() {
  if (tables_.empty()) tables_.resize(std::size_t(reps_) * t_rows_ * r_rows_);
}

void AmmSketch::update(int row, int col, double delta) {
  ensure_tables();
  const int cb = col_bucket(col);
  const double cs = col_sign(col) * delta;
  for (int r = 0; r < reps_; ++r) {
    const int tb = cs_bucket(seed_, r, std::uint64_t(row), t_rows_);
    const double ts = cs_sign(seed_, r, std::uint64_t(row));
    tables_[(std::size_t(r) * t_rows_ + tb) * r_rows_ + cb].add(ts * cs);
  }
}

void AmmSketch::merge(const AmmSketch& o) {
  if (n_ != o.n_ || d_ != o.d_ || t_rows_ != o.t_rows_ || r_rows_ != o.r_rows_ ||
      reps_ != o.reps_ || seed_ != o.seed_)
    throw std::invalid_argument("amm merge: configuration mismatch");
  if (o.tables_.empty()) return;
  ensure_tables();
  for (std::size_t i = 0; i < tables_.size(); ++i) tables_[i].merge(o.tables_[i]);
}

std::vector<double> AmmSketch::recover_row_times(int row, const DenseMatrix& p) const {
  const int width = p.cols();
  std::vector<double> out(width, 0.0);
  if (tables_.empty()) return out;
  std::vector<double> est(reps_);
  for (int c = 0; c < width; ++c) {
    for (int r = 0; r < reps_; ++r) {
      const int tb = cs_bucket(seed_, r, std::uint64_t(row), t_rows_);
      const double ts = cs_sign(seed_, r, std::uint64_t(row));
      const FixedAccum* cell = &tables_[(std::size_t(r) * t_rows_ + tb) * r_rows_];
      double acc = 0.0;
      for (int b = 0; b < r_rows_; ++b) acc += cell[b].value() * p(b, c);
      est[r] = ts * acc;
    }
    out[c] = median_of(est);
  }
  return out;
}

DenseMatrix BicriteriaOutput::materialize(int n, int d) const {
  DenseMatrix block = DenseMatrix::multiply(left, right.transpose());
  return scatter(block, support, n, d);
}

SparseRankKFactor BicriteriaOutput::as_factor() const {
  SparseRankKFactor f;
  f.k = left.cols();
  f.s = int(std::max(support.rows.size(), support.cols.size()));
  f.tau_max = 1e18;
  for (int c = 0; c < left.cols(); ++c) {
    RankOneComponent comp;
    comp.tau = 1.0;
    for (std::size_t i = 0; i < support.rows.size(); ++i) {
      comp.x.idx.push_back(support.rows[i]);
      comp.x.val.push_back(left(int(i), c));
    }
    for (std::size_t j = 0; j < support.cols.size(); ++j) {
      comp.y.idx.push_back(support.cols[j]);
      comp.y.val.push_back(right(int(j), c));
    }
    f.components.push_back(std::move(comp));
  }
  return f;
}

StreamContext::StreamContext(const StreamConfig& cfg) : cfg_(cfg) {
  const int n = cfg.n, d = cfg.d, s = cfg.s, k = cfg.k;
  const double eps = cfg.eps;
  if (n < 1 || d < 1 || s < 1 || k < 1) throw std::invalid_argument("stream config dims");
  if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("stream eps in (0,1)");
  const std::uint64_t domain = std::uint64_t(n) * d;
  const auto& c = cfg.c;

  switch (cfg.algo) {
    case StreamAlgo::Net: {
      const int m = int(std::ceil(c.net_m * (double(s) * k / (eps * eps)) *
                                  std::log(double(n) / double(s))));
      gauss_.emplace(domain, std::max(1, m), mix64(cfg.seed, 0x9e1), &ledger_, "gaussian");
      break;
    }
    case StreamAlgo::RelErr: {
      const int q = int(std::ceil(c.entry_buckets * double(s) * s * k * k / std::pow(eps, 4)));
      const int reps = odd_ceil(c.entry_reps * std::log(double(domain) + 1.0));
      entry_.emplace(domain, q, reps, mix64(cfg.seed, 0xce1), &ledger_, "entry_countsketch");
      const int rb = std::max(2, int(std::ceil(c.rownorm_buckets * 100.0 * s * k / eps)));
      const int rg = std::max(4, int(std::ceil(c.rownorm_g * 16.0 * std::log(double(n) / c.delta))));
      const int cg = std::max(4, int(std::ceil(c.rownorm_g * 16.0 * std::log(double(d) / c.delta))));
      const int rreps = odd_ceil(c.rownorm_reps * std::log(1.0 / c.delta));
      rownorm_.emplace(n, d, rb, rreps, rg, mix64(cfg.seed, 0xb01), &ledger_, "rownorm_rows");
      colnorm_.emplace(d, n, rb, rreps, cg, mix64(cfg.seed, 0xc01), &ledger_, "rownorm_cols");
      gauss_.emplace(domain, c.fnorm_m, mix64(cfg.seed, 0x9e2), &ledger_, "fnorm_gaussian");
      break;
    }
    case StreamAlgo::AddErr: {
      const int rb = std::max(2, int(std::ceil(c.rownorm_buckets * 100.0 * s * k / eps)));
      const int rg = std::max(4, int(std::ceil(c.rownorm_g * 16.0 * std::log(double(n) / c.delta))));
      const int cg = std::max(4, int(std::ceil(c.rownorm_g * 16.0 * std::log(double(d) / c.delta))));
      const int rreps = odd_ceil(c.rownorm_reps * std::log(1.0 / c.delta));
      rownorm_.emplace(n, d, rb, rreps, rg, mix64(cfg.seed, 0xb01), &ledger_, "rownorm_rows");
      colnorm_.emplace(d, n, rb, rreps, cg, mix64(cfg.seed, 0xc01), &ledger_, "rownorm_cols");

      const double k_budget = cfg.restricted_submatrix ? double(k) : double(k) * k;
      const int q = std::max(
          4, int(std::ceil(c.level_buckets * s * k_budget *
                           std::log(std::max(2.0, double(n) / eps)) / std::pow(eps, 6))));
      const int lreps = odd_ceil(c.level_reps * std::log(double(domain) + 1.0));
      const int lmax = std::max(0, int(std::floor(std::log2(double(n) * n / (eps * eps)))));
      for (int l = 0; l <= lmax; ++l) {
        level_alpha_.push_back(std::pow(0.5, l));
        levels_.emplace_back(domain, q, lreps, mix64(cfg.seed, 0xadd2 + std::uint64_t(l)),
                             &ledger_, "level_countsketch");
      }

      const int t_rows = std::max(2, int(std::ceil(c.amm_t_rows * s * k / std::pow(eps, 3))));
      const int r_rows = std::max(2, int(std::ceil(c.amm_r_rows * k / (eps * eps))));
      const int areps = odd_ceil(c.amm_reps * std::log(std::max(2.0, double(n) * s * k / eps)));
      amm_.emplace(n, d, t_rows, r_rows, areps, mix64(cfg.seed, 0xa33), &ledger_);
      gauss_.emplace(domain, c.fnorm_m, mix64(cfg.seed, 0x9e2), &ledger_, "fnorm_gaussian");
      break;
    }
  }
}

void StreamContext::ingest(const StreamUpdate& u) {
  if (finalized_) throw std::runtime_error("ingest after finalize");
  if (u.row < 0 || u.row >= cfg_.n || u.col < 0 || u.col >= cfg_.d)
    throw std::invalid_argument("stream update out of range");
  const std::uint64_t flat = std::uint64_t(u.row) * cfg_.d + u.col;
  if (gauss_) gauss_->update_flat(flat, u.delta);
  if (entry_) entry_->update_flat(flat, u.delta);
  if (rownorm_) rownorm_->update(u.row, u.col, u.delta);
  if (colnorm_) colnorm_->update(u.col, u.row, u.delta);
  for (std::size_t l = 0; l < levels_.size(); ++l)
    if (level_member(u.row, level_alpha_[l])) levels_[l].update_flat(flat, u.delta);
  if (amm_) amm_->update(u.row, u.col, u.delta);
}

void StreamContext::ingest(const std::vector<StreamUpdate>& updates) {
  for (const auto& u : updates) ingest(u);
}

void StreamContext::merge(const StreamContext& o) {
  if (cfg_.n != o.cfg_.n || cfg_.d != o.cfg_.d || cfg_.s != o.cfg_.s || cfg_.k != o.cfg_.k ||
      cfg_.seed != o.cfg_.seed || cfg_.algo != o.cfg_.algo)
    throw std::invalid_argument("stream merge: configuration mismatch");
  if (gauss_) gauss_->merge(*o.gauss_);
  if (entry_) entry_->merge(*o.entry_);
  if (rownorm_) rownorm_->merge(*o.rownorm_);
  if (colnorm_) colnorm_->merge(*o.colnorm_);
  for (std::size_t l = 0; l < levels_.size(); ++l) levels_[l].merge(o.levels_[l]);
  if (amm_) amm_->merge(*o.amm_);
  ledger_.merge_max(o.ledger());
}

std::uint64_t StreamContext::state_digest() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  if (gauss_) h = digest_accums(h, gauss_->raw(), gauss_->raw().size());
  if (entry_) h = digest_accums(h, entry_->raw_tables(), entry_->table_size());
  if (rownorm_) h = digest_accums(h, rownorm_->raw_tables(), rownorm_->table_size());
  if (colnorm_) h = digest_accums(h, colnorm_->raw_tables(), colnorm_->table_size());
  for (const auto& l : levels_) h = digest_accums(h, l.raw_tables(), l.table_size());
  if (amm_) h = digest_accums(h, amm_->raw(), amm_->table_size());
  return h;
}

std::vector<double> StreamContext::row_norm_estimates() const {
  if (!rownorm_) throw std::runtime_error("row norms not registered for this algorithm");
  return rownorm_->estimate_all();
}

std::vector<double> StreamContext::col_norm_estimates() const {
  if (!colnorm_) throw std::runtime_error("col norms not registered for this algorithm");
  return colnorm_->estimate_all();
}

double StreamContext::frob_norm_sq_estimate() const {
  if (!gauss_) throw std::runtime_error("no gaussian sketch registered");
  return gauss_->frob_norm_sq_estimate();
}

std::vector<int> StreamContext::select_heavy(const std::vector<double>& est,
                                             double threshold) const {
  std::vector<int> order(est.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (est[a] != est[b]) return est[a] > est[b];
    return a < b;
  });
  const int cap =
      std::max(1, int(std::ceil(cfg_.c.select_cap * cfg_.s * cfg_.k / cfg_.eps)));
  std::vector<int> sel;
  for (int i : order) {
    if (est[i] < threshold || int(sel.size()) >= cap) break;
    sel.push_back(i);
  }
  std::sort(sel.begin(), sel.end());
  return sel;
}

NetRecoverResult StreamContext::net_recover() {
  if (cfg_.algo != StreamAlgo::Net) throw std::runtime_error("net_recover needs the net context");
  finalize();

  NetSpec spec;
  spec.n = cfg_.n;
  spec.d = cfg_.d;
  spec.s = cfg_.s;
  spec.k = cfg_.k;
  spec.eps = cfg_.eps;
  spec.tau_max = cfg_.tau_max;
  spec.structure = NetStructure::Ssk;
  SskNet net(spec);

  NetRecoverResult best;
  best.factor.s = cfg_.s;
  best.factor.k = cfg_.k;
  best.factor.tau_max = cfg_.tau_max;
  best.sketched_cost = gauss_->frob_norm_sq_estimate();  // the zero factor

  SparseRankKFactor cand;
  while (net.next(cand)) {
    const double cost = gauss_->residual_cost_estimate(cand, cfg_.n, cfg_.d);
    if (cost < best.sketched_cost) {
      best.sketched_cost = cost;
      best.factor = cand;
    }
  }
  return best;
}

double StreamContext::cost_estimate_for(const SparseRankKFactor& f) const {
  double frob_d = 0.0;
  DenseMatrix dm = materialize(f, cfg_.n, cfg_.d);
  frob_d = dm.frob_norm_sq();
  const double fhat = gauss_->frob_norm_sq_estimate();
  const double inner = gauss_->inner_product_estimate(f, cfg_.n, cfg_.d);
  return std::max(0.0, fhat - 2.0 * inner + frob_d);
}

BicriteriaOutput StreamContext::rel_err_recover() {
  if (cfg_.algo != StreamAlgo::RelErr) throw std::runtime_error("rel_err_recover needs rel context");
  finalize();
  const int s = cfg_.s, k = cfg_.k;
  const double eps = cfg_.eps;

  const std::vector<double> rest = rownorm_->estimate_all();
  const std::vector<double> cest = colnorm_->estimate_all();

  // Plug-in tail scale: mass outside the top ceil(sk/eps) estimates.
  auto tail_scale = [&](std::vector<double> v) {
    std::sort(v.begin(), v.end(), std::greater<double>());
    const std::size_t skip = std::size_t(std::ceil(double(s) * k / eps));
    double sq = 0.0;
    for (std::size_t i = skip; i < v.size(); ++i) sq += v[i] * v[i];
    return std::sqrt(sq);
  };
  const double row_thr = 0.625 * std::sqrt(eps / (double(s) * k)) * tail_scale(rest);
  const double col_thr = 0.625 * std::sqrt(eps / (double(s) * k)) * tail_scale(cest);

  BicriteriaOutput out;
  out.support.rows = select_heavy(rest, row_thr);
  out.support.cols = select_heavy(cest, col_thr);
  const int sn = int(out.support.rows.size()), sd = int(out.support.cols.size());
  if (sn == 0 || sd == 0) {
    out.left = DenseMatrix(sn, 1);
    out.right = DenseMatrix(sd, 1);
    out.cost_estimate = gauss_->frob_norm_sq_estimate();
    return out;
  }

  DenseMatrix ahat(sn, sd);
  for (int i = 0; i < sn; ++i)
    for (int j = 0; j < sd; ++j)
      ahat(i, j) = entry_->recover_entry(std::uint64_t(out.support.rows[i]) * cfg_.d +
                                         out.support.cols[j]);

  const int kk = std::min({k, sn, sd});
  SvdResult svd = svd_truncated(ahat, kk);
  out.left = DenseMatrix(sn, kk);
  out.right = DenseMatrix(sd, kk);
  for (int c = 0; c < kk; ++c) {
    for (int i = 0; i < sn; ++i) out.left(i, c) = svd.U(i, c) * svd.sigma[c];
    for (int j = 0; j < sd; ++j) out.right(j, c) = svd.V(j, c);
  }
  out.cost_estimate = cost_estimate_for(out.as_factor());
  return out;
}

BicriteriaOutput StreamContext::add_err_recover() {
  if (cfg_.algo != StreamAlgo::AddErr) throw std::runtime_error("add_err_recover needs add context");
  finalize();
  const int s = cfg_.s, k = cfg_.k;
  const double eps = cfg_.eps;

  const double fhat = std::max(0.0, gauss_->frob_norm_sq_estimate());
  BicriteriaOutput out;
  out.cost_estimate = fhat;

  const double tau = eps / (double(s) * k) * fhat;
  const double thr = 0.625 * std::sqrt(tau);
  out.support.rows = select_heavy(rownorm_->estimate_all(), thr);
  out.support.cols = select_heavy(colnorm_->estimate_all(), thr);
  const int sn = int(out.support.rows.size()), sd = int(out.support.cols.size());
  out.left = DenseMatrix(sn, std::max(1, k));
  out.right = DenseMatrix(sd, std::max(1, k));
  if (sn == 0 || sd == 0 || fhat == 0.0) return out;

  // Entrywise recovery of the heavy submatrix from the always-on level 0.
  DenseMatrix ahat(sn, sd);
  for (int i = 0; i < sn; ++i)
    for (int j = 0; j < sd; ++j)
      ahat(i, j) = levels_[0].recover_entry(std::uint64_t(out.support.rows[i]) * cfg_.d +
                                            out.support.cols[j]);
  const double fst = ahat.frob_norm_sq();
  if (fst < eps * fhat) return out;  // zero is already a good additive answer

  // Approximate l2 sample of the heavy rows: a row enters at the deepest
  // level where its recovered mass still clears the qualification bar, and it
  // is kept if the shared membership hash sampled it there.
  std::vector<std::vector<double>> sampled;
  std::vector<double> probs;
  const double bar = cfg_.c.qualify * eps * eps / double(k);
  for (int i = 0; i < sn; ++i) {
    const double rn = ahat.row_norm_sq(i);
    if (rn <= 0.0) continue;
    double alpha_q = rn / (bar * fst);
    int lvl = 0;
    if (alpha_q < 1.0) {
      lvl = std::min<int>(int(levels_.size()) - 1, int(std::ceil(-std::log2(alpha_q))));
      alpha_q = level_alpha_[lvl];
    } else {
      alpha_q = 1.0;
    }
    if (!level_member(out.support.rows[i], alpha_q)) continue;
    std::vector<double> row(sd);
    for (int j = 0; j < sd; ++j)
      row[j] = levels_[lvl].recover_entry(std::uint64_t(out.support.rows[i]) * cfg_.d +
                                          out.support.cols[j]);
    sampled.push_back(std::move(row));
    probs.push_back(alpha_q);
  }

  const int kk = std::min({k, sn, sd});
  DenseMatrix vhat = linear_time_svd(sampled, probs, 1.0, kk);

  // Factorization pass: rows of (A R^T)(R S_T^T Vhat) read from the AMM
  // tables, then projected through Vhat so the output is structurally rank k.
  DenseMatrix p(amm_->r_rows(), kk);
  for (int t = 0; t < sd; ++t) {
    const int b = amm_->col_bucket(out.support.cols[t]);
    const double sg = amm_->col_sign(out.support.cols[t]);
    for (int c = 0; c < kk; ++c) p(b, c) += sg * vhat(t, c);
  }
  out.left = DenseMatrix(sn, kk);
  out.right = vhat;
  for (int i = 0; i < sn; ++i) {
    const std::vector<double> y = amm_->recover_row_times(out.support.rows[i], p);
    for (int c = 0; c < kk; ++c) out.left(i, c) = y[c];
  }
  out.cost_estimate = cost_estimate_for(out.as_factor());
  return out;
}

DenseMatrix linear_time_svd(const std::vector<std::vector<double>>& rows,
                            const std::vector<double>& probs, double c, int k) {
  if (rows.size() != probs.size()) throw std::invalid_argument("rows/probs length mismatch");
  if (k < 1) throw std::invalid_argument("linear_time_svd k >= 1");
  std::size_t width = 0;
  for (const auto& r : rows) width = std::max(width, r.size());
  if (width == 0) {
    // No informative sample: fall back to the first k coordinate directions.
    width = std::size_t(k);
  }
  DenseMatrix stack(std::max<int>(int(rows.size()), k), int(width));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (probs[i] <= 0.0) throw std::invalid_argument("sampling probability must be positive");
    const double w = 1.0 / std::sqrt(c * probs[i]);
    for (std::size_t j = 0; j < rows[i].size(); ++j) stack(int(i), int(j)) = w * rows[i][j];
  }
  SvdResult svd = svd_truncated(stack, std::min<int>(k, std::min(stack.rows(), stack.cols())));
  DenseMatrix v(int(width), k);
  for (int j = 0; j < svd.V.cols() && j < k; ++j)
    for (int i = 0; i < int(width); ++i) v(i, j) = svd.V(i, j);
  return v;
}

}  // namespace slra
