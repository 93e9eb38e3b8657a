#include "slra/gaussian_noise.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <set>
#include <stdexcept>
#include <tuple>

#include "slra/budget.hpp"
#include "slra/gaussian_sketch.hpp"
#include "slra/nets.hpp"
#include "slra/rng.hpp"
#include "slra/svd.hpp"

namespace slra {

std::vector<double> gen_sparse_vector(int n, int s, std::uint64_t seed) {
  if (s < 0 || s > n) throw std::invalid_argument("sparse vector: s out of range");
  Rng rng(mix64(seed, 0x5bec));
  std::vector<int> support = rng.sample_without_replacement(n, s);
  std::vector<double> v(n, 0.0);
  for (int i : support) v[i] = rng.normal();
  return v;
}

PlantedInstance gen_planted(int n, int s, int k, double lambda, std::uint64_t seed) {
  if (s * k > n) throw std::invalid_argument("planted: disjoint supports need s*k <= n");
  PlantedInstance inst;
  inst.n = n;
  inst.s = s;
  inst.k = k;
  inst.lambda = lambda;
  inst.seed = seed;
  inst.x.s = s;
  inst.x.k = k;
  inst.x.tau_max = 1.0;

  Rng rng(mix64(seed, 0x9a37));
  std::vector<int> row_perm = rng.sample_without_replacement(n, s * k);
  std::vector<int> col_perm = rng.sample_without_replacement(n, s * k);

  std::vector<double> taus(k);
  double max_tau = 0.0;
  for (int c = 0; c < k; ++c) {
    const double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
    taus[c] = sign * (std::fabs(rng.normal()) + 0.5);
    max_tau = std::max(max_tau, std::fabs(taus[c]));
  }

  for (int c = 0; c < k; ++c) {
    RankOneComponent comp;
    comp.tau = taus[c] / max_tau;
    comp.x.idx.assign(row_perm.begin() + c * s, row_perm.begin() + (c + 1) * s);
    comp.y.idx.assign(col_perm.begin() + c * s, col_perm.begin() + (c + 1) * s);
    std::sort(comp.x.idx.begin(), comp.x.idx.end());
    std::sort(comp.y.idx.begin(), comp.y.idx.end());
    comp.x.val.resize(s);
    comp.y.val.resize(s);
    for (int i = 0; i < s; ++i) comp.x.val[i] = rng.normal();
    for (int i = 0; i < s; ++i) comp.y.val[i] = rng.normal();
    comp.x.normalize();
    comp.y.normalize();
    inst.x.components.push_back(std::move(comp));
  }

  inst.a = DenseMatrix::gaussian(n, n, mix64(seed, 0x6015e));
  inst.a.add_scaled(materialize(inst.x, n, n), lambda);
  return inst;
}

FlatLevel flat_level(const std::vector<double>& v) {
  const int m = int(v.size());
  if (m == 0) throw std::invalid_argument("flat_level: empty vector");
  double total = 0.0;
  for (double x : v) total += x * x;
  if (total == 0.0) throw std::invalid_argument("flat_level: zero vector");
  const double logm = std::log2(double(m));
  for (int s_level = 1;; s_level *= 2) {
    FlatLevel out;
    out.s_level = s_level;
    out.threshold = total / (double(s_level) * (1.0 + logm));
    for (double x : v)
      if (x * x >= out.threshold) ++out.count;
    if (2 * out.count >= s_level) return out;
    if (s_level >= m) break;
  }
  throw std::runtime_error("flat_level: no level satisfied the count (unexpected)");
}



namespace {

// Null quantile for sum of m iid g^4: CLT body plus a max-term tail, each at
// half the failure budget. Analytic, so thresholds stay deterministic.
double fourth_moment_threshold(std::uint64_t m, double delta) {
  const double z = -normal_quantile(std::min(0.5, delta / 2.0));
  const double per_entry = delta / (4.0 * double(m));
  const double zmax = -normal_quantile(std::min(0.5, per_entry));
  return 3.0 * double(m) + z * std::sqrt(96.0 * double(m)) + zmax * zmax * zmax * zmax;
}

struct ScanParams {
  int s_eff;      // sparsity driving the level loop (s^2 k entries)
  double lb;      // max(1, ln(s^2 k))
};

// The sampled fourth-moment scan shared by the small-s detector and the
// sparse-components escape of the large-s detector.
bool fourth_moment_scan(const DenseMatrix& a, int b_entries, double fpr_budget,
                        const DetectConstants& c, std::uint64_t seed, const char* branch,
                        DetectionReport* report) {
  const int n = a.rows();
  const double n2 = double(n) * a.cols();
  const double lb = std::max(1.0, std::log(double(b_entries)));
  const int levels = std::max(0, int(std::ceil(std::log2(std::max(1, b_entries))))) + 1;

  std::uint64_t total_trials = 0;
  std::vector<std::uint64_t> m_of(levels), trials_of(levels);
  for (int i = 0; i < levels; ++i) {
    const double sp = double(1 << i);
    const double alpha = std::min(1.0, c.alpha_c / (sp * sp * lb));
    m_of[i] = std::max<std::uint64_t>(1, std::uint64_t(std::ceil(c.m_c * n2 * alpha * alpha)));
    trials_of[i] = std::max<std::uint64_t>(1, std::uint64_t(std::ceil(c.trials_c * sp * sp * lb * lb)));
    total_trials += trials_of[i];
  }
  const double delta_b = fpr_budget / double(total_trials);

  bool fired_any = false;
  for (int i = 0; i < levels; ++i) {
    const std::uint64_t m = m_of[i];
    const double tau = fourth_moment_threshold(m, delta_b);
    for (std::uint64_t t = 0; t < trials_of[i]; ++t) {
      Rng rng(mix64(seed, std::uint64_t(i) * 0x10001 + t, 0xf0f0));
      double y = 0.0;
      for (std::uint64_t u = 0; u < m; ++u) {
        const std::uint64_t flat = rng.index(std::uint64_t(n2));
        const double v = a(int(flat / a.cols()), int(flat % a.cols()));
        y += v * v * v * v;
      }
      report->ledger.add("fourth_moment",
                         std::uint64_t(std::ceil(std::sqrt(double(m)) * lb * std::log(double(n)))));
      const bool fired = y >= tau;
      report->stats.push_back({branch, 1 << i, y, tau, fired, false});
      fired_any = fired_any || fired;
      if (fired) return true;
    }
  }
  return fired_any;
}

}  // namespace

DetectionReport detect_small_s(const DenseMatrix& a, int s, int k, std::uint64_t seed,
                               const DetectConstants& c) {
  DetectionReport report;
  report.regime = "small_s";
  const int b = s * s * k;
  report.signal = fourth_moment_scan(a, b, c.fpr_budget, c, mix64(seed, 0x54a11), "fourth_moment",
                                     &report);
  return report;
}

namespace {

// Exact max over t1 x t2 support pairs (within sampled row/col subsets) of
// sigma_1 of the block: the sup of <A', B> over unit rank-1 B on any support.
// Single-row and single-column patterns reduce to top-t coordinate masses.
double best_block_stat(const DenseMatrix& a, const std::vector<int>& rows,
                       const std::vector<int>& cols, int t1, int t2) {
  if (t1 == 1 || t2 == 1) {
    const bool row_mode = (t1 == 1);
    const auto& outer = row_mode ? rows : cols;
    const auto& inner = row_mode ? cols : rows;
    const int keep = row_mode ? t2 : t1;
    double best_sq = 0.0;
    std::vector<double> sq(inner.size());
    for (int o : outer) {
      for (std::size_t t = 0; t < inner.size(); ++t) {
        const double v = row_mode ? a(o, inner[t]) : a(inner[t], o);
        sq[t] = v * v;
      }
      if (keep < int(sq.size()))
        std::nth_element(sq.begin(), sq.begin() + keep, sq.end(), std::greater<double>());
      double mass = 0.0;
      for (int t = 0; t < std::min<int>(keep, int(sq.size())); ++t) mass += sq[t];
      best_sq = std::max(best_sq, mass);
    }
    return std::sqrt(best_sq);
  }
  std::vector<int> rsel(t1), csel(t2);
  for (int i = 0; i < t1; ++i) rsel[i] = i;
  double best = 0.0;
  DenseMatrix block(t1, t2);
  do {
    for (int j = 0; j < t2; ++j) csel[j] = j;
    do {
      for (int i = 0; i < t1; ++i)
        for (int j = 0; j < t2; ++j) block(i, j) = a(rows[rsel[i]], cols[csel[j]]);
      double sig;
      if (t1 == 1 || t2 == 1) {
        sig = block.frob_norm();
      } else if (t1 == 2 && t2 == 2) {
        const double p = block(0, 0), q = block(0, 1), r = block(1, 0), t = block(1, 1);
        const double mass = p * p + q * q + r * r + t * t;
        const double det = p * t - q * r;
        sig = std::sqrt(0.5 * (mass + std::sqrt(std::max(0.0, mass * mass - 4 * det * det))));
      } else {
        sig = spectral_norm(block);
      }
      best = std::max(best, sig);
    } while (next_combination(csel, int(cols.size())));
  } while (next_combination(rsel, int(rows.size())));
  return best;
}

struct GuessConfig {
  int n1, n2, t1, t2;
  bool operator<(const GuessConfig& o) const {
    return std::tie(n1, n2, t1, t2) < std::tie(o.n1, o.n2, o.t1, o.t2);
  }
};

// Gumbel-extrapolated null quantile of the block statistic, memoized per
// configuration; fixed internal seed keeps the calibration frozen.
double calibrated_threshold(const GuessConfig& g, double delta, int sims) {
  static std::map<std::pair<GuessConfig, double>, double> cache;
  static std::mutex mu;
  const auto key = std::make_pair(g, delta);
  {
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
  }
  std::vector<double> maxima(sims);
  std::vector<int> rows(g.n1), cols(g.n2);
  for (int i = 0; i < g.n1; ++i) rows[i] = i;
  for (int j = 0; j < g.n2; ++j) cols[j] = j;
  for (int t = 0; t < sims; ++t) {
    DenseMatrix null_mat = DenseMatrix::gaussian(g.n1, g.n2, mix64(0xca11b, t, g.n1 * 131 + g.t1));
    maxima[t] = best_block_stat(null_mat, rows, cols, g.t1, g.t2);
  }
  double mean = 0.0, var = 0.0;
  for (double v : maxima) mean += v;
  mean /= sims;
  for (double v : maxima) var += (v - mean) * (v - mean);
  var /= std::max(1, sims - 1);
  // Gumbel via moments: beta = sqrt(6 var)/pi, mu = mean - gamma beta.
  const double beta = std::sqrt(6.0 * var) / 3.14159265358979;
  const double mu_loc = mean - 0.5772156649 * beta;
  const double thr = mu_loc - beta * std::log(-std::log(1.0 - delta));
  {
    std::lock_guard<std::mutex> lock(mu);
    cache[key] = thr;
  }
  return thr;
}

}  // namespace

DetectionReport detect_large_s(const DenseMatrix& a, int s, int k, std::uint64_t seed,
                               const DetectConstants& c) {
  DetectionReport report;
  report.regime = "large_frob";
  const int n = a.rows();
  const double r_guess = std::max(1.0, std::cbrt(double(k)));
  const double ls = std::log(std::max(2.0, double(s)));
  const double lsk = std::log(std::max(2.0, double(s) * k));
  const double ln_n = std::log(std::max(2.0, double(n)));

  // Sparse components fall to the fourth-moment machinery.
  const bool sparse_fire = fourth_moment_scan(a, s * s * k, c.fpr_budget, c,
                                              mix64(seed, 0x1a25e), "fourth_moment", &report);
  if (sparse_fire) {
    report.signal = true;
    report.regime = "small_frob";
    return report;
  }

  struct Guess {
    GuessConfig cfg;
    const char* branch;
    int s1, s2;
  };
  std::vector<Guess> guesses;
  std::set<GuessConfig> seen;
  auto add_guess = [&](int s1, int s2, double mult, const char* branch) {
    GuessConfig g;
    g.n1 = std::min<int>(n, std::max(2, int(std::ceil(mult * s2))));
    g.n2 = std::min<int>(n, std::max(2, int(std::ceil(mult * s1))));
    g.t1 = std::max(1, std::min({int(std::ceil(c.t_c * double(g.n1) * s1 / n)), s1, g.n1}));
    g.t2 = std::max(1, std::min({int(std::ceil(c.t_c * double(g.n2) * s2 / n)), s2, g.n2}));
    if (!seen.insert(g).second) return;  // both branches may land on one config
    guesses.push_back({g, branch, s1, s2});
  };
  for (int s1 = 1; s1 <= s * k; s1 *= 2) {
    for (int s2 = 1; s2 <= s * k; s2 *= 2) {
      add_guess(s1, s2, c.submat_c * (double(k) / r_guess) * ls * ls * ln_n, "large_frob");
      add_guess(s1, s2, c.submat_c * lsk * lsk * ln_n, "small_frob");
    }
  }

  // Per-guess failure budget over the feasible guesses only.
  std::vector<bool> feasible(guesses.size());
  int active = 0;
  for (std::size_t gi = 0; gi < guesses.size(); ++gi) {
    const auto& g = guesses[gi].cfg;
    const double work = (g.t1 == 1 || g.t2 == 1)
                            ? double(g.n1) * g.n2
                            : double(binomial(g.n1, g.t1)) * double(binomial(g.n2, g.t2)) *
                                  double(g.t1) * g.t2;
    feasible[gi] = work <= double(enumeration_budget());
    if (feasible[gi]) ++active;
  }
  const double delta_g = active > 0 ? c.large_fpr / active : c.large_fpr;

  for (std::size_t gi = 0; gi < guesses.size(); ++gi) {
    const auto& gg = guesses[gi];
    TrialStat st;
    st.branch = gg.branch;
    st.level = gg.s1 * 1000 + gg.s2;
    if (!feasible[gi]) {
      st.skipped = true;
      report.stats.push_back(st);
      continue;
    }
    Rng rng(mix64(seed, 0x1a26e + gi));
    std::vector<int> rows = rng.sample_without_replacement(n, gg.cfg.n1);
    std::vector<int> cols = rng.sample_without_replacement(n, gg.cfg.n2);
    report.ledger.add("submatrix_scan", std::uint64_t(gg.cfg.n1) * gg.cfg.n2);
    st.statistic = best_block_stat(a, rows, cols, gg.cfg.t1, gg.cfg.t2);
    st.threshold = calibrated_threshold(gg.cfg, delta_g, c.calib_sims);
    st.fired = st.statistic > st.threshold;
    report.stats.push_back(st);
    if (st.fired) {
      report.signal = true;
      report.regime = gg.branch;
      return report;
    }
  }
  report.signal = false;
  return report;
}

bool estimate_hypothesis_ok(int n, int s, double eps) {
  const double lhs = std::sqrt(2.0 * s * std::log(3.0 * 2.718281828459045 * n / (eps * s)));
  return lhs <= eps * eps * std::sqrt(double(n));
}

int estimate_min_n(int s, double eps, int max_n) {
  for (int n = s; n <= max_n; n = std::max(n + 1, n + n / 64))
    if (estimate_hypothesis_ok(n, s, eps)) return n;
  return -1;
}

EstimateResult estimate_signal(const DenseMatrix& a, int s, int k, double eps, std::uint64_t seed,
                               const EstimateOptions& opt) {
  if (a.rows() != a.cols()) throw std::invalid_argument("estimate expects a square instance");
  const int n = a.rows();
  EstimateResult res;
  res.hypothesis_ok = estimate_hypothesis_ok(n, s, eps);
  const double m_d = opt.m_c * (double(n) * s * k / std::pow(eps, 4)) *
                     std::log(std::max(2.0, double(n) / (eps * s)));
  res.m = std::max(8, int(std::ceil(m_d)));

  GaussianSketch sketch(std::uint64_t(n) * n, res.m, mix64(seed, 0xe57), &res.ledger, "gaussian");
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (a(i, j) != 0.0) sketch.update_flat(std::uint64_t(i) * n + j, a(i, j));

  const DenseMatrix y = sketch.backproject(n, n);

  res.factor.s = s;
  res.factor.k = k;
  res.factor.tau_max = 2.0;
  if (k != 1) {
    // General k: scan the constructive net (budget permitting).
    NetSpec spec{n, n, s, k, eps, 2.0, NetStructure::Osk};
    SskNet net(spec);
    SparseRankKFactor cand;
    double best = -1e300;
    while (net.next(cand)) {
      double score = 0.0;
      const DenseMatrix xm = materialize(cand, n, n);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) score += y(i, j) * xm(i, j);
      if (score > best) {
        best = score;
        res.factor = cand;
      }
    }
    return res;
  }

  // k = 1: the score of the best unit rank-1 on a support is sigma_1 of the
  // backprojected block, so the net argmax is computable exactly. Blocks that
  // could win must hold an entry >= best/s; anchor the scan there.
  double best_entry = 0.0;
  int bi = 0, bj = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (std::fabs(y(i, j)) > best_entry) {
        best_entry = std::fabs(y(i, j));
        bi = i;
        bj = j;
      }

  SupportPair best_sup;
  double best_sig = -1.0;
  auto consider = [&](std::vector<int> rows, std::vector<int> cols) {
    std::sort(rows.begin(), rows.end());
    std::sort(cols.begin(), cols.end());
    SupportPair sp{rows, cols};
    DenseMatrix block = restrict_to(y, sp, RestrictMode::Extract);
    const double sig = spectral_norm(block);
    if (sig > best_sig) {
      best_sig = sig;
      best_sup = sp;
    }
  };

  if (s == 1) {
    consider({bi}, {bj});
  } else if (s == 2) {
    consider({bi, (bi + 1) % n}, {bj, (bj + 1) % n});  // seed the bound
    std::vector<std::pair<int, int>> anchors;
    const double cutoff = best_sig / 2.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (std::fabs(y(i, j)) >= cutoff) anchors.push_back({i, j});
    check_budget(std::uint64_t(anchors.size()) * n * n, "estimate anchor scan");
    for (auto [ai, aj] : anchors) {
      for (int i2 = 0; i2 < n; ++i2) {
        if (i2 == ai) continue;
        for (int j2 = 0; j2 < n; ++j2) {
          if (j2 == aj) continue;
          consider({ai, i2}, {aj, j2});
        }
      }
    }
  } else {
    const std::uint64_t count = binomial(n, s) * binomial(n, s);
    check_budget(count, "estimate support scan");
    std::vector<int> rows(s), cols(s);
    for (int i = 0; i < s; ++i) rows[i] = i;
    do {
      for (int i = 0; i < s; ++i) cols[i] = i;
      do {
        consider(rows, cols);
      } while (next_combination(cols, n));
    } while (next_combination(rows, n));
  }

  // Report the best net point on the winning support, per the net-argmax
  // contract (a net member in the input is then returned verbatim).
  DenseMatrix block = restrict_to(y, best_sup, RestrictMode::Extract);
  SphereNet xnet(s, eps / 2.0), ynet(s, eps / 2.0);
  std::vector<double> xp, yp, best_x, best_y;
  double best_score = -1e300;
  while (xnet.next(xp)) {
    ynet.reset();
    while (ynet.next(yp)) {
      double score = 0.0;
      for (int i = 0; i < s; ++i)
        for (int j = 0; j < s; ++j) score += block(i, j) * xp[i] * yp[j];
      if (score > best_score) {
        best_score = score;
        best_x = xp;
        best_y = yp;
      }
    }
  }
  RankOneComponent comp;
  comp.tau = 1.0;
  for (std::size_t i = 0; i < best_sup.rows.size(); ++i) {
    comp.x.idx.push_back(best_sup.rows[i]);
    comp.x.val.push_back(best_x[i]);
  }
  for (std::size_t j = 0; j < best_sup.cols.size(); ++j) {
    comp.y.idx.push_back(best_sup.cols[j]);
    comp.y.val.push_back(best_y[j]);
  }
  res.factor.components.push_back(std::move(comp));
  return res;
}

}  // namespace slra
