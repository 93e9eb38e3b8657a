#include "slra/nets.hpp"

#include <cmath>
#include <stdexcept>

#include "slra/budget.hpp"

namespace slra {

std::uint64_t binomial(int n, int s) {
  if (s < 0 || s > n) return 0;
  s = std::min(s, n - s);
  std::uint64_t r = 1;
  for (int i = 1; i <= s; ++i) {
    if (r > enumeration_budget() * 16) return r;  // saturate; callers budget-check anyway
    r = r * std::uint64_t(n - s + i) / std::uint64_t(i);
  }
  return r;
}

bool next_combination(std::vector<int>& comb, int n) {
  const int s = int(comb.size());
  int i = s - 1;
  while (i >= 0 && comb[i] == n - s + i) --i;
  if (i < 0) return false;
  ++comb[i];
  for (int j = i + 1; j < s; ++j) comb[j] = comb[j - 1] + 1;
  return true;
}

SphereNet::SphereNet(int dim, double eps) : dim_(dim), eps_(eps) {
  if (dim < 1) throw std::invalid_argument("sphere net dimension must be positive");
  if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("sphere net eps must be in (0,1)");
  step_ = eps / std::sqrt(double(dim));
  radius_ = int(std::floor(1.0 / step_ + 1e-12));
  const std::uint64_t per_axis = std::uint64_t(2 * radius_ + 1);
  grid_size_ = 1;
  for (int i = 0; i < dim_; ++i) {
    if (grid_size_ > enumeration_budget() / per_axis + 1)
      throw BudgetExceeded("sphere net grid too large");
    grid_size_ *= per_axis;
  }
  check_budget(grid_size_, "sphere net");
  reset();
}

void SphereNet::reset() {
  odo_.assign(dim_, -radius_);
  exhausted_ = false;
  // Position one step before the first point; next() advances first.
  odo_[dim_ - 1] = -radius_ - 1;
}

bool SphereNet::advance() {
  for (int i = dim_ - 1; i >= 0; --i) {
    if (odo_[i] < radius_) {
      ++odo_[i];
      for (int j = i + 1; j < dim_; ++j) odo_[j] = -radius_;
      return true;
    }
  }
  return false;
}

bool SphereNet::next(std::vector<double>& out) {
  if (exhausted_) return false;
  while (advance()) {
    double nsq = 0.0;
    for (int i = 0; i < dim_; ++i) {
      const double c = odo_[i] * step_;
      nsq += c * c;
    }
    const double lo = (1.0 - eps_) * (1.0 - eps_);
    if (nsq < lo || nsq > 1.0 + 1e-12) continue;
    const double inv = 1.0 / std::sqrt(nsq);
    out.resize(dim_);
    for (int i = 0; i < dim_; ++i) out[i] = odo_[i] * step_ * inv;
    return true;
  }
  exhausted_ = true;
  return false;
}

std::uint64_t count_sphere_net(int dim, double eps) {
  SphereNet net(dim, eps);
  std::vector<double> pt;
  std::uint64_t c = 0;
  while (net.next(pt)) ++c;
  return c;
}

SparseRank1Net::SparseRank1Net(int n, int d, int s, double eps)
    : n_(n), d_(d), s_(s), x_net_(s, eps / 2.0), y_net_(s, eps / 2.0) {
  if (s < 1 || s > n || s > d) throw std::invalid_argument("sparse rank-1 net: bad sparsity");
  const std::uint64_t supports = binomial(n, s) * binomial(d, s);
  size_bound_ = supports * x_net_.grid_size() * y_net_.grid_size();
  check_budget(std::max(supports, size_bound_ / std::max<std::uint64_t>(1, x_net_.grid_size())),
               "sparse rank-1 net supports");
  check_budget(size_bound_, "sparse rank-1 net");
  reset();
}

void SparseRank1Net::reset() {
  row_sup_.resize(s_);
  col_sup_.resize(s_);
  for (int i = 0; i < s_; ++i) row_sup_[i] = col_sup_[i] = i;
  x_net_.reset();
  y_net_.reset();
  fresh_ = true;
  exhausted_ = false;
}

bool SparseRank1Net::advance_supports() {
  if (next_combination(col_sup_, d_)) return true;
  for (int i = 0; i < s_; ++i) col_sup_[i] = i;
  return next_combination(row_sup_, n_);
}

bool SparseRank1Net::next(SparseVec& x, SparseVec& y) {
  if (exhausted_) return false;
  for (;;) {
    if (fresh_) {
      // Position the inner odometers on their first points.
      if (!x_net_.next(x_pt_)) { exhausted_ = true; return false; }
      if (!y_net_.next(y_pt_)) { exhausted_ = true; return false; }
      fresh_ = false;
    } else {
      if (!y_net_.next(y_pt_)) {
        y_net_.reset();
        if (!y_net_.next(y_pt_)) { exhausted_ = true; return false; }
        if (!x_net_.next(x_pt_)) {
          x_net_.reset();
          if (!x_net_.next(x_pt_)) { exhausted_ = true; return false; }
          if (!advance_supports()) {
            exhausted_ = true;
            return false;
          }
        }
      }
    }
    x.idx = row_sup_;
    x.val = x_pt_;
    y.idx = col_sup_;
    y.val = y_pt_;
    return true;
  }
}

SskNet::SskNet(const NetSpec& spec) : spec_(spec) {
  if (spec.k < 1) throw std::invalid_argument("ssk net: k must be positive");
  if (!(spec.eps > 0.0 && spec.eps < 1.0)) throw std::invalid_argument("ssk net: eps in (0,1)");
  // Component resolution keeps tau' * (rank-1 net error) below eps/2k, so a
  // component is approximated to eps/k overall and the k-term sum to eps.
  component_eps_ = spec.eps / (2.0 * spec.k * std::max(1.0, spec.tau_max));
  if (component_eps_ >= 1.0) component_eps_ = 0.999;

  const double tau_step = spec.eps / (2.0 * spec.k);
  const std::uint64_t half = std::uint64_t(std::floor(spec.tau_max / tau_step + 1e-9));
  check_budget(2 * half + 1, "ssk net tau grid");
  tau_grid_.push_back(0.0);
  for (std::uint64_t i = 1; i <= half; ++i) {
    tau_grid_.push_back(double(i) * tau_step);
    tau_grid_.push_back(-double(i) * tau_step);
  }

  SparseRank1Net r1(spec.n, spec.d, spec.s, component_eps_);
  SparseVec x, y;
  while (r1.next(x, y)) {
    components_.push_back({x, y});
    check_budget(components_.size(), "ssk net component list");
  }
  component_count_ = components_.size() * tau_grid_.size();
  double total = 1.0;
  for (int i = 0; i < spec.k; ++i) total *= double(component_count_);
  if (total > double(enumeration_budget()))
    throw BudgetExceeded("ssk net k-fold product exceeds budget");
  reset();
}

void SskNet::reset() {
  odo_.assign(spec_.k, 0);
  if (!odo_.empty()) odo_.back() = std::uint64_t(-1);
  exhausted_ = components_.empty() || tau_grid_.empty();
}

bool SskNet::disjoint_ok(const SparseRankKFactor& f) const {
  return f.disjoint_supports();
}

bool SskNet::next(SparseRankKFactor& out) {
  if (exhausted_) return false;
  for (;;) {
    int i = spec_.k - 1;
    for (; i >= 0; --i) {
      if (odo_[i] + 1 < component_count_) {
        ++odo_[i];
        for (int j = i + 1; j < spec_.k; ++j) odo_[j] = 0;
        break;
      }
    }
    if (i < 0) {
      exhausted_ = true;
      return false;
    }
    out.components.clear();
    out.s = spec_.s;
    out.k = spec_.k;
    out.tau_max = spec_.tau_max;
    for (int c = 0; c < spec_.k; ++c) {
      const std::uint64_t ci = odo_[c] / tau_grid_.size();
      const std::uint64_t ti = odo_[c] % tau_grid_.size();
      const double tau = tau_grid_[ti];
      if (tau == 0.0) continue;
      RankOneComponent comp;
      comp.tau = tau;
      comp.x = components_[ci].x;
      comp.y = components_[ci].y;
      out.components.push_back(std::move(comp));
    }
    if (spec_.structure == NetStructure::Osk && !disjoint_ok(out)) continue;
    return true;
  }
}

}  // namespace slra
