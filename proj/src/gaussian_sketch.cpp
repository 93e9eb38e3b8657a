#include "slra/gaussian_sketch.hpp"

#include <stdexcept>

namespace slra {

namespace {
// Counter layout pairs consecutive rows at a fixed flat index, so ingestion
// produces two normals per Box-Muller evaluation.
inline std::uint64_t pair_base(std::uint64_t index, int m_even) {
  return index * std::uint64_t(m_even) / 2;
}
}  // namespace

GaussianSketch::GaussianSketch(std::uint64_t domain, int m, std::uint64_t seed,
                               MeasurementLedger* ledger, const std::string& ledger_name)
    : domain_(domain), m_(m), seed_(seed), a_m_(std::sqrt(double(m))) {
  if (m < 1) throw std::invalid_argument("gaussian sketch needs m >= 1");
  acc_.resize(m_);
  if (ledger) ledger->add(ledger_name, std::uint64_t(m_));
}

void GaussianSketch::update_flat(std::uint64_t index, double delta) {
  if (index >= domain_) throw std::invalid_argument("gaussian sketch index out of domain");
  const int m_even = m_ + (m_ & 1);
  const std::uint64_t base = pair_base(index, m_even);
  double z0, z1;
  for (int l = 0; l < m_; l += 2) {
    normal_pair(seed_, base + std::uint64_t(l) / 2, z0, z1);
    acc_[l].add(delta * z0);
    if (l + 1 < m_) acc_[l + 1].add(delta * z1);
  }
}

std::vector<double> GaussianSketch::accumulated() const {
  std::vector<double> z(m_);
  for (int l = 0; l < m_; ++l) z[l] = acc_[l].value();
  return z;
}

double GaussianSketch::frob_norm_sq_estimate() const {
  double s = 0.0;
  for (int l = 0; l < m_; ++l) {
    const double v = acc_[l].value();
    s += v * v;
  }
  return s / (a_m_ * a_m_);
}

std::vector<double> GaussianSketch::sketch_of(const SparseRankKFactor& x, int n, int d) const {
  if (std::uint64_t(n) * d != domain_) throw std::invalid_argument("factor shape != sketch domain");
  std::vector<double> zx(m_, 0.0);
  const int m_even = m_ + (m_ & 1);
  double z0, z1;
  for (const auto& c : x.components) {
    for (std::size_t ix = 0; ix < c.x.idx.size(); ++ix) {
      const double tv = c.tau * c.x.val[ix];
      for (std::size_t iy = 0; iy < c.y.idx.size(); ++iy) {
        const double v = tv * c.y.val[iy];
        if (v == 0.0) continue;
        const std::uint64_t flat = std::uint64_t(c.x.idx[ix]) * d + c.y.idx[iy];
        const std::uint64_t base = pair_base(flat, m_even);
        for (int l = 0; l < m_; l += 2) {
          normal_pair(seed_, base + std::uint64_t(l) / 2, z0, z1);
          zx[l] += v * z0;
          if (l + 1 < m_) zx[l + 1] += v * z1;
        }
      }
    }
  }
  return zx;
}

double GaussianSketch::inner_product_estimate(const SparseRankKFactor& x, int n, int d) const {
  const std::vector<double> zx = sketch_of(x, n, d);
  double s = 0.0;
  for (int l = 0; l < m_; ++l) s += acc_[l].value() * zx[l];
  return s / (a_m_ * a_m_);
}

double GaussianSketch::residual_cost_estimate(const SparseRankKFactor& x, int n, int d) const {
  const std::vector<double> zx = sketch_of(x, n, d);
  double s = 0.0;
  for (int l = 0; l < m_; ++l) {
    const double r = acc_[l].value() - zx[l];
    s += r * r;
  }
  return s / (a_m_ * a_m_);
}

DenseMatrix GaussianSketch::backproject(int n, int d) const {
  if (std::uint64_t(n) * d != domain_) throw std::invalid_argument("shape != sketch domain");
  DenseMatrix y(n, d);
  const int m_even = m_ + (m_ & 1);
  const std::vector<double> z = accumulated();
  double z0, z1;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < d; ++j) {
      const std::uint64_t flat = std::uint64_t(i) * d + j;
      const std::uint64_t base = pair_base(flat, m_even);
      double acc = 0.0;
      for (int l = 0; l < m_; l += 2) {
        normal_pair(seed_, base + std::uint64_t(l) / 2, z0, z1);
        acc += z[l] * z0;
        if (l + 1 < m_) acc += z[l + 1] * z1;
      }
      y(i, j) = acc / (a_m_ * a_m_);
    }
  }
  return y;
}

void GaussianSketch::merge(const GaussianSketch& o) {
  if (domain_ != o.domain_ || m_ != o.m_ || seed_ != o.seed_)
    throw std::invalid_argument("gaussian sketch merge: configuration mismatch");
  for (int l = 0; l < m_; ++l) acc_[l].merge(o.acc_[l]);
}

}  // namespace slra
