#include "slra/chebyshev.hpp"

#include <cmath>
#include <stdexcept>

namespace slra {

namespace detail {

namespace {

inline DD two_sum(double a, double b) {
  const double s = a + b;
  const double bb = s - a;
  return DD(s, (a - (s - bb)) + (b - bb));
}

inline DD two_prod(double a, double b) {
  const double p = a * b;
  return DD(p, std::fma(a, b, -p));
}

}  // namespace

DD dd_add(DD a, DD b) {
  DD s = two_sum(a.hi, b.hi);
  s.lo += a.lo + b.lo;
  DD t = two_sum(s.hi, s.lo);
  return t;
}

DD dd_sub(DD a, DD b) { return dd_add(a, DD(-b.hi, -b.lo)); }

DD dd_mul(DD a, DD b) {
  DD p = two_prod(a.hi, b.hi);
  p.lo += a.hi * b.lo + a.lo * b.hi;
  return two_sum(p.hi, p.lo);
}

DD dd_div(DD a, DD b) {
  const double q1 = a.hi / b.hi;
  DD r = dd_sub(a, dd_mul(DD(q1), b));
  const double q2 = r.value() / b.hi;
  return two_sum(q1, q2);
}

}  // namespace detail

namespace {

using detail::DD;
using detail::dd_add;
using detail::dd_div;
using detail::dd_mul;
using detail::dd_sub;

// T_q(t) by the three-term recurrence, all in double-double.
DD cheb_t(int q, DD t) {
  if (q == 0) return DD(1.0);
  DD prev(1.0), cur = t;
  for (int i = 2; i <= q; ++i) {
    DD next = dd_sub(dd_mul(DD(2.0), dd_mul(t, cur)), prev);
    prev = cur;
    cur = next;
  }
  return cur;
}

}  // namespace

ChebyshevPoly chebyshev_poly(int q, double alpha, double gamma) {
  if (q < 1 || q > 64) throw std::invalid_argument("chebyshev degree must be in [1, 64]");
  if (!(alpha > 0.0)) throw std::invalid_argument("chebyshev alpha must be positive");
  if (!(gamma > 0.0 && gamma <= 1.0)) throw std::invalid_argument("chebyshev gamma must be in (0,1]");

  // Integer monomial coefficients of T_q via the recurrence; exact in DD.
  std::vector<DD> prev = {DD(1.0)};
  std::vector<DD> cur = {DD(0.0), DD(1.0)};
  for (int i = 2; i <= q; ++i) {
    std::vector<DD> next(std::size_t(i) + 1, DD(0.0));
    for (std::size_t j = 0; j < cur.size(); ++j)
      next[j + 1] = dd_mul(DD(2.0), cur[j]);
    for (std::size_t j = 0; j < prev.size(); ++j)
      next[j] = dd_sub(next[j], prev[j]);
    prev = std::move(cur);
    cur = std::move(next);
  }
  const DD scale = dd_div(dd_mul(DD(1.0 + gamma), DD(alpha)), cheb_t(q, DD(1.0 + gamma)));

  ChebyshevPoly p;
  p.degree_ = q;
  p.alpha_ = alpha;
  p.gamma_ = gamma;
  p.coeffs_.assign(std::size_t(q) + 1, DD(0.0));
  // p(x) = scale * sum_j c_j (x/alpha)^j, so the x^j coefficient divides by alpha^j.
  DD alpha_pow(1.0);
  for (int j = 0; j <= q; ++j) {
    if ((q % 2 == 1) && (j % 2 == 0)) {
      p.coeffs_[j] = DD(0.0);  // odd polynomial: even powers vanish identically
    } else {
      p.coeffs_[j] = dd_div(dd_mul(scale, cur[j]), alpha_pow);
    }
    alpha_pow = dd_mul(alpha_pow, DD(alpha));
  }
  return p;
}

std::vector<double> ChebyshevPoly::coefficients() const {
  std::vector<double> out(coeffs_.size());
  for (std::size_t i = 0; i < coeffs_.size(); ++i) out[i] = coeffs_[i].value();
  return out;
}

double ChebyshevPoly::eval_coeffs(double x) const {
  DD acc(0.0);
  for (int j = degree_; j >= 0; --j) acc = dd_add(dd_mul(acc, DD(x)), coeffs_[j]);
  return acc.value();
}

double ChebyshevPoly::eval_recurrence(double x) const {
  const DD t(x / alpha_);
  const DD scale = dd_div(dd_mul(DD(1.0 + gamma_), DD(alpha_)), cheb_t(degree_, DD(1.0 + gamma_)));
  return dd_mul(scale, cheb_t(degree_, t)).value();
}

}  // namespace slra
