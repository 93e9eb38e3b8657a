#pragma once

#include <vector>

namespace slra {

namespace detail {

// Compensated double-double value (~106-bit mantissa). Enough to hold the
// integer Chebyshev coefficients exactly up to degree 64 and to evaluate the
// heavily cancelling monomial sums.
struct DD {
  double hi = 0.0;
  double lo = 0.0;

  DD() = default;
  DD(double h) : hi(h) {}
  DD(double h, double l) : hi(h), lo(l) {}
  double value() const { return hi + lo; }
};

DD dd_add(DD a, DD b);
DD dd_sub(DD a, DD b);
DD dd_mul(DD a, DD b);
DD dd_div(DD a, DD b);

}  // namespace detail

// Gap-amplifying polynomial p(x) = (1+gamma) alpha T_q(x/alpha) / T_q(1+gamma):
// fixed point at (1+gamma) alpha, p(x) >= x above it, and |p(x)| collapses by
// a 2^(q sqrt(gamma) - 1) factor on [0, alpha]. Coefficients are kept in
// double-double to survive the monomial-basis cancellation.
class ChebyshevPoly {
 public:
  int degree() const { return degree_; }
  double alpha() const { return alpha_; }
  double gamma() const { return gamma_; }

  // Monomial coefficients of p; entry j multiplies x^j. Exactly zero on even
  // powers when the degree is odd.
  std::vector<double> coefficients() const;

  // Horner evaluation of the stored coefficients in double-double.
  double eval_coeffs(double x) const;

  // Independent evaluation through the three-term recurrence.
  double eval_recurrence(double x) const;

 private:
  friend ChebyshevPoly chebyshev_poly(int q, double alpha, double gamma);
  int degree_ = 0;
  double alpha_ = 0.0;
  double gamma_ = 0.0;
  std::vector<detail::DD> coeffs_;  // coefficient of x^j at index j
};

// q in [1, 64]; alpha > 0; gamma in (0, 1].
ChebyshevPoly chebyshev_poly(int q, double alpha, double gamma);

}  // namespace slra
