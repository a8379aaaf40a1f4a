#pragma once

#include <vector>

#include "lld/common.hpp"
#include "lld/svf.hpp"

namespace lld {

/// Fourier transform of one regularly varying tail: J(t) = int_1^inf e^{itx} g(x) dx
/// where g = -T' is the density of the tail T(x) = l(x) x^-alpha on [1, inf).
///
/// Constant l uses the incomplete-gamma series near 0 and the Poincare expansion
/// for large |t|. Everything else goes through the rotated contour x = 1 + iy, on
/// which the integrand decays like e^{-ty}.
class TailTransform {
 public:
  TailTransform(double alpha, const SlowlyVarying& ell);

  double alpha() const { return alpha_; }
  const SlowlyVarying& ell() const { return ell_; }
  double mass() const { return mass_; }  // J(0) = T(1)

  cplx value(double t) const;
  /// J(t) - J(0), accurate for tiny |t| (no cancellation against the mass).
  cplx value_minus_mass(double t) const;
  /// dJ/dt = int_1^inf i x e^{itx} g(x) dx; requires alpha > 1.
  cplx derivative(double t) const;

 private:
  cplx density(cplx x) const;  // g continued into Re x > 0
  cplx contour(double t, bool with_x) const;
  cplx pareto_series_minus_mass(double t) const;
  cplx pareto_series_derivative(double t) const;
  cplx pareto_asymptotic(double t) const;

  double alpha_;
  SlowlyVarying ell_;
  double mass_;
  bool pareto_;
};

/// E_1(z) by its convergent series, |z| <= ~8.
cplx expint_e1_series(cplx z);

/// Polylogarithm Li_order(e^{it}) on the unit circle, t in [-pi, pi] \ {0},
/// order in (-1, 2]. Uses the expansion around z = 1 in powers of mu = it,
/// with the zeta coefficients tabulated once per order.
class UnitPolylog {
 public:
  explicit UnitPolylog(double order);
  cplx operator()(double t) const;
  double order() const { return order_; }

 private:
  double order_;
  double gamma_lead_ = 0.0;
  std::vector<double> coef_;  // zeta(order - k) / k!
};

cplx polylog_unit(double order, double t);

/// Number of sin(t)/t with the removable singularity filled in.
double sinc(double t);
/// d/dt sin(t)/t.
double sinc_derivative(double t);

}  // namespace lld
