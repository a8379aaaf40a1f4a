#include "lld/tail_cf.hpp"

#include <algorithm>
#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/special_functions/zeta.hpp>
#include <cmath>
#include <vector>

#include "lld/quadrature.hpp"

namespace lld {

namespace {

constexpr double kEuler = 0.57721566490153286061;
constexpr double kE = 2.71828182845904523536;
constexpr double kSeriesLimit = 4.0;
constexpr double kAsymptoticLimit = 40.0;

// int_1^inf e^{itx} amp x^{-expo} dx for large t > 0, by repeated integration by parts.
cplx poincare(double t, cplx amp, double expo) {
  const cplx it(0.0, t);
  cplx term = 1.0 / it;
  cplx sum = term;
  double prev = std::abs(term);
  for (int k = 0; k < 200; ++k) {
    term *= (expo + k) / it;
    const double mag = std::abs(term);
    if (mag > prev) break;
    sum += term;
    prev = mag;
    if (mag < 1e-18 * std::abs(sum)) break;
  }
  return -std::exp(it) * amp * sum;
}

}  // namespace

double sinc(double t) {
  if (std::abs(t) < 1e-4) {
    const double t2 = t * t;
    return 1.0 - t2 / 6.0 + t2 * t2 / 120.0;
  }
  return std::sin(t) / t;
}

double sinc_derivative(double t) {
  if (std::abs(t) < 1e-3) {
    const double t2 = t * t;
    return -t / 3.0 + t * t2 / 30.0;
  }
  return (t * std::cos(t) - std::sin(t)) / (t * t);
}

cplx expint_e1_series(cplx z) {
  cplx sum = 0.0;
  cplx term = 1.0;
  for (int k = 1; k < 200; ++k) {
    term *= -z / static_cast<double>(k);
    const cplx add = term / static_cast<double>(k);
    sum += add;
    if (std::abs(add) < 1e-18 * std::max(1.0, std::abs(sum))) break;
  }
  return -kEuler - std::log(z) - sum;
}

TailTransform::TailTransform(double alpha, const SlowlyVarying& ell)
    : alpha_(alpha), ell_(ell), mass_(ell(1.0)), pareto_(ell.beta() == 0.0) {
  require_supported_alpha(alpha);
}

cplx TailTransform::density(cplx x) const {
  const double c = ell_.c();
  const double beta = ell_.beta();
  if (beta == 0.0) return c * alpha_ * std::pow(x, -alpha_ - 1.0);
  const cplx log_term = std::log(kE + x);
  const cplx l = c * std::pow(log_term, beta);
  const cplx dl = c * beta * std::pow(log_term, beta - 1.0) / (kE + x);
  return alpha_ * l * std::pow(x, -alpha_ - 1.0) - dl * std::pow(x, -alpha_);
}

cplx TailTransform::contour(double t, bool with_x) const {
  // J(t) = (i e^{it}/t) int_0^inf e^{-u} g(1 + iu/t) du for t > 0.
  std::vector<double> cuts{0.0};
  for (double b = t / 8.0; b < 60.0; b *= 2.0) cuts.push_back(b);
  for (double b = 1.0; b < 60.0; b *= 2.0) cuts.push_back(b);
  cuts.push_back(60.0);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  auto integrand = [&](double u) {
    const cplx x(1.0, u / t);
    cplx v = std::exp(-u) * density(x);
    if (with_x) v *= cplx(0.0, 1.0) * x;
    return v;
  };
  cplx acc = 0.0;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k)
    acc += quad::integrate_gl(integrand, cuts[k], cuts[k + 1], 20);
  return cplx(0.0, 1.0) * std::exp(cplx(0.0, t)) / t * acc;
}

cplx TailTransform::pareto_series_minus_mass(double t) const {
  const double c = ell_.c();
  if (t == 0.0) return 0.0;
  if (alpha_ == 2.0) {
    const cplx z(0.0, -t);
    cplx poly = 0.0;
    cplx zk = 1.0;
    double fact = 1.0;
    for (int k = 1; k < 80; ++k) {
      zk *= -z;
      fact *= k;
      const cplx add = zk * ((k + 1.0) / fact);
      poly += add;
      if (std::abs(add) < 1e-19) break;
    }
    return c * (poly + z * z * expint_e1_series(z));
  }
  const cplx lead = -std::tgamma(1.0 - alpha_) * std::pow(cplx(0.0, -t), alpha_);
  cplx sum = 0.0;
  cplx term = 1.0;  // (it)^k / k!
  for (int k = 1; k < 120; ++k) {
    term *= cplx(0.0, t) / static_cast<double>(k);
    const cplx add = term / (alpha_ - k);
    sum += add;
    if (std::abs(term) < 1e-19) break;
  }
  return c * (lead + alpha_ * sum);
}

cplx TailTransform::pareto_series_derivative(double t) const {
  const double c = ell_.c();
  if (alpha_ == 2.0) {
    if (t == 0.0) return cplx(0.0, 2.0 * c);
    const cplx z(0.0, -t);
    return 2.0 * c * cplx(0.0, 1.0) * (std::exp(-z) - z * expint_e1_series(z));
  }
  const cplx lead = t == 0.0 ? cplx(0.0)
                             : -std::tgamma(1.0 - alpha_) * alpha_ *
                                   std::pow(cplx(0.0, -t), alpha_ - 1.0) * cplx(0.0, -1.0);
  // sum_k k (it)^k / (t k! (alpha-k)) = i sum_k (it)^{k-1}/((k-1)! (alpha-k))
  cplx sum = 0.0;
  cplx term = cplx(0.0, 1.0);
  for (int k = 1; k < 120; ++k) {
    if (k > 1) term *= cplx(0.0, t) / static_cast<double>(k - 1);
    sum += term / (alpha_ - k);
    if (std::abs(term) < 1e-19) break;
  }
  return c * (lead + alpha_ * sum);
}

cplx TailTransform::pareto_asymptotic(double t) const {
  return poincare(t, ell_.c() * alpha_, alpha_ + 1.0);
}

cplx TailTransform::value(double t) const {
  if (t == 0.0) return mass_;
  if (t < 0.0) return std::conj(value(-t));
  if (pareto_ && t <= kSeriesLimit) return mass_ + pareto_series_minus_mass(t);
  if (pareto_ && t >= kAsymptoticLimit) return pareto_asymptotic(t);
  return contour(t, false);
}

cplx TailTransform::value_minus_mass(double t) const {
  if (t < 0.0) return std::conj(value_minus_mass(-t));
  if (pareto_ && t <= kSeriesLimit) return pareto_series_minus_mass(t);
  return value(t) - mass_;
}

cplx TailTransform::derivative(double t) const {
  if (!(alpha_ > 1.0)) throw DomainError("tail transform derivative needs a finite mean (alpha > 1)");
  if (t < 0.0) return std::conj(derivative(-t));
  if (pareto_ && t <= kSeriesLimit) return pareto_series_derivative(t);
  if (pareto_ && t >= kAsymptoticLimit)
    return poincare(t, cplx(0.0, ell_.c() * alpha_), alpha_);
  if (t == 0.0) {
    // i E[X; X > 1] = i (T(1) + int_1^inf T)
    const double tail_int = quad::adaptive_to_infinity(
        [this](double x) { return ell_(x) * std::pow(x, -alpha_); }, 1.0, 1e-12);
    return cplx(0.0, mass_ + tail_int);
  }
  return contour(t, true);
}

UnitPolylog::UnitPolylog(double order) : order_(order) {
  if (!(order > -1.0 && order <= 2.0)) throw DomainError("polylog order must lie in (-1, 2]");
  if (order == 0.0 || order == 1.0) return;
  double fact = 1.0;
  for (int k = 0; k < 90; ++k) {
    if (k > 0) fact *= k;
    if (order == 2.0 && k == 1) {
      coef_.push_back(0.0);  // carried by the logarithmic term
      continue;
    }
    coef_.push_back(boost::math::zeta(order - k) / fact);
  }
  if (order != 2.0) gamma_lead_ = std::tgamma(1.0 - order);
}

cplx UnitPolylog::operator()(double t) const {
  if (t == 0.0 || std::abs(t) > kPi) throw DomainError("polylog argument must lie in [-pi,pi] \\ {0}");
  const cplx mu(0.0, t);
  if (order_ == 0.0) {
    const cplx z = std::exp(mu);
    return z / (1.0 - z);
  }
  if (order_ == 1.0) {
    // 1 - e^{it} = -2i sin(t/2) e^{it/2}
    return -std::log(cplx(0.0, -2.0 * std::sin(0.5 * t)) * std::exp(0.5 * mu));
  }
  // Horner in mu over the tabulated coefficients.
  cplx sum = 0.0;
  for (std::size_t k = coef_.size(); k-- > 0;) sum = sum * mu + coef_[k];
  if (order_ == 2.0) return sum + mu * (1.0 - std::log(-mu));
  return sum + gamma_lead_ * std::pow(-mu, order_ - 1.0);
}

cplx polylog_unit(double order, double t) { return UnitPolylog(order)(t); }

}  // namespace lld
