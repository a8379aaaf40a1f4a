#pragma once

#include <functional>
#include <vector>

namespace lld::quad {

/// Gauss-Legendre rule on [-1, 1].
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Cached n-point Gauss-Legendre rule (Newton iteration on the Legendre
/// recurrence; nodes accurate to a few ulps for n up to several thousand).
const GaussRule& gauss_legendre(int n);

/// Fixed-order Gauss-Legendre on [a, b].
template <class F>
auto integrate_gl(F&& f, double a, double b, int n) {
  const GaussRule& r = gauss_legendre(n);
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  decltype(f(mid)) acc{};
  for (std::size_t i = 0; i < r.nodes.size(); ++i)
    acc += r.weights[i] * f(mid + half * r.nodes[i]);
  return acc * half;
}

/// Adaptive Gauss-Kronrod (61-point) with relative tolerance; throws
/// NumericalError if the estimated error exceeds max(tol*|I|, abs_floor).
double adaptive(const std::function<double(double)>& f, double a, double b,
                double rel_tol, double abs_floor = 0.0);

/// Adaptive integral over [a, inf) for integrands decaying at least like x^-(1+delta).
double adaptive_to_infinity(const std::function<double(double)>& f, double a,
                            double rel_tol);

}  // namespace lld::quad
