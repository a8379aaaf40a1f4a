#pragma once

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <vector>

namespace lld {

/// Slowly varying function l(x) = c * (log(e + x))^beta.
///
/// beta = 0 is the constant family. The family is positive and continuous on
/// [0, inf) and slowly varying for every real beta.
class SlowlyVarying {
 public:
  enum class Family { constant, log_power };

  SlowlyVarying() = default;
  SlowlyVarying(double c, double beta);

  static SlowlyVarying constant(double c = 1.0) { return {c, 0.0}; }
  static SlowlyVarying log_power(double c, double beta) { return {c, beta}; }

  double operator()(double x) const;
  double c() const { return c_; }
  double beta() const { return beta_; }
  Family family() const { return beta_ == 0.0 ? Family::constant : Family::log_power; }

 private:
  double c_ = 1.0;
  double beta_ = 0.0;
};

/// Evaluates l(x); x must be nonnegative.
double eval_ell(const SlowlyVarying& ell, double x);

/// The corrected slowly varying function used by the norming sequence:
/// l~ = l for alpha < 2, and l~(x) = 1 + int_1^{1+x} l(u)/u du for alpha = 2.
///
/// For alpha = 2 the integral is rewritten in w = log u and accumulated on a
/// fixed grid of w-nodes once; an evaluation adds a short Gauss-Legendre piece
/// from the nearest node, so hot loops never re-run adaptive quadrature.
class EllTilde {
 public:
  EllTilde(const SlowlyVarying& ell, double alpha);

  double operator()(double x) const;
  double alpha() const { return alpha_; }
  const SlowlyVarying& ell() const { return ell_; }

 private:
  double integral_to(double w) const;  // int_0^w l(e^t) dt

  SlowlyVarying ell_;
  double alpha_;
  double step_ = 0.25;
  std::vector<double> cumulative_;  // integral at w = k * step_
};

double eval_ell_tilde(const SlowlyVarying& ell, double alpha, double x);

/// Solves a^alpha / lt(a) = n for a by bisection in log a. Relative residual
/// at most 1e-10 (typically ~1e-15). Throws NumericalError when the bracket
/// [1e-6, a_max] does not contain the root or g is found non-monotone.
double solve_norming(double alpha, const std::function<double(double)>& ell_tilde,
                     double n, double a_max = 1e300);

/// Norming sequence a_n with memoization; safe to share across threads.
class NormingSeq {
 public:
  NormingSeq(double alpha, const SlowlyVarying& ell);

  double alpha() const { return alpha_; }
  const SlowlyVarying& ell() const { return ell_tilde_.ell(); }
  const EllTilde& ell_tilde() const { return ell_tilde_; }

  /// a_n for n >= 1.
  double a(long n) const;

  /// n * l~(a_n) / a_n^alpha, which equals 1 up to the solver residual.
  double normalization_residual(long n) const;

 private:
  double alpha_;
  EllTilde ell_tilde_;
  mutable std::mutex mu_;
  mutable std::map<long, double> memo_;
};

double compute_a_n(const NormingSeq& norm, long n);

/// Ratio int_0^K x^-alpha l(x) dx / ((1-alpha)^-1 K^(1-alpha) l(K)). Tends to 1
/// as K grows (Karamata). Requires alpha in (0,1); larger alpha makes the
/// numerator diverge at 0 and is rejected.
double karamata_check(const SlowlyVarying& ell, double alpha, double K);

struct PotterReport {
  double delta = 0.0;
  double constant = 0.0;  // fitted C
  double worst_x = 0.0;   // pair attaining C
  double worst_y = 0.0;
};

/// Smallest C with l(y)/l(x) <= C max((y/x)^delta, (x/y)^delta) over a
/// log-spaced grid of [1, x_max]^2.
PotterReport potter_check(const SlowlyVarying& ell, double delta, double x_max = 1e12,
                          int points_per_decade = 20);

}  // namespace lld
