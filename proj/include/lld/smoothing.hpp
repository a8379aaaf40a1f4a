#pragma once

#include <span>
#include <string>
#include <vector>

namespace lld {

/// Band-limited smoothing pair.
///
/// gamma0 = (K g(a y))^2 where g is the inverse transform of the bump
/// exp(-1/(1-(2 xi/eps)^2)) on (-eps/2, eps/2); the dilation a and scale K make
/// gamma0 >= 1 on [-2, 2]. Its transform gamma0_hat is the self-convolution of
/// the scaled bump (divided by 2 pi), supported in (-a eps, a eps), sampled on a
/// uniform grid of [0, eps] and interpolated by 4-point Lagrange pieces.
/// r0(s) = (1/2pi) (sin s / s) gamma0_hat(s) and r is the d-fold product.
class SmoothingKernel {
 public:
  double epsilon() const { return eps_; }
  double dilation() const { return a_; }
  double scale() const { return K_; }
  double grid_step() const { return step_; }
  const std::vector<double>& gamma0_hat_samples() const { return hat_; }  // on [0, eps]

  double gamma0(double y) const;
  double gamma0_hat(double xi) const;
  double r0(double s) const;
  double r(std::span<const double> s) const;
  /// (1/2) int_{-1}^{1} gamma0(z - t) dt: the function whose expectation
  /// under S_n - x is the Fourier bound. It dominates the indicator of (-1, 1].
  double smoothed_indicator(double z) const;

  friend SmoothingKernel build_kernel(double eps);

 private:
  double base_g(double x) const;  // inverse transform of the undilated bump

  double eps_ = 0.0;
  double a_ = 1.0;
  double K_ = 1.0;
  double step_ = 0.0;
  std::vector<double> hat_;
  std::vector<double> bump_nodes_, bump_weights_;  // for base_g
};

/// Builds (or loads from $LLD_CACHE_DIR) the kernel for band limit eps in (0, pi/4].
/// Throws NumericalError naming the failed step if any invariant check fails.
SmoothingKernel build_kernel(double eps);

double eval_r(const SmoothingKernel& kernel, std::span<const double> s);

struct KernelCertificate {
  double min_gamma0_core = 0.0;    // min of gamma0 on [-2, 2] (10^4 points)
  double min_gamma0_wide = 0.0;    // min of gamma0 on [-50, 50]
  double parseval_error = 0.0;     // |(1/2pi) int gamma0_hat - gamma0(0)|
  double support_value = 0.0;      // max |r0| sampled beyond eps
  double c2_drift = 0.0;           // relative change of max |r0''| under step halving
  double min_indicator_core = 0.0; // min of smoothed_indicator on [-1, 1]
  bool ok() const;
};

KernelCertificate certify_kernel(const SmoothingKernel& kernel);

}  // namespace lld
