#include <doctest.h>

#include <cmath>

#include "lld/common.hpp"
#include "lld/quadrature.hpp"
#include "lld/rng.hpp"
#include "lld/smoothing.hpp"

using namespace lld;

TEST_CASE("kernel certificate") {
  for (double eps : {0.25, kPi / 4}) {
    const auto k = build_kernel(eps);
    const auto cert = certify_kernel(k);
    CHECK(cert.ok());
    CHECK(cert.min_gamma0_core >= 1.0);
    CHECK(cert.parseval_error < 1e-6);
    CHECK(cert.support_value == 0.0);
    CHECK(cert.min_indicator_core >= 1.0);
  }
}

TEST_CASE("band limit and values") {
  const auto k = build_kernel(0.25);
  CHECK(k.gamma0(0.0) > 0.0);
  for (int i = 0; i <= 10000; ++i) CHECK(k.gamma0(-2.0 + 4.0 * i / 10000.0) >= 1.0);
  CHECK(k.r0(1.01 * 0.25) == 0.0);
  CHECK(k.r0(-1.01 * 0.25) == 0.0);
  CHECK(k.gamma0_hat(0.26) == 0.0);
  CHECK(k.r0(0.0) == doctest::Approx(k.gamma0_hat(0.0) / (2 * kPi)).epsilon(1e-14));
  const double zero[2] = {0.0, 0.0};
  CHECK(eval_r(k, zero) == doctest::Approx(std::pow(k.gamma0_hat(0.0) / (2 * kPi), 2)).epsilon(1e-14));
  const double out[2] = {0.1, 0.3};
  CHECK(eval_r(k, out) == 0.0);

  Rng rng(2, 0);
  for (int i = 0; i < 100; ++i) {
    const double s[2] = {0.5 * rng.uniform() - 0.25, 0.5 * rng.uniform() - 0.25};
    const double t[2] = {-s[0], -s[1]};
    CHECK(eval_r(k, s) == eval_r(k, t));
  }
}

TEST_CASE("interpolated transform against direct convolution") {
  // (K^2 / 2 pi) int b(u/a) b((xi-u)/a) / a^2 du with the undilated bump b
  const double eps = 0.25;
  const auto k = build_kernel(eps);
  const double a = k.dilation(), K = k.scale();
  auto bump = [&](double xi) {
    const double t = 2.0 * xi / eps;
    return std::abs(t) >= 1.0 ? 0.0 : std::exp(-1.0 / (1.0 - t * t));
  };
  auto direct = [&](double xi) {
    const double lo = std::max(-0.5 * a * eps, xi - 0.5 * a * eps), hi = std::min(0.5 * a * eps, xi + 0.5 * a * eps);
    if (!(hi > lo)) return 0.0;
    // smooth and compactly supported: composite Gauss-Legendre converges spectrally
    const auto f = [&](double u) { return bump(u / a) * bump((xi - u) / a); };
    const int panels = 400;
    double v = 0.0;
    for (int p = 0; p < panels; ++p)
      v += quad::integrate_gl(f, lo + (hi - lo) * p / panels, lo + (hi - lo) * (p + 1) / panels, 16);
    return K * K * v / (a * a * 2.0 * kPi);
  };
  Rng rng(4, 0);
  const double scale = k.gamma0_hat(0.0);
  for (int i = 0; i < 40; ++i) {
    const double xi = a * eps * rng.uniform();
    CHECK(std::abs(k.gamma0_hat(xi) - direct(xi)) <= 1e-8 * scale);
  }
}

TEST_CASE("smoothed indicator dominates the cube") {
  const auto k = build_kernel(0.25);
  for (int i = 0; i <= 2000; ++i) {
    const double z = -1.0 + 2.0 * i / 2000.0;
    CHECK(k.smoothed_indicator(z) >= 1.0);
  }
  for (double z : {-5.0, 3.0, 40.0}) CHECK(k.smoothed_indicator(z) > 0.0);
}

TEST_CASE("band limits outside the range are refused") {
  CHECK_THROWS(build_kernel(1.0));
  CHECK_THROWS(build_kernel(0.0));
}
