#include <doctest.h>

#include <cmath>
#include <limits>

#include "lld/common.hpp"
#include "lld/svf.hpp"

using namespace lld;

TEST_CASE("slowly varying family values") {
  CHECK(eval_ell(SlowlyVarying::constant(1.0), 1e3) == doctest::Approx(1.0));
  CHECK(eval_ell(SlowlyVarying::log_power(1.0, 1.0), 0.0) == doctest::Approx(1.0));
  const double x = std::exp(2.0) - std::exp(1.0);
  CHECK(eval_ell(SlowlyVarying::log_power(2.0, 1.0), x) == doctest::Approx(4.0).epsilon(1e-14));
}

TEST_CASE("slow variation on a geometric grid") {
  // l(2x)/l(x) -> 1 only logarithmically: check the closed form and the monotone approach
  for (double beta : {-1.0, 1.0, 2.0}) {
    const SlowlyVarying ell(1.0, beta);
    double prev = std::numeric_limits<double>::infinity();
    for (double x : {1e3, 1e6, 1e12, 1e24, 1e100}) {
      const double r = ell(2.0 * x) / ell(x);
      CHECK(r == doctest::Approx(std::pow(std::log(std::exp(1.0) + 2.0 * x) / std::log(std::exp(1.0) + x), beta)));
      const double gap = std::abs(r - 1.0);
      CHECK(gap < prev);
      prev = gap;
    }
    CHECK(prev < 0.01);
  }
}

TEST_CASE("corrected factor") {
  const SlowlyVarying one = SlowlyVarying::constant(1.0);
  CHECK(eval_ell_tilde(one, 0.5, 7.0) == doctest::Approx(1.0));
  CHECK(eval_ell_tilde(one, 2.0, 0.0) == doctest::Approx(1.0));
  CHECK(eval_ell_tilde(one, 2.0, std::exp(1.0) - 1.0) == doctest::Approx(2.0).epsilon(1e-12));
  // closed form 1 + log(1 + x) across the tabulation nodes
  const EllTilde lt(one, 2.0);
  for (double x : {0.1, 3.0, 50.0, 1e4, 1e9}) CHECK(lt(x) == doctest::Approx(1.0 + std::log1p(x)).epsilon(1e-12));
}

TEST_CASE("norming sequence") {
  const NormingSeq half(0.5, SlowlyVarying::constant(1.0));
  CHECK(half.a(4) == doctest::Approx(16.0).epsilon(1e-12));
  CHECK(std::abs(half.normalization_residual(1000) - 1.0) < 1e-10);

  const double a9 = solve_norming(2.0, [](double) { return 1.0; }, 9.0);
  CHECK(a9 == doctest::Approx(3.0).epsilon(1e-12));

  // root of a^2 = 100 (1 + log(1 + a)), independent high-precision value
  const NormingSeq two(2.0, SlowlyVarying::constant(1.0));
  CHECK(two.a(100) == doctest::Approx(20.12584726026107).epsilon(1e-10));

  SUBCASE("regular variation of a_n") {
    const NormingSeq s(1.5, SlowlyVarying::log_power(1.0, 1.0));
    // the log factor makes the ratio decrease towards 2^(1/alpha) from above
    const double target = std::pow(2.0, 1.0 / 1.5);
    double prev = std::numeric_limits<double>::infinity();
    for (long n = 1L << 10; n <= (1L << 19); n *= 2) {
      const double r = s.a(2 * n) / s.a(n);
      CHECK(r > target);
      CHECK(r < prev);
      prev = r;
    }
    CHECK(prev == doctest::Approx(target).epsilon(0.04));
  }
}

TEST_CASE("alpha one is rejected") {
  CHECK_THROWS_AS(NormingSeq(1.0, SlowlyVarying::constant(1.0)), DomainError);
  CHECK_THROWS_AS(require_supported_alpha(2.5), DomainError);
}

TEST_CASE("Karamata ratio") {
  const SlowlyVarying one = SlowlyVarying::constant(1.0);
  CHECK(karamata_check(one, 0.5, 100.0) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(karamata_check(one, 0.25, 16.0) == doctest::Approx(1.0).epsilon(1e-9));
  // log(e + x): convergence is only logarithmic; mpmath value at K = 1e6
  CHECK(karamata_check(SlowlyVarying::log_power(1.0, 1.0), 0.5, 1e6) == doctest::Approx(0.8556097203).epsilon(1e-6));
  CHECK_THROWS_AS(karamata_check(one, 1.5, 10.0), DomainError);
}

TEST_CASE("Potter constants") {
  CHECK(potter_check(SlowlyVarying::constant(1.0), 0.1).constant == doctest::Approx(1.0));
  const auto up = potter_check(SlowlyVarying::log_power(1.0, 1.0), 0.1);
  const auto down = potter_check(SlowlyVarying::log_power(1.0, -1.0), 0.1);
  CHECK(std::isfinite(up.constant));
  CHECK(up.constant >= 1.0);
  CHECK(std::isfinite(down.constant));
}
