#include <doctest.h>

#include <cmath>

#include "lld/interval_map.hpp"
#include "lld/quadrature.hpp"

using namespace lld;

TEST_CASE("iterates") {
  const auto g = IntervalMap::gauss();
  CHECK(g.apply(0.7) == doctest::Approx(1.0 / 0.7 - 1.0).epsilon(1e-15));
  const double golden = (std::sqrt(5.0) - 1.0) / 2.0;
  CHECK(g.apply(golden) == doctest::Approx(golden).epsilon(1e-14));

  const auto d = IntervalMap::doubling();
  const auto o = orbit(d, 1.0 / 3.0, 5);
  CHECK(o[1] == doctest::Approx(2.0 / 3.0));
  // 1/3 is not a double, so the period-2 orbit is only approximate
  CHECK(o[2] == doctest::Approx(o[0]).epsilon(1e-14));
  CHECK(o[4] == doctest::Approx(o[0]).epsilon(1e-13));

  const auto a = IntervalMap::afu();
  CHECK(a.apply(0.3) == doctest::Approx(0.75));
  CHECK(a.apply(0.9) == doctest::Approx(0.25));
}

TEST_CASE("landing on zero is perturbed and counted") {
  long moved = 0;
  const auto o = orbit(IntervalMap::gauss(), 0.5, 4, &moved);
  CHECK(moved >= 1);
  for (double z : o) CHECK(z > 0.0);
}

TEST_CASE("invariant densities") {
  const auto g = IntervalMap::gauss();
  for (double z : {0.0, 0.3, 1.0}) CHECK(g.invariant_density(z) == doctest::Approx(1.0 / ((1.0 + z) * std::log(2.0))));
  for (const auto& map : {IntervalMap::gauss(), IntervalMap::doubling(), IntervalMap::afu()}) {
    CHECK(map.invariant_cdf(0.0) == doctest::Approx(0.0));
    CHECK(map.invariant_cdf(1.0) == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("densities are fixed by the transfer operator") {
  for (const auto& map : {IntervalMap::doubling(), IntervalMap::afu()}) {
    for (double y : {0.05, 0.3, 0.45, 0.55, 0.7, 0.95}) {
      double total = 0.0;
      for (const auto& pre : map.preimages(y)) total += pre.weight;
      CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
      double pushed = 0.0;
      for (double z : {y / map.slope(), (y + 1.0) / map.slope(), (y + 2.0) / map.slope()})
        if (z < 1.0 && std::abs(map.apply(z) - y) < 1e-12) pushed += map.invariant_density(z) / map.slope();
      CHECK(pushed == doctest::Approx(map.invariant_density(y)).epsilon(1e-12));
    }
  }
  // Gauss: sum over branches of h(1/(k+y)) / (k+y)^2
  const auto g = IntervalMap::gauss();
  for (double y : {0.1, 0.5, 0.9}) {
    double pushed = 0.0;
    for (long k = 1; k <= 2000000; ++k) pushed += g.invariant_density(1.0 / (k + y)) / ((k + y) * (k + y));
    CHECK(pushed == doctest::Approx(g.invariant_density(y)).epsilon(1e-6));
  }
}

TEST_CASE("AFU structure") {
  const auto a = IntervalMap::afu();
  CHECK(a.branches().size() == 3);
  CHECK(a.image_set().size() == 2);
  CHECK(a.expansion() == doctest::Approx(2.5));
  CHECK(a.adler() == doctest::Approx(0.0));
  CHECK(IntervalMap::gauss().expansion_second_iterate() > 1.0);
  CHECK_THROWS(IntervalMap::by_name("tent"));
}
