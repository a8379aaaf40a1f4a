#include <doctest.h>

#include <cmath>
#include <memory>

#include "lld/fourier_oracle.hpp"

using namespace lld;

namespace {

const double kAnchor = 1.0 / 3.0 - 1.0 / std::sqrt(11.0);  // P(X in (9, 11]) for the unit Pareto law of index 1/2

CharFnModel pareto_model() {
  return CharFnModel(std::make_shared<ScalarTailSpec>(0.5, 1.0, 0.0, SlowlyVarying::constant(1.0)));
}

}  // namespace

TEST_CASE("closed-form anchor is majorised") {
  const auto model = pareto_model();
  const auto kernel = build_kernel(kPi / 4);
  const std::vector<double> x{10.0};
  const double b = fourier_bound(model, kernel, 1, x);
  CHECK(b >= kAnchor);
  CHECK(bound_vs_mc(b, kAnchor).pass);
  CHECK(bound_vs_mc(b, kAnchor).margin > 0.0);
}

TEST_CASE("bound dominates exact cube probabilities at n = 1") {
  const auto law = std::make_shared<ScalarTailSpec>(1.5, 0.25, 0.25, SlowlyVarying::constant(1.0));
  const CharFnModel model(law);
  const auto kernel = build_kernel(0.5);
  for (double c : {0.0, 0.5, 2.0, -3.0, 10.0, -40.0}) {
    const std::vector<double> x{c};
    CHECK(fourier_bound(model, kernel, 1, x) >= law->cube_probability(x, 1.0));
  }
}

TEST_CASE("decay in |x| at fixed n") {
  const auto model = pareto_model();
  const auto kernel = build_kernel(kPi / 4);
  FourierOracle oracle(model, kernel, 4, {0.0}, 1e5);
  double prev = 1e300;
  int drops = 0, steps = 0;
  for (double x = 100.0; x <= 1e5; x *= 4.0, ++steps) {
    const std::vector<double> c{x};
    const double v = oracle.evaluate(c).re;
    if (v < prev) ++drops;
    prev = v;
  }
  CHECK(drops == steps);
  CHECK(prev < 1e-3);
}

TEST_CASE("refinement changes nothing") {
  const auto model = pareto_model();
  const auto kernel = build_kernel(0.25);
  OracleOptions fine;
  fine.node_scale = 2.0;
  for (double c : {0.0, 300.0, 5000.0}) {
    const std::vector<double> x{c};
    const double a = fourier_bound(model, kernel, 64, x);
    const double b = fourier_bound(model, kernel, 64, x, fine);
    CHECK(std::abs(a - b) <= 1e-9 * std::max(1.0, std::abs(a)) + 1e-14);
  }
}

TEST_CASE("two dimensions") {
  const auto law = std::make_shared<MultiTailSpec>(
      0.75, SpectralMeasure({{{1.0, 0.0}, 0.25}, {{0.0, 1.0}, 0.25}, {{-1.0, 0.0}, 0.25}, {{0.0, -1.0}, 0.25}}),
      SlowlyVarying::constant(1.0));
  const CharFnModel model(law);
  const auto kernel = build_kernel(0.25);
  const std::vector<double> x{0.0, 0.0}, y{3.0, 0.0};
  const double b0 = fourier_bound(model, kernel, 1, x);
  CHECK(b0 >= law->cube_probability(x, 1.0));
  CHECK(fourier_bound(model, kernel, 1, y) >= law->cube_probability(y, 1.0));
  // symmetric measure: the bound is even
  const std::vector<double> my{-3.0, 0.0};
  CHECK(fourier_bound(model, kernel, 16, y) == doctest::Approx(fourier_bound(model, kernel, 16, my)).epsilon(1e-9));
}

TEST_CASE("verdict") {
  CHECK(bound_vs_mc(0.1, 0.05).pass);
  CHECK_FALSE(bound_vs_mc(0.1, 0.2).pass);
  CHECK(bound_vs_mc(-1e-19, 0.0).pass);  // roundoff at an unreachable centre
}
