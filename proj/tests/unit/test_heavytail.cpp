#include <doctest.h>

#include <cmath>

#include "lld/heavytail.hpp"
#include "lld/mc.hpp"

using namespace lld;

TEST_CASE("scalar quantile") {
  const ScalarTailSpec pareto(0.5, 1.0, 0.0, SlowlyVarying::constant(1.0));
  // all mass in the tail: tail mass 0.25 sits at x = 16
  CHECK(pareto.body_mass() == doctest::Approx(0.0));
  CHECK(pareto.quantile(0.75) == doctest::Approx(16.0).epsilon(1e-12));
  CHECK(sample_scalar(pareto, 0.75) == doctest::Approx(16.0).epsilon(1e-12));

  const ScalarTailSpec sym(1.5, 0.25, 0.25, SlowlyVarying::constant(1.0));
  CHECK(sym.quantile(0.5) == doctest::Approx(0.0));
  for (double u : {0.01, 0.2, 0.6, 0.99}) CHECK(sym.cdf(sym.quantile(u)) == doctest::Approx(u).epsilon(1e-12));
}

TEST_CASE("centring") {
  const ScalarTailSpec half(0.5, 0.5, 0.5, SlowlyVarying::constant(1.0));
  CHECK(compute_b_n(half, 17)[0] == 0.0);
  const ScalarTailSpec sym(1.5, 0.5, 0.5, SlowlyVarying::constant(1.0));
  CHECK(compute_b_n(sym, 10)[0] == doctest::Approx(0.0));
  // one-sided Pareto 1.5: E X = alpha / (alpha - 1) = 3
  const ScalarTailSpec one(1.5, 1.0, 0.0, SlowlyVarying::constant(1.0));
  CHECK(compute_b_n(one, 10)[0] == doctest::Approx(30.0).epsilon(1e-9));
  // with a body: p = 0.3, uniform body symmetric, mean = 0.3 * 3
  const ScalarTailSpec part(1.5, 0.3, 0.0, SlowlyVarying::constant(1.0));
  CHECK(part.mean()[0] == doctest::Approx(0.9).epsilon(1e-9));
}

TEST_CASE("alpha one is rejected by every law") {
  CHECK_THROWS_AS(ScalarTailSpec(1.0, 0.5, 0.5, SlowlyVarying::constant(1.0)), DomainError);
  CHECK_THROWS_AS(LatticeSpec(1.0, 0.5, 0.5), DomainError);
}

TEST_CASE("multivariate directions") {
  // every draw lies on the ray of its atom
  const MultiTailSpec quarter(0.75, SpectralMeasure({{{1.0, 0.0}, 0.5}, {{0.0, 1.0}, 0.5}}),
                              SlowlyVarying::constant(1.0));
  Rng rng(3, 0);
  std::vector<double> x(2);
  for (int i = 0; i < 1000; ++i) {
    quarter.sample(rng, x);
    CHECK(((x[1] == 0.0 && x[0] > 0.0) || (x[0] == 0.0 && x[1] > 0.0)));
  }

  const MultiTailSpec cross(0.75,
                            SpectralMeasure({{{1.0, 0.0}, 0.25}, {{-1.0, 0.0}, 0.25}, {{0.0, 1.0}, 0.25}, {{0.0, -1.0}, 0.25}}),
                            SlowlyVarying::constant(1.0));
  const std::uint64_t N = 1000000;
  std::uint64_t plus = 0, horizontal = 0;
  for (std::uint64_t i = 0; i < N; ++i) {
    cross.sample(rng, x);
    if (x[1] != 0.0) continue;
    ++horizontal;
    if (x[0] > 0.0) ++plus;
  }
  const double h = static_cast<double>(horizontal);
  CHECK(std::abs(h / N - 0.5) < 3.0 * 0.5 / std::sqrt(static_cast<double>(N)));
  CHECK(std::abs(static_cast<double>(plus) / h - 0.5) < 3.0 * 0.5 / std::sqrt(h));
}

TEST_CASE("empirical tail ratio") {
  const ScalarTailSpec s(0.75, 1.0, 0.0, SlowlyVarying::constant(1.0));
  Rng rng(11, 0);
  std::uint64_t over_t = 0, over_2t = 0;
  const double t = 1e3;
  for (int i = 0; i < 4000000; ++i) {
    const double x = sample_scalar(s, rng.uniform());
    if (x > t) ++over_t;
    if (x > 2 * t) ++over_2t;
  }
  CHECK(static_cast<double>(over_2t) / static_cast<double>(over_t) == doctest::Approx(std::pow(2.0, -0.75)).epsilon(0.05));
}

TEST_CASE("nondegeneracy") {
  const SpectralMeasure line({{{1.0, 0.0}, 0.5}, {{-1.0, 0.0}, 0.5}});
  const auto deg = nondegeneracy_check(line, 0.5);
  CHECK(deg.degenerate());
  CHECK(std::abs(deg.witness[0]) < 1e-6);
  CHECK_THROWS_AS(MultiTailSpec(0.5, line, SlowlyVarying::constant(1.0)), DomainError);

  // four axis atoms of weight 1/4: the minimum sits on the axes, where one
  // pair contributes 2 * (1/4) * 1 = 1/2; the diagonal gives 4 * (1/4) * 2^(-3/4)
  const SpectralMeasure cross({{{1.0, 0.0}, 0.25}, {{0.0, 1.0}, 0.25}, {{-1.0, 0.0}, 0.25}, {{0.0, -1.0}, 0.25}});
  const auto nd = nondegeneracy_check(cross, 1.5);
  CHECK(nd.minimum == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(cross.moment(std::vector<double>{std::sqrt(0.5), std::sqrt(0.5)}, 1.5) ==
        doctest::Approx(std::pow(2.0, -0.75)).epsilon(1e-12));

  CHECK(nondegeneracy_check(SpectralMeasure({{{1.0}, 1.0}}), 0.5).minimum == doctest::Approx(1.0));
}

TEST_CASE("lattice law") {
  const LatticeSpec lat(1.5, 0.5, 0.5, 1);
  double total = lat.pmf(0);
  for (long k = 1; k <= 100000; ++k) total += lat.pmf(k) + lat.pmf(-k);
  CHECK(total == doctest::Approx(1.0).epsilon(1e-6));
  for (long N : {100L, 10000L, 1000000L}) CHECK(lat.upper_tail(N) * std::pow(N, 1.5) == doctest::Approx(0.5).epsilon(1e-9));

  const LatticeSpec even(1.5, 0.5, 0.5, 2);
  CHECK(even.pmf(3) == 0.0);
  CHECK(even.interval_probability(2.5, 3.5) == 0.0);
  Rng rng(5, 0);
  std::vector<double> x(1);
  for (int i = 0; i < 1000; ++i) {
    even.sample(rng, x);
    CHECK(std::fmod(x[0], 2.0) == 0.0);
  }
}

TEST_CASE("cube probabilities") {
  const ScalarTailSpec pareto(0.5, 1.0, 0.0, SlowlyVarying::constant(1.0));
  const std::vector<double> c{10.0};
  CHECK(pareto.cube_probability(c, 1.0) == doctest::Approx(1.0 / 3.0 - 1.0 / std::sqrt(11.0)).epsilon(1e-12));
  const MixedSpec mix(LatticeSpec(1.5, 0.5, 0.5, 1), 0.5);
  // jitter mass spreads each atom over (k - 1/2, k + 1/2): the unit cube around an integer catches it all
  const std::vector<double> zero{0.0};
  CHECK(mix.cube_probability(zero, 0.5) == doctest::Approx(LatticeSpec(1.5, 0.5, 0.5, 1).pmf(0)).epsilon(1e-9));
}
