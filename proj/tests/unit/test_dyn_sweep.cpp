#include <doctest.h>

#include <cmath>

#include "lld/dyn_sweep.hpp"
#include "lld/smoothing.hpp"

using namespace lld;

namespace {

TransferModel gauss_model(double alpha, int m) {
  TransferOptions opt;
  opt.m = m;
  opt.gauss_exact_branches = 32;
  return TransferModel(IntervalMap::gauss(), Observable::power(alpha), opt);
}

}  // namespace

TEST_CASE("tail constants") {
  CHECK(tail_constant(IntervalMap::gauss()) == doctest::Approx(1.0 / std::log(2.0)));
  CHECK(tail_constant(IntervalMap::doubling()) == doctest::Approx(1.0));
  CHECK(std::isinf(invariant_mean(IntervalMap::gauss(), Observable::power(0.5))));
}

TEST_CASE("n = 1 matches the invariant measure of the pullback") {
  // v = z^-2 in (9, 11]  <=>  z in [11^-1/2, 1/3); mu = log2(1 + z) differences
  const auto model = gauss_model(0.5, 256);
  BirkhoffOptions opt;
  opt.budget_scale = 0.05;
  opt.seed = 3;
  for (Estimator est : {Estimator::conditional, Estimator::plain}) {
    opt.estimator = est;
    const auto e = birkhoff_estimates(model, {1}, {{{10.0}, {-10.0}}}, opt);
    const double truth = 0.034849612281536017;
    CHECK(e[0][0].ci_lo <= truth);
    CHECK(truth <= e[0][0].ci_hi);
    CHECK(e[0][1].p_hat == 0.0);
  }
}

TEST_CASE("estimators agree at moderate n") {
  const auto model = gauss_model(0.5, 256);
  BirkhoffOptions opt;
  opt.budget_scale = 0.1;
  const std::vector<std::vector<std::vector<double>>> xs{{{64.0}, {300.0}}};
  opt.estimator = Estimator::conditional;
  const auto c = birkhoff_estimates(model, {8}, xs, opt);
  opt.estimator = Estimator::plain;
  const auto p = birkhoff_estimates(model, {8}, xs, opt);
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(c[0][i].ci_lo <= p[0][i].ci_hi);
    CHECK(p[0][i].ci_lo <= c[0][i].ci_hi);
  }
}

TEST_CASE("operator bound dominates the estimates") {
  const auto model = gauss_model(0.5, 256);
  const auto kernel = build_kernel(0.25);
  const std::vector<long> ns{1, 4, 16};
  const OperatorBound bound(model, kernel, ns);
  std::vector<std::vector<std::vector<double>>> xs;
  for (long n : ns) xs.push_back({{0.0}, {static_cast<double>(n * n)}, {4.0 * n * n}});
  BirkhoffOptions opt;
  opt.budget_scale = 0.05;
  const auto est = birkhoff_estimates(model, ns, xs, opt);
  for (std::size_t r = 0; r < ns.size(); ++r)
    for (std::size_t q = 0; q < xs[r].size(); ++q) CHECK(est[r][q].ci_lo <= bound.evaluate(ns[r], xs[r][q][0]));
}

TEST_CASE("independent of the thread count") {
  const auto model = gauss_model(0.5, 64);
  BirkhoffOptions opt;
  opt.budget_scale = 0.01;
  const std::vector<std::vector<std::vector<double>>> xs{{{0.0}, {50.0}}};
  set_max_threads(1);
  const auto a = birkhoff_estimates(model, {16}, xs, opt);
  set_max_threads(3);
  const auto b = birkhoff_estimates(model, {16}, xs, opt);
  set_max_threads(0);
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(a[0][i].p_hat == b[0][i].p_hat);
    CHECK(a[0][i].ci_hi == b[0][i].ci_hi);
  }
}

TEST_CASE("a short Gauss sweep passes") {
  const auto model = gauss_model(0.5, 128);
  const auto kernel = build_kernel(0.25);
  const NormingSeq norm(0.5, SlowlyVarying::constant(tail_constant(model.map())));
  const Envelope env(norm, 1);
  SweepGrid grid{{16, 32, 64, 128}, {{1.0}}, dyadic_multiples(-2, 2)};
  BirkhoffOptions opt;
  opt.budget_scale = 0.05;
  opt.both_signs = false;
  const auto rep = birkhoff_lld_sweep(model, kernel, env, grid, opt);
  CHECK(rep.oracle_violations == 0);
  CHECK(rep.verdict == Verdict::pass);
}
