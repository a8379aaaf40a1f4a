#include <doctest.h>

#include <cmath>

#include "lld/common.hpp"
#include "lld/mc.hpp"

using namespace lld;

namespace {

const double kAnchor = 1.0 / 3.0 - 1.0 / std::sqrt(11.0);

ScalarTailSpec pareto() { return {0.5, 1.0, 0.0, SlowlyVarying::constant(1.0)}; }

}  // namespace

TEST_CASE("Clopper-Pearson") {
  const auto z = clopper_pearson(0, 1000000);
  CHECK(z.lo == 0.0);
  CHECK(z.hi * 1e6 == doctest::Approx(5.2983).epsilon(1e-3));  // -log(0.005)
  const auto mid = clopper_pearson(50, 100);
  CHECK(mid.lo < 0.5);
  CHECK(mid.hi > 0.5);
  CHECK(mid.hi - 0.5 == doctest::Approx(0.5 - mid.lo).epsilon(1e-12));
  CHECK(clopper_pearson(100, 100).hi == 1.0);
}

TEST_CASE("closed-form anchor at N = 1e7") {
  const auto law = pareto();
  const NormingSeq norm(0.5, law.ell());
  CubeQuery q;
  q.n = 1;
  q.x = {10.0};
  q.h = 1.0;
  q.N = 10000000;
  q.seed = 42;
  const auto e = estimate_iid(law, norm, q);
  CHECK(e.ci_lo <= kAnchor);
  CHECK(kAnchor <= e.ci_hi);
  CHECK(e.p_hat == doctest::Approx(kAnchor).epsilon(0.01));
}

TEST_CASE("unreachable centre has zero hits") {
  const auto law = pareto();
  const NormingSeq norm(0.5, law.ell());
  CubeQuery q;
  q.n = 1;
  q.x = {-5.0};
  q.N = 100000;
  const auto e = estimate_iid(law, norm, q);
  CHECK(e.hits == 0);
  CHECK(e.p_hat == 0.0);
  CHECK(e.ci_hi * static_cast<double>(q.N) == doctest::Approx(5.3).epsilon(0.01));

  const auto c = estimate_conditional_batch(law, 4, {{-100.0}}, 1.0, 10000, 1);
  CHECK(c[0].p_hat == 0.0);
  CHECK(c[0].ci_hi == doctest::Approx(clopper_pearson(0, 10000).hi));
}

TEST_CASE("symmetric law gives symmetric estimates") {
  const ScalarTailSpec sym(1.5, 0.5, 0.5, SlowlyVarying::constant(1.0));
  const auto e = estimate_iid_batch(sym, 16, {{7.0}, {-7.0}}, 1.0, 400000, 3);
  CHECK(e[0].ci_lo <= e[1].ci_hi);
  CHECK(e[1].ci_lo <= e[0].ci_hi);
}

TEST_CASE("conditional and plain estimators agree") {
  const ScalarTailSpec sym(0.75, 0.5, 0.5, SlowlyVarying::constant(1.0));
  const std::vector<std::vector<double>> xs{{0.0}, {20.0}, {-150.0}};
  const auto plain = estimate_iid_batch(sym, 8, xs, 1.0, 1000000, 5);
  const auto cond = estimate_conditional_batch(sym, 8, xs, 1.0, 200000, 6);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    CHECK(plain[i].ci_lo <= cond[i].ci_hi);
    CHECK(cond[i].ci_lo <= plain[i].ci_hi);
    CHECK(cond[i].ci_hi - cond[i].ci_lo < plain[i].ci_hi - plain[i].ci_lo);
  }
}

TEST_CASE("independent of the thread count") {
  const ScalarTailSpec sym(1.5, 0.5, 0.5, SlowlyVarying::constant(1.0));
  const std::vector<std::vector<double>> xs{{0.0}, {12.0}};
  set_max_threads(1);
  const auto a = estimate_conditional_batch(sym, 32, xs, 1.0, 50000, 9);
  const auto pa = estimate_iid_batch(sym, 32, xs, 1.0, 50000, 9);
  set_max_threads(4);
  const auto b = estimate_conditional_batch(sym, 32, xs, 1.0, 50000, 9);
  const auto pb = estimate_iid_batch(sym, 32, xs, 1.0, 50000, 9);
  set_max_threads(0);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    CHECK(a[i].p_hat == b[i].p_hat);
    CHECK(a[i].ci_hi == b[i].ci_hi);
    CHECK(pa[i].hits == pb[i].hits);
    CHECK(pa[i].stream_hits == pb[i].stream_hits);
  }
}

TEST_CASE("interval calibration") {
  // 200 repetitions of the anchor query at N = 2e4
  const auto law = pareto();
  const NormingSeq norm(0.5, law.ell());
  int covered = 0;
  for (std::uint64_t rep = 0; rep < 200; ++rep) {
    CubeQuery q;
    q.n = 1;
    q.x = {10.0};
    q.N = 20000;
    q.seed = 1000 + rep;
    const auto e = estimate_iid(law, norm, q);
    if (e.ci_lo <= kAnchor && kAnchor <= e.ci_hi) ++covered;
  }
  CHECK(covered >= 192);
}

TEST_CASE("lattice estimators") {
  const LatticeSpec lat(1.5, 0.5, 0.5, 1);
  const NormingSeq norm(1.5, lat.ell());
  const auto one = estimate_lattice(lat, norm, 1, 2, 1000000, 3);
  CHECK(one.ci_lo <= lat.pmf(2));
  CHECK(lat.pmf(2) <= one.ci_hi);

  const LatticeSpec even(1.5, 0.5, 0.5, 2);
  const auto odd = estimate_lattice_conditional(even, 8, {1, 3, -5}, 20000, 4);
  for (const auto& e : odd) CHECK(e.p_hat == 0.0);
  const auto zero = estimate_lattice_conditional(lat, 8, {0}, 20000, 4);
  CHECK(zero[0].p_hat > 0.0);
}

TEST_CASE("origin probability scales like 1/a_n") {
  const LatticeSpec lat(1.5, 0.5, 0.5, 1);
  const NormingSeq norm(1.5, lat.ell());
  std::vector<double> scaled;
  for (long n : {16L, 64L, 256L}) scaled.push_back(estimate_lattice_conditional(lat, n, {0}, 40000, 8)[0].p_hat * norm.a(n));
  for (double v : scaled) CHECK(v == doctest::Approx(scaled.front()).epsilon(0.1));
}

TEST_CASE("big-jump stratification") {
  // Per-draw variance falls by at most about 1 / P(big jump): ~6.8 for alpha = 0.5, ~64 for alpha = 1.5 here.
  for (double alpha : {0.5, 1.5}) {
    CAPTURE(alpha);
    const ScalarTailSpec s(alpha, 0.5, 0.5, SlowlyVarying::constant(1.0));
    const NormingSeq norm(alpha, s.ell());
    const long n = 16;
    const double x = 20.0 * norm.a(n);
    const double tau = s.p() * s.tail(x / 2.0);
    const double pb = big_jump_probability(s, n, x);
    CHECK(pb == doctest::Approx(1.0 - std::pow(1.0 - tau, n)).epsilon(1e-12));

    CubeQuery q;
    q.n = n;
    q.x = {x};
    q.h = 1.0;
    q.N = 200000;
    q.seed = 17;
    const auto strat = tail_stratified_estimate(s, norm, q);
    q.N = 4000000;
    const auto plain = estimate_iid(s, norm, q);
    CHECK(strat.ci_lo <= plain.ci_hi);
    CHECK(plain.ci_lo <= strat.ci_hi);
    const double vs = strat.variance * 200000.0, vp = plain.p_hat * (1.0 - plain.p_hat);
    CHECK(vp / vs > 0.5 / pb);
    if (alpha > 1.0) CHECK(vp / vs > 10.0);
  }
}

TEST_CASE("budgets and shares") {
  CHECK(default_budget(1) == 40000000u);
  CHECK(default_budget(100000) == 10000u);
  std::uint64_t total = 0;
  for (int k = 0; k < kSubstreams; ++k) total += substream_share(1001, k);
  CHECK(total == 1001u);
  CHECK(seed_for_n(1, 16) != seed_for_n(1, 32));
}
