#include <doctest.h>
#include <cstdlib>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <memory>

#include "lld/lld_verify.hpp"

using namespace lld;

TEST_CASE("envelope") {
  const NormingSeq norm(0.5, SlowlyVarying::constant(1.0));
  const Envelope env(norm, 1);
  const std::vector<double> ten{10.0}, zero{0.0};
  CHECK(env(1, ten) == doctest::Approx(1.0 / (1.0 + std::sqrt(10.0))).epsilon(1e-14));
  CHECK(env(64, zero) == doctest::Approx(64.0 / norm.a(64)).epsilon(1e-14));
  const std::vector<double> far{1e12}, farther{2e12};
  CHECK(env(4, far) / env(4, farther) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-5));

  const NormingSeq n2(0.75, SlowlyVarying::constant(1.0));
  const Envelope e2(n2, 2);
  const std::vector<double> o2{0.0, 0.0};
  CHECK(e2(16, o2) == doctest::Approx(16.0 / (n2.a(16) * n2.a(16))).epsilon(1e-14));
}

TEST_CASE("regimes") {
  const NormingSeq norm(1.5, SlowlyVarying::constant(1.0));
  const Envelope env(norm, 1);
  const double a = norm.a(256);
  const std::vector<double> zero{0.0}, at{a}, far{100.0 * a};
  CHECK(regime_tag(env, 256, zero) == Regime::local);
  CHECK(regime_tag(env, 256, at) == Regime::crossover);
  CHECK(regime_tag(env, 256, far) == Regime::large_deviation);
  CHECK(parse_regime(to_string(Regime::crossover)) == Regime::crossover);
}

TEST_CASE("grids") {
  CHECK(dyadic_ladder(4, 6) == std::vector<long>{16, 32, 64});
  const auto m = dyadic_multiples(-1, 1);
  CHECK(m == std::vector<double>{0.0, 0.5, 1.0, 2.0});
  const SweepGrid g{{4}, {{1.0}}, m};
  CHECK(grid_points(g, 10.0, true).size() == 7);
  CHECK(grid_points(g, 10.0, false).size() == 4);
}

TEST_CASE("log-log slope") {
  const std::vector<double> x{1, 2, 4, 8}, y{3, 6, 12, 24};
  CHECK(loglog_slope(x, y) == doctest::Approx(1.0));
}

namespace {

LLDRow row(long n, double x, double p, double lo, double hi, double bound, double env) {
  LLDRow r;
  r.n = n;
  r.x = {x};
  r.p_hat = p;
  r.ci_lo = lo;
  r.ci_hi = hi;
  r.fourier_bound = bound;
  r.envelope = env;
  r.ratio_mc = p / env;
  r.ratio_oracle = bound / env;
  return r;
}

}  // namespace

TEST_CASE("verdict logic") {
  LLDReport rep;
  for (long n : {16L, 32L, 64L, 128L}) rep.rows.push_back(row(n, 0.0, 0.01, 0.009, 0.011, 0.05, 0.02));
  finalize_report(rep);
  CHECK(rep.verdict == Verdict::pass);
  CHECK(rep.c_hat == doctest::Approx(2.5));
  CHECK(std::abs(rep.slope) < 1e-12);

  SUBCASE("a lower limit above the bound fails hard") {
    rep.rows.push_back(row(16, 5.0, 0.2, 0.15, 0.25, 0.1, 1.0));
    finalize_report(rep);
    CHECK(rep.oracle_violations == 1);
    CHECK(rep.verdict == Verdict::fail);
  }
  SUBCASE("zero at an unreachable centre is not a violation") {
    rep.rows.push_back(row(16, -5.0, 0.0, 0.0, 1e-6, -1e-19, 1.0));
    finalize_report(rep);
    CHECK(rep.oracle_violations == 0);
    CHECK(rep.verdict == Verdict::pass);
  }
  SUBCASE("growth in n fails the slope test") {
    for (auto& r : rep.rows) r.ratio_oracle *= static_cast<double>(r.n);
    finalize_report(rep);
    CHECK(rep.slope == doctest::Approx(1.0));
    CHECK(rep.verdict == Verdict::fail);
  }
  SUBCASE("wide intervals are inconclusive, not failures") {
    rep.rows.push_back(row(16, 9.0, 1e-7, 0.0, 1e-5, 1e-3, 1e-2));
    finalize_report(rep);
    CHECK(rep.rows.back().status == RowStatus::inconclusive);
    CHECK(rep.verdict == Verdict::pass);
  }
  SUBCASE("sampling upper limit above 1.5 C fails") {
    rep.rows.push_back(row(16, 2.0, 0.5, 0.45, 0.55, 0.6, 0.1));
    finalize_report(rep);
    CHECK(rep.c_hat == doctest::Approx(6.0));
    CHECK(rep.rows.back().status == RowStatus::pass);
    rep.rows.push_back(row(32, 2.0, 0.5, 0.45, 0.95, 0.6, 0.1));
    finalize_report(rep);
    CHECK(rep.rows.back().status == RowStatus::fail);
  }
  CHECK(exit_code(Verdict::pass) == 0);
  CHECK(exit_code(Verdict::fail) == 1);
  CHECK(exit_code(Verdict::inconclusive) == 2);
}

TEST_CASE("CSV round trip") {
  LLDReport rep;
  rep.rows.push_back(row(16, 0.1, 1.0 / 3.0, 0.3, 0.4, 0.7, 0.5));
  rep.rows.push_back(row(32, -1e300, 0.0, 0.0, 5.3e-7, 1e-320, 1e-10));
  finalize_report(rep);
  const Provenance prov{"0123456789abcdef", "0.1.0"};
  const std::string text = report_csv(rep, prov);
  CHECK(text.rfind("# lld 0.1.0 config=0123456789abcdef\n", 0) == 0);
  const LLDReport back = parse_report_csv(text);
  REQUIRE(back.rows.size() == 2);
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(back.rows[i].n == rep.rows[i].n);
    CHECK(back.rows[i].x == rep.rows[i].x);
    CHECK(back.rows[i].p_hat == rep.rows[i].p_hat);
    CHECK(back.rows[i].fourier_bound == rep.rows[i].fourier_bound);
    CHECK(back.rows[i].status == rep.rows[i].status);
  }
  CHECK(report_csv(back, prov) == text);
}

TEST_CASE("empty grid writes the header only") {
  LLDReport rep;
  finalize_report(rep);
  CHECK(rep.verdict == Verdict::inconclusive);
  const auto dir = std::filesystem::temp_directory_path() / "lld_unit_empty";
  std::filesystem::create_directories(dir);
  const auto path = (dir / "empty.csv").string();
  emit_report(rep, path, {"h", "v"});
  std::ifstream in(path);
  std::string first, second, third;
  std::getline(in, first);
  std::getline(in, second);
  CHECK(first == "# lld v config=h");
  CHECK(second.rfind("n,x_1,regime,", 0) == 0);
  CHECK_FALSE(static_cast<bool>(std::getline(in, third)));
  CHECK(std::filesystem::exists(path + ".summary.txt"));
}

TEST_CASE("shortest round-trip formatting") {
  for (double v : {0.1, 1.0 / 3.0, 1e-320, 123456789.0, -2.5e300}) CHECK(std::strtod(format_double(v).c_str(), nullptr) == v);
  CHECK(format_double(0.5) == "0.5");
}

TEST_CASE("a short Pareto sweep") {
  const auto law = std::make_shared<ScalarTailSpec>(0.5, 1.0, 0.0, SlowlyVarying::constant(1.0));
  const CharFnModel model(law);
  const NormingSeq norm(0.5, law->ell());
  const Envelope env(norm, 1);
  const auto kernel = build_kernel(kPi / 4);
  SweepOptions opt;
  opt.budget_scale = 0.02;
  opt.both_signs = false;
  const SweepGrid grid{{16, 32, 64}, {{1.0}}, dyadic_multiples(-2, 2)};
  const auto rep = sweep(*law, model, kernel, env, grid, opt);
  CHECK(rep.oracle_violations == 0);
  CHECK(rep.verdict == Verdict::pass);
  CHECK(std::isfinite(rep.c_hat));
}
