#include "lld/quadrature.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <sstream>

#include "lld/common.hpp"
#include "lld/rng.hpp"

namespace lld {

namespace {
std::atomic<unsigned> g_max_threads{0};
}

void require_supported_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha <= 2.0) || !std::isfinite(alpha))
    throw DomainError("alpha must lie in (0,1) or (1,2], got " + std::to_string(alpha));
  if (alpha == 1.0)
    throw DomainError(
        "alpha = 1 is excluded: the centering and characteristic-function decay "
        "estimates used here do not hold in the nonsymmetric alpha = 1 case");
}

void set_max_threads(unsigned n) { g_max_threads = n; }

unsigned max_threads() {
  unsigned n = g_max_threads.load();
  if (n == 0) n = std::max(1u, std::thread::hardware_concurrency());
  return n;
}

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

Rng::Rng(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t st = seed;
  std::uint64_t mix = splitmix64(st) ^ (stream * 0xd1342543de82ef95ULL + 0x2545f4914f6cdd1dULL);
  for (auto& w : s_) w = splitmix64(mix);
}

std::uint64_t Rng::next_u64() {
  const auto rotl = [](std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); };
  const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

}  // namespace lld

namespace lld::quad {

namespace {

GaussRule build_rule(int n) {
  GaussRule r;
  r.nodes.resize(n);
  r.weights.resize(n);
  const int m = (n + 1) / 2;
  for (int i = 0; i < m; ++i) {
    // Tricomi initial guess, refined by Newton on P_n.
    double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    r.nodes[i] = -x;
    r.nodes[n - 1 - i] = x;
    r.weights[i] = w;
    r.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) r.nodes[n / 2] = 0.0;
  return r;
}

}  // namespace

const GaussRule& gauss_legendre(int n) {
  if (n < 1) throw DomainError("Gauss-Legendre order must be positive");
  static std::mutex mu;
  static std::map<int, std::unique_ptr<GaussRule>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto& slot = cache[n];
  if (!slot) {
    if (n == 1)
      slot = std::make_unique<GaussRule>(GaussRule{{0.0}, {2.0}});
    else
      slot = std::make_unique<GaussRule>(build_rule(n));
  }
  return *slot;
}

double adaptive(const std::function<double(double)>& f, double a, double b,
                double rel_tol, double abs_floor) {
  double err = 0.0;
  const double val = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
      f, a, b, 15, rel_tol, &err);  // depth 15: a bounded number of evaluations
  if (!(err <= std::max(rel_tol * std::abs(val), abs_floor) * 10.0) || !std::isfinite(val)) {
    std::ostringstream os;
    os << "adaptive quadrature did not converge on [" << a << ", " << b
       << "]: value " << val << ", error estimate " << err;
    throw NumericalError(os.str());
  }
  return val;
}

double adaptive_to_infinity(const std::function<double(double)>& f, double a,
                            double rel_tol) {
  // x = a + t/(1-t) maps [0,1) onto [a, inf).
  auto g = [&](double t) {
    if (t >= 1.0) return 0.0;
    const double one_m = 1.0 - t;
    return f(a + t / one_m) / (one_m * one_m);
  };
  return adaptive(g, 0.0, 1.0, rel_tol);
}

}  // namespace lld::quad
