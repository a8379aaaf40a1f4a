#include "lld/mc.hpp"

#include <algorithm>
#include <boost/math/special_functions/beta.hpp>
#include <chrono>
#include <cmath>
#include <fstream>

#include "lld/common.hpp"
#include "lld/rng.hpp"

namespace lld {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

constexpr double kNormal99 = 2.5758293035489004;  // two-sided 99% normal quantile

bool in_cube(std::span<const double> y, std::span<const double> c, double h) {
  for (std::size_t j = 0; j < y.size(); ++j)
    if (!(c[j] - h < y[j] && y[j] <= c[j] + h)) return false;
  return true;
}

// Sum of k draws of the law into acc (acc is zeroed first).
void draw_sum(const Law& law, Rng& rng, long k, std::span<double> acc, std::span<double> tmp) {
  std::fill(acc.begin(), acc.end(), 0.0);
  for (long i = 0; i < k; ++i) {
    law.sample(rng, tmp);
    for (std::size_t j = 0; j < acc.size(); ++j) acc[j] += tmp[j];
  }
}

MCEstimate from_moments(double sum, double sum_sq, std::uint64_t N) {
  MCEstimate e;
  e.method = "conditional";
  e.N = N;
  const double n = static_cast<double>(N);
  e.p_hat = std::clamp(sum / n, 0.0, 1.0);
  const double var = std::max(0.0, sum_sq / n - e.p_hat * e.p_hat) * n / std::max(1.0, n - 1.0);
  e.variance = var / n;
  const double half = kNormal99 * std::sqrt(e.variance);
  e.ci_lo = std::max(0.0, e.p_hat - half);
  e.ci_hi = std::min(1.0, e.p_hat + half);
  // every term zero carries no more information than zero hits
  if (sum == 0.0) e.ci_hi = clopper_pearson(0, N).hi;
  return e;
}

void check_budget(std::uint64_t N) {
  if (N < 10000) throw DomainError("Monte Carlo budget must be at least 1e4");
}

}  // namespace

std::uint64_t seed_for_n(std::uint64_t seed, long n) {
  std::uint64_t st = seed ^ (0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(n));
  return splitmix64(st);
}

Interval clopper_pearson(std::uint64_t hits, std::uint64_t N, double level) {
  if (N == 0) return {0.0, 1.0};
  const double a = 0.5 * (1.0 - level);
  const double k = static_cast<double>(hits);
  const double n = static_cast<double>(N);
  Interval ci;
  ci.lo = hits == 0 ? 0.0 : boost::math::ibeta_inv(k, n - k + 1.0, a);
  ci.hi = hits == N ? 1.0 : boost::math::ibeta_inv(k + 1.0, n - k, 1.0 - a);
  return ci;
}

MCEstimate estimate_from_tallies(std::span<const std::uint64_t> stream_hits, std::uint64_t N) {
  MCEstimate e;
  e.N = N;
  for (auto h : stream_hits) e.hits += h;
  e.stream_hits.assign(stream_hits.begin(), stream_hits.end());
  e.p_hat = N ? static_cast<double>(e.hits) / static_cast<double>(N) : 0.0;
  e.variance = N ? e.p_hat * (1.0 - e.p_hat) / static_cast<double>(N) : 0.0;
  const auto ci = clopper_pearson(e.hits, N);
  e.ci_lo = ci.lo;
  e.ci_hi = ci.hi;
  return e;
}

std::uint64_t default_budget(long n, double scale) {
  const double base = std::max(1e4, 4e7 / static_cast<double>(std::max(1L, n)));
  return static_cast<std::uint64_t>(std::max(1e4, std::round(base * scale)));
}

std::uint64_t substream_share(std::uint64_t N, int k) {
  const std::uint64_t K = kSubstreams;
  return N / K + (static_cast<std::uint64_t>(k) < N % K ? 1 : 0);
}

std::vector<MCEstimate> estimate_iid_batch(const Law& law, long n, const std::vector<std::vector<double>>& xs,
                                           double h, std::uint64_t N, std::uint64_t seed) {
  check_budget(N);
  if (!(h > 0.0)) throw DomainError("cube half-width must be positive");
  const auto t0 = Clock::now();
  const int d = law.dim();
  const auto b = compute_b_n(law, n);
  const std::size_t m = xs.size();
  std::vector<std::uint64_t> tallies(kSubstreams * m, 0);
  parallel_for(kSubstreams, [&](std::size_t k) {
    Rng rng(seed, k);
    std::vector<double> acc(d), tmp(d);
    const auto draws = substream_share(N, static_cast<int>(k));
    for (std::uint64_t i = 0; i < draws; ++i) {
      draw_sum(law, rng, n, acc, tmp);
      for (int j = 0; j < d; ++j) acc[j] -= b[j];
      for (std::size_t q = 0; q < m; ++q)
        if (in_cube(acc, xs[q], h)) ++tallies[k * m + q];
    }
  });
  std::vector<MCEstimate> out;
  const double wall = seconds_since(t0);
  for (std::size_t q = 0; q < m; ++q) {
    std::vector<std::uint64_t> per(kSubstreams);
    for (int k = 0; k < kSubstreams; ++k) per[k] = tallies[k * m + q];
    out.push_back(estimate_from_tallies(per, N));
    out.back().wall_seconds = wall;
  }
  return out;
}

MCEstimate estimate_iid(const Law& law, const NormingSeq&, const CubeQuery& q) {
  if (static_cast<int>(q.x.size()) != law.dim()) throw DomainError("query dimension mismatch");
  return estimate_iid_batch(law, q.n, {q.x}, q.h, q.N, q.seed).front();
}

std::vector<MCEstimate> estimate_conditional_batch(const Law& law, long n,
                                                   const std::vector<std::vector<double>>& xs, double h,
                                                   std::uint64_t N, std::uint64_t seed, double beyond) {
  check_budget(N);
  if (!(h > 0.0)) throw DomainError("cube half-width must be positive");
  const auto t0 = Clock::now();
  const int d = law.dim();
  const auto b = compute_b_n(law, n);
  const std::size_t m = xs.size();
  std::vector<char> by_max(m, 0);
  if (law.atomless() && n >= 2)
    for (std::size_t q = 0; q < m; ++q) {
      double r2 = 0.0;
      for (double v : xs[q]) r2 += v * v;
      by_max[q] = std::sqrt(r2) > beyond;
    }
  const double weight = static_cast<double>(n);
  std::vector<double> sums(kSubstreams * m, 0.0), squares(kSubstreams * m, 0.0);
  parallel_for(kSubstreams, [&](std::size_t k) {
    Rng rng(seed, k);
    std::vector<double> acc(d), tmp(d), centre(d);
    const auto draws = substream_share(N, static_cast<int>(k));
    for (std::uint64_t i = 0; i < draws; ++i) {
      std::fill(acc.begin(), acc.end(), 0.0);
      double largest = 0.0;
      for (long r = 0; r + 1 < n; ++r) {
        law.sample(rng, tmp);
        double r2 = 0.0;
        for (int j = 0; j < d; ++j) {
          acc[j] += tmp[j];
          r2 += tmp[j] * tmp[j];
        }
        largest = std::max(largest, r2);
      }
      largest = std::sqrt(largest);
      for (std::size_t q = 0; q < m; ++q) {
        for (int j = 0; j < d; ++j) centre[j] = xs[q][j] + b[j] - acc[j];
        // by exchangeability the last summand may be taken to be the largest
        const double f = by_max[q] ? weight * law.cube_probability_beyond(centre, h, largest)
                                   : law.cube_probability(centre, h);
        sums[k * m + q] += f;
        squares[k * m + q] += f * f;
      }
    }
  });
  std::vector<MCEstimate> out;
  const double wall = seconds_since(t0);
  for (std::size_t q = 0; q < m; ++q) {
    double s = 0.0, s2 = 0.0;
    for (int k = 0; k < kSubstreams; ++k) {
      s += sums[k * m + q];
      s2 += squares[k * m + q];
    }
    out.push_back(from_moments(s, s2, N));
    out.back().wall_seconds = wall;
  }
  return out;
}

MCEstimate estimate_lattice(const LatticeSpec& spec, const NormingSeq&, long n, long target,
                            std::uint64_t budget, std::uint64_t seed) {
  check_budget(budget);
  const auto t0 = Clock::now();
  const double shift = std::floor(compute_b_n(spec, n)[0]);
  const double goal = static_cast<double>(target) + shift;
  std::vector<std::uint64_t> tallies(kSubstreams, 0);
  parallel_for(kSubstreams, [&](std::size_t k) {
    Rng rng(seed, k);
    const auto draws = substream_share(budget, static_cast<int>(k));
    for (std::uint64_t i = 0; i < draws; ++i) {
      double s = 0.0;
      for (long j = 0; j < n; ++j) s += spec.draw(rng.uniform());
      if (s == goal) ++tallies[k];
    }
  });
  auto e = estimate_from_tallies(tallies, budget);
  e.wall_seconds = seconds_since(t0);
  return e;
}

std::vector<MCEstimate> estimate_lattice_conditional(const LatticeSpec& spec, long n,
                                                     const std::vector<long>& targets, std::uint64_t N,
                                                     std::uint64_t seed, double beyond) {
  check_budget(N);
  const auto t0 = Clock::now();
  const double shift = std::floor(compute_b_n(spec, n)[0]);
  const std::size_t m = targets.size();
  std::vector<char> by_max(m, 0);
  for (std::size_t q = 0; q < m; ++q) by_max[q] = n >= 2 && std::abs(static_cast<double>(targets[q])) > beyond;
  const double weight = static_cast<double>(n);
  std::vector<double> sums(kSubstreams * m, 0.0), squares(kSubstreams * m, 0.0);
  parallel_for(kSubstreams, [&](std::size_t k) {
    Rng rng(seed, k);
    const auto draws = substream_share(N, static_cast<int>(k));
    for (std::uint64_t i = 0; i < draws; ++i) {
      double s = 0.0, largest = 0.0;
      long ties = 0;
      for (long j = 0; j + 1 < n; ++j) {
        const double x = spec.draw(rng.uniform());
        s += x;
        if (std::abs(x) > largest) {
          largest = std::abs(x);
          ties = 1;
        } else if (std::abs(x) == largest) {
          ++ties;
        }
      }
      for (std::size_t q = 0; q < m; ++q) {
        const double need = static_cast<double>(targets[q]) + shift - s;
        double f = std::abs(need) < 9e15 ? spec.pmf(static_cast<long>(need)) : 0.0;
        if (by_max[q]) {
          // the last summand is the largest; ties are broken by an independent
          // uniform label, which wins against `ties` others with probability 1/(ties+1)
          const double mag = std::abs(need);
          f *= mag > largest ? weight : (mag == largest ? weight / static_cast<double>(ties + 1) : 0.0);
        }
        sums[k * m + q] += f;
        squares[k * m + q] += f * f;
      }
    }
  });
  std::vector<MCEstimate> out;
  const double wall = seconds_since(t0);
  for (std::size_t q = 0; q < m; ++q) {
    double s = 0.0, s2 = 0.0;
    for (int k = 0; k < kSubstreams; ++k) {
      s += sums[k * m + q];
      s2 += squares[k * m + q];
    }
    out.push_back(from_moments(s, s2, N));
    out.back().wall_seconds = wall;
  }
  return out;
}

double big_jump_probability(const ScalarTailSpec& spec, long n, double x) {
  const double t = 0.5 * std::abs(x);
  if (t < 1.0) return 1.0;
  const double tau = (x > 0.0 ? spec.p() : spec.q()) * spec.tail(t);
  return -std::expm1(static_cast<double>(n) * std::log1p(-tau));
}

MCEstimate tail_stratified_estimate(const ScalarTailSpec& spec, const NormingSeq& norm, const CubeQuery& q) {
  if (q.x.size() != 1) throw DomainError("stratified estimator is one-dimensional");
  check_budget(q.N);
  const double x = q.x[0];
  const double t = 0.5 * std::abs(x);
  const double sign = x > 0.0 ? 1.0 : -1.0;
  const double weight_b = big_jump_probability(spec, q.n, x);
  if (!(std::abs(x) > 4.0 * norm.a(q.n)) || t < 1.0 || weight_b > 0.5 || weight_b <= 0.0) {
    auto e = estimate_iid(spec, norm, q);
    e.method = "plain-fallback";
    return e;
  }
  const auto t0 = Clock::now();
  const double tail_t = spec.tail(t);
  const double tau = (sign > 0.0 ? spec.p() : spec.q()) * tail_t;
  const double b = compute_b_n(spec, q.n)[0];
  const long n = q.n;

  // P(K = k | K >= 1) for the number of big jumps, accumulated for inversion.
  std::vector<double> cdf;
  {
    double acc = 0.0;
    double logp = std::log(static_cast<double>(n)) + std::log(tau) + static_cast<double>(n - 1) * std::log1p(-tau);
    for (long k = 1; k <= n; ++k) {
      acc += std::exp(logp) / weight_b;
      cdf.push_back(acc);
      if (acc >= 1.0 - 1e-17) break;
      logp += std::log(static_cast<double>(n - k)) - std::log(static_cast<double>(k + 1)) + std::log(tau) -
              std::log1p(-tau);
    }
    cdf.back() = 1.0;
  }
  auto small_draw = [&](Rng& rng) {
    for (;;) {
      const double v = sample_scalar(spec, rng.uniform());
      if (sign * v <= t) return v;
    }
  };
  auto big_draw = [&](Rng& rng) { return sign * spec.tail_inverse(rng.uniform() * tail_t); };
  auto hit = [&](double s) { return x - q.h < s - b && s - b <= x + q.h; };

  const std::uint64_t n_big = std::max<std::uint64_t>(5000, static_cast<std::uint64_t>(0.8 * static_cast<double>(q.N)));
  const std::uint64_t n_small = std::max<std::uint64_t>(5000, q.N - std::min(q.N, n_big));
  std::vector<std::uint64_t> hits_big(kSubstreams, 0), hits_small(kSubstreams, 0);
  parallel_for(kSubstreams, [&](std::size_t k) {
    Rng rng(q.seed, k);
    for (std::uint64_t i = 0, m = substream_share(n_big, static_cast<int>(k)); i < m; ++i) {
      const double u = rng.uniform();
      const long K = 1 + static_cast<long>(std::lower_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
      double s = 0.0;
      for (long j = 0; j < K; ++j) s += big_draw(rng);
      for (long j = K; j < n; ++j) s += small_draw(rng);
      if (hit(s)) ++hits_big[k];
    }
    for (std::uint64_t i = 0, m = substream_share(n_small, static_cast<int>(k)); i < m; ++i) {
      double s = 0.0;
      for (long j = 0; j < n; ++j) s += small_draw(rng);
      if (hit(s)) ++hits_small[k];
    }
  });
  std::uint64_t hb = 0, hs = 0;
  for (int k = 0; k < kSubstreams; ++k) {
    hb += hits_big[k];
    hs += hits_small[k];
  }
  const double pb = static_cast<double>(hb) / static_cast<double>(n_big);
  const double ps = static_cast<double>(hs) / static_cast<double>(n_small);
  const auto cb = clopper_pearson(hb, n_big, 0.995);
  const auto cs = clopper_pearson(hs, n_small, 0.995);
  const double weight_s = 1.0 - weight_b;
  MCEstimate e;
  e.method = "stratified";
  e.N = n_big + n_small;
  e.hits = hb + hs;
  e.p_hat = weight_b * pb + weight_s * ps;
  e.ci_lo = weight_b * cb.lo + weight_s * cs.lo;
  e.ci_hi = std::min(1.0, weight_b * cb.hi + weight_s * cs.hi);
  e.variance = weight_b * weight_b * pb * (1.0 - pb) / static_cast<double>(n_big) +
               weight_s * weight_s * ps * (1.0 - ps) / static_cast<double>(n_small);
  e.stream_hits.resize(kSubstreams);
  for (int k = 0; k < kSubstreams; ++k) e.stream_hits[k] = hits_big[k] + hits_small[k];
  e.wall_seconds = seconds_since(t0);
  return e;
}

void dump_tallies(const std::string& path, const std::vector<MCEstimate>& estimates) {
  std::ofstream out(path);
  if (!out) throw DomainError("cannot write tallies to " + path);
  out << "row,stream,hits\n";
  for (std::size_t r = 0; r < estimates.size(); ++r)
    for (std::size_t k = 0; k < estimates[r].stream_hits.size(); ++k)
      out << r << ',' << k << ',' << estimates[r].stream_hits[k] << '\n';
}

}  // namespace lld
