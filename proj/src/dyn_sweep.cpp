#include "lld/dyn_sweep.hpp"

#include <algorithm>
#include <boost/math/distributions/students_t.hpp>
#include <chrono>
#include <cmath>
#include <limits>
#include <memory>

#include "lld/quadrature.hpp"
#include "lld/rng.hpp"

namespace lld {

namespace {

constexpr double kTotalSteps = 4e7;

double student99(int dof) {
  return boost::math::quantile(boost::math::students_t_distribution<double>(dof), 0.995);
}

double power_of(double base, double alpha) {
  if (alpha == 0.5) return std::sqrt(base);
  if (alpha == 2.0) return base * base;
  return std::pow(base, alpha);
}

// P(v(z) in (lo, hi] | f z = y) under the invariant measure.
double preimage_probability(const IntervalMap& map, const Observable& obs, double y, double lo, double hi) {
  if (!(hi > lo)) return 0.0;
  if (map.kind() == MapKind::gauss) {
    // z = 1/(b + y) with weight (1 + y)(1/(b + y) - 1/(b + 1 + y)); v + kappa = (b + y)^(1/alpha)
    const double kappa = obs.kappa();
    const double upper = hi + kappa;
    if (upper < 1.0) return 0.0;
    const double lower = std::max(lo + kappa, 1.0);
    const double alpha = obs.alpha();
    const double b_lo = std::max(1.0, std::ceil(power_of(lower, alpha) - y));
    const double b_hi = std::floor(power_of(upper, alpha) - y);
    if (b_hi < b_lo) return 0.0;
    return (1.0 + y) * (1.0 / (b_lo + y) - 1.0 / (b_hi + 1.0 + y));
  }
  double p = 0.0;
  for (const auto& pre : map.preimages(y)) {
    const double v = obs(pre.z);
    if (lo < v && v <= hi) p += pre.weight;
  }
  return p;
}

struct StreamTally {
  // [rung][centre]
  std::vector<std::vector<double>> sum;
  std::vector<std::vector<std::uint64_t>> hits;
  std::vector<std::uint64_t> blocks;
  long reseeded = 0;
};

std::vector<double> stream_orbit(const TransferModel& model, Rng& rng, std::size_t length, long burn_in,
                                 double jitter, long& reseeded) {
  const IntervalMap& map = model.map();
  const bool gauss = map.kind() == MapKind::gauss;
  std::vector<double> out;
  out.reserve(length);
  long double z = model.invariant_quantile(rng.uniform());
  for (long i = 0; out.size() < length; ++i) {
    if (i >= burn_in) out.push_back(static_cast<double>(z));
    if (gauss) {
      z = map.apply(z);
    } else {
      double w = map.apply(static_cast<double>(z)) + (rng.uniform() - 0.5) * jitter;
      if (w < 0.0) w += 1.0;
      if (w >= 1.0) w -= 1.0;
      z = w;
    }
    if (z <= 0.0L) {
      z = model.invariant_quantile(rng.uniform());
      ++reseeded;
    }
  }
  return out;
}

}  // namespace

double invariant_mean(const IntervalMap& map, const Observable& obs) {
  if (obs.kind() == Observable::Kind::indicator) {
    // integral() clips to the indicator's support; weight it by the density
    const int cells = 1 << 14;
    double acc = 0.0;
    for (int k = 0; k < cells; ++k) {
      const double a = static_cast<double>(k) / cells, b = static_cast<double>(k + 1) / cells;
      acc += obs.integral(a, b) * (map.invariant_cdf(b) - map.invariant_cdf(a)) / (b - a);
    }
    return acc;
  }
  const double alpha = obs.alpha();
  if (alpha < 1.0) return std::numeric_limits<double>::infinity();
  const double p = alpha / (alpha - 1.0);
  if (map.kind() == MapKind::gauss) {
    // kappa = p int_0^1 h(u^p) du with h smooth
    const auto h = [&](double u) { return map.invariant_density(std::pow(u, p)); };
    double acc = 0.0;
    for (int k = 0; k < 64; ++k) acc += quad::integrate_gl(h, k / 64.0, (k + 1) / 64.0, 16);
    return p * acc;
  }
  // piecewise-constant density: exact on the cells of its CDF breakpoints
  std::vector<double> breaks{0.0};
  const int fine = 1 << 16;
  for (int k = 1; k <= fine; ++k) breaks.push_back(static_cast<double>(k) / fine);
  double acc = 0.0;
  for (std::size_t k = 0; k + 1 < breaks.size(); ++k) {
    const double a = breaks[k], b = breaks[k + 1];
    acc += obs.integral(a, b) * (map.invariant_cdf(b) - map.invariant_cdf(a)) / (b - a);
  }
  return acc;
}

double tail_constant(const IntervalMap& map) { return map.invariant_density(0.0); }

std::vector<std::vector<MCEstimate>> birkhoff_estimates(const TransferModel& model, const std::vector<long>& ns,
                                                        const std::vector<std::vector<std::vector<double>>>& xs,
                                                        const BirkhoffOptions& opt) {
  if (ns.size() != xs.size()) throw DomainError("one centre list per n is required");
  if (!(opt.h > 0.0)) throw DomainError("cube half-width must be positive");
  long max_n = 1;
  for (long n : ns) {
    if (n < 1) throw DomainError("Birkhoff sums need n >= 1");
    max_n = std::max(max_n, n);
  }
  const auto t0 = std::chrono::steady_clock::now();
  const auto per_stream =
      static_cast<std::size_t>(std::ceil(kTotalSteps * opt.budget_scale / kSubstreams)) + static_cast<std::size_t>(max_n);
  const Observable& obs = model.observable();
  const IntervalMap& map = model.map();
  const bool conditional = opt.estimator == Estimator::conditional;

  std::vector<StreamTally> tallies(kSubstreams);
  parallel_for(kSubstreams, [&](std::size_t k) {
    Rng rng(opt.seed, k);
    StreamTally& st = tallies[k];
    const auto orbit = stream_orbit(model, rng, per_stream, opt.burn_in, opt.jitter, st.reseeded);
    std::vector<double> vals(orbit.size());
    for (std::size_t i = 0; i < orbit.size(); ++i) vals[i] = obs(orbit[i]);
    for (std::size_t r = 0; r < ns.size(); ++r) {
      const long n = ns[r];
      const auto& centres = xs[r];
      std::vector<double> sum(centres.size(), 0.0);
      std::vector<std::uint64_t> hits(centres.size(), 0);
      std::uint64_t blocks = 0;
      if (conditional) {
        const auto stride = static_cast<std::size_t>(std::max(1L, n - 1));
        for (std::size_t t = 0; t + stride <= orbit.size(); t += stride, ++blocks) {
          double rest = 0.0;
          for (long i = 0; i + 1 < n; ++i) rest += vals[t + static_cast<std::size_t>(i)];
          for (std::size_t q = 0; q < centres.size(); ++q)
            sum[q] += preimage_probability(map, obs, orbit[t], centres[q][0] - opt.h - rest,
                                           centres[q][0] + opt.h - rest);
        }
      } else {
        const auto stride = static_cast<std::size_t>(n);
        for (std::size_t t = 0; t + stride <= orbit.size(); t += stride, ++blocks) {
          double vn = 0.0;
          for (std::size_t i = 0; i < stride; ++i) vn += vals[t + i];
          for (std::size_t q = 0; q < centres.size(); ++q)
            if (centres[q][0] - opt.h < vn && vn <= centres[q][0] + opt.h) ++hits[q];
        }
      }
      st.sum.push_back(std::move(sum));
      st.hits.push_back(std::move(hits));
      st.blocks.push_back(blocks);
    }
  });

  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const double tq = student99(kSubstreams - 1);
  std::vector<std::vector<MCEstimate>> out(ns.size());
  for (std::size_t r = 0; r < ns.size(); ++r) {
    for (std::size_t q = 0; q < xs[r].size(); ++q) {
      std::uint64_t N = 0;
      for (const auto& st : tallies) N += st.blocks[r];
      MCEstimate e;
      if (conditional) {
        std::vector<double> means;
        double total = 0.0;
        for (const auto& st : tallies) {
          total += st.sum[r][q];
          means.push_back(st.blocks[r] ? st.sum[r][q] / static_cast<double>(st.blocks[r]) : 0.0);
        }
        e.method = "birkhoff-conditional";
        e.N = N;
        e.p_hat = std::clamp(total / static_cast<double>(N), 0.0, 1.0);
        double ss = 0.0;
        for (double m : means) ss += (m - e.p_hat) * (m - e.p_hat);
        e.variance = ss / (kSubstreams * (kSubstreams - 1.0));
        const double half = tq * std::sqrt(e.variance);
        e.ci_lo = std::max(0.0, e.p_hat - half);
        e.ci_hi = std::min(1.0, e.p_hat + half);
        if (total == 0.0) e.ci_hi = clopper_pearson(0, N).hi;
      } else {
        std::vector<std::uint64_t> per;
        for (const auto& st : tallies) per.push_back(st.hits[r][q]);
        e = estimate_from_tallies(per, N);
        e.method = "birkhoff-plain";
      }
      e.wall_seconds = wall;
      out[r].push_back(std::move(e));
    }
  }
  return out;
}

LLDReport birkhoff_lld_sweep(const TransferModel& model, const SmoothingKernel& kernel, const Envelope& env,
                             const SweepGrid& grid, const BirkhoffOptions& opt) {
  if (env.dim() != 1) throw DomainError("dynamical sweeps are one-dimensional");
  std::vector<std::vector<std::vector<double>>> xs;
  for (long n : grid.ns) xs.push_back(grid_points(grid, env.norm().a(n), opt.both_signs));
  const auto est = birkhoff_estimates(model, grid.ns, xs, opt);
  if (opt.tallies)
    for (const auto& e : est) opt.tallies->insert(opt.tallies->end(), e.begin(), e.end());

  std::unique_ptr<OperatorBound> bound;
  if (opt.with_bound) bound = std::make_unique<OperatorBound>(model, kernel, grid.ns, opt.bound);

  LLDReport rep;
  rep.dim = 1;
  for (std::size_t r = 0; r < grid.ns.size(); ++r) {
    const long n = grid.ns[r];
    const double a = env.norm().a(n);
    for (std::size_t q = 0; q < xs[r].size(); ++q) {
      LLDRow row;
      row.n = n;
      row.x = xs[r][q];
      row.a_n = a;
      row.regime = regime_tag(env, n, row.x);
      row.p_hat = est[r][q].p_hat;
      row.ci_lo = est[r][q].ci_lo;
      row.ci_hi = est[r][q].ci_hi;
      row.fourier_bound = bound ? bound->evaluate(n, row.x[0]) : std::numeric_limits<double>::quiet_NaN();
      row.envelope = env(n, row.x);
      row.ratio_mc = row.p_hat / row.envelope;
      row.ratio_oracle = row.fourier_bound / row.envelope;
      rep.rows.push_back(std::move(row));
    }
  }
  finalize_report(rep);
  return rep;
}

}  // namespace lld
