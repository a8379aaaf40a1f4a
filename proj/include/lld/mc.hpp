#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "lld/heavytail.hpp"
#include "lld/svf.hpp"

namespace lld {

/// Number of fixed random substreams every estimator splits its budget into.
/// Tallies are reduced in substream order, so results do not depend on threads.
inline constexpr int kSubstreams = 64;

struct CubeQuery {
  long n = 1;
  std::vector<double> x;
  double h = 1.0;
  std::uint64_t N = 10000;
  std::uint64_t seed = 1;
};

struct MCEstimate {
  double p_hat = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 1.0;
  std::uint64_t hits = 0;
  std::uint64_t N = 0;
  double variance = 0.0;      // estimated variance of p_hat
  double wall_seconds = 0.0;
  std::string method = "plain";
  std::vector<std::uint64_t> stream_hits;  // per substream, for --dump-tallies
};

struct Interval {
  double lo = 0.0;
  double hi = 1.0;
};

/// Exact binomial interval at the given two-sided confidence level.
Interval clopper_pearson(std::uint64_t hits, std::uint64_t N, double level = 0.99);

/// MCEstimate from per-substream hit counts (Clopper-Pearson 99%).
MCEstimate estimate_from_tallies(std::span<const std::uint64_t> stream_hits, std::uint64_t N);

/// Default budget: max(1e4, 4e7/n) draws of S_n, times scale.
std::uint64_t default_budget(long n, double scale = 1.0);

/// Seed of the ladder rung n, derived from the experiment seed.
std::uint64_t seed_for_n(std::uint64_t seed, long n);

/// Draws that substream k of kSubstreams performs out of N.
std::uint64_t substream_share(std::uint64_t N, int k);

/// Plain hit counting of S_n - b_n in Pi_h(x).
MCEstimate estimate_iid(const Law& law, const NormingSeq& norm, const CubeQuery& q);

/// Plain hit counting for many centres sharing the same draws of S_n.
std::vector<MCEstimate> estimate_iid_batch(const Law& law, long n, const std::vector<std::vector<double>>& xs,
                                           double h, std::uint64_t N, std::uint64_t seed);

/// Conditioning on the first n-1 summands: averages
/// P(X_n in Pi_h(x + b_n - S_{n-1})) over draws of S_{n-1}. Unbiased, bounded by
/// one, and resolves probabilities far below 1/N; the interval is the normal one
/// at 99%.
///
/// Centres with |x| > beyond (laws without atoms only) average
/// n P(X_n in Pi_h(x + b_n - S_{n-1}), |X_n| > max_{i<n} |X_i|) instead: the big
/// jump is integrated exactly whichever summand makes it, which keeps the
/// variance small far out in the tails.
std::vector<MCEstimate> estimate_conditional_batch(const Law& law, long n,
                                                   const std::vector<std::vector<double>>& xs, double h,
                                                   std::uint64_t N, std::uint64_t seed,
                                                   double beyond = std::numeric_limits<double>::infinity());

/// P(S_n - floor(b_n) = target) by exact hits.
MCEstimate estimate_lattice(const LatticeSpec& spec, const NormingSeq& norm, long n, long target,
                            std::uint64_t budget, std::uint64_t seed);

/// Conditional version of estimate_lattice for many targets (pmf of the last
/// summand). Targets with |N| > beyond condition on the last summand being the
/// largest in modulus, with ties split by an independent uniform label.
std::vector<MCEstimate> estimate_lattice_conditional(const LatticeSpec& spec, long n,
                                                     const std::vector<long>& targets, std::uint64_t N,
                                                     std::uint64_t seed,
                                                     double beyond = std::numeric_limits<double>::infinity());

/// Stratifies on B = {max_i sgn(x) X_i > |x|/2}: P(B) = 1 - (1 - tau)^n is exact,
/// B is sampled by drawing the number of big jumps from the truncated binomial
/// and the jumps themselves by conditional tail inversion. The interval combines
/// stratum-wise Clopper-Pearson intervals at 99.5% each. Falls back to plain
/// hit counting when P(B) > 1/2 or |x|/2 < 1.
MCEstimate tail_stratified_estimate(const ScalarTailSpec& spec, const NormingSeq& norm, const CubeQuery& q);

/// Probability of the big-jump stratum, 1 - (1 - tau)^n.
double big_jump_probability(const ScalarTailSpec& spec, long n, double x);

/// Writes `stream,hits` rows (one per substream) for each estimate.
void dump_tallies(const std::string& path, const std::vector<MCEstimate>& estimates);

}  // namespace lld
