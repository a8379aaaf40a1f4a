#pragma once

#include <cstdint>
#include <vector>

#include "lld/interval_map.hpp"
#include "lld/lld_verify.hpp"
#include "lld/mc.hpp"
#include "lld/transfer.hpp"

namespace lld {

/// int v dmu for the uncentred observable under the map's invariant density.
/// For z^(-1/alpha), alpha > 1, the substitution z = u^(alpha/(alpha-1)) turns
/// the integrand into a bounded one. Infinite for alpha < 1.
double invariant_mean(const IntervalMap& map, const Observable& obs);

/// Constant c with mu(z^(-1/alpha) > x) ~ c x^(-alpha): the invariant density at 0+.
double tail_constant(const IntervalMap& map);

struct BirkhoffOptions {
  double h = 1.0;
  double budget_scale = 1.0;   // orbit length is 4e7 * scale steps in total
  std::uint64_t seed = 1;
  Estimator estimator = Estimator::conditional;
  long burn_in = 1000;
  double jitter = 0x1p-50;     // per-step noise for the linear maps
  bool both_signs = true;
  bool with_bound = true;      // fill fourier_bound from the operator bound
  OperatorBoundOptions bound;
  std::vector<MCEstimate>* tallies = nullptr;
};

/// Estimates of mu{v_n in Pi_h(x)} for every n and its centres, all drawn from
/// one set of long orbits (one per substream) started from the model's fixed
/// vector and cut into disjoint blocks.
///
/// The conditional estimator takes a block start y and the next n-1 values,
/// and averages the exact probability that a preimage z of y (under mu given
/// f z = y) puts v_n in the cube. The interval is Student-t at 99% over the
/// substream means, which absorbs the correlation between blocks. The plain
/// estimator counts hits with a Clopper-Pearson interval.
std::vector<std::vector<MCEstimate>> birkhoff_estimates(const TransferModel& model, const std::vector<long>& ns,
                                                        const std::vector<std::vector<std::vector<double>>>& xs,
                                                        const BirkhoffOptions& opt);

/// Rows for every n of the grid, bounded by the operator LLD bound where it is
/// affordable (NaN otherwise), with the verdict logic of the i.i.d. sweep. The
/// model's observable must already be centred (for alpha > 1).
LLDReport birkhoff_lld_sweep(const TransferModel& model, const SmoothingKernel& kernel, const Envelope& env,
                             const SweepGrid& grid, const BirkhoffOptions& opt);

}  // namespace lld
