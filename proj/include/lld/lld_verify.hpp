#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lld/charfn.hpp"
#include "lld/fourier_oracle.hpp"
#include "lld/heavytail.hpp"
#include "lld/mc.hpp"
#include "lld/smoothing.hpp"
#include "lld/svf.hpp"

namespace lld {

/// e(n, x) = (n / a_n^d) l~(|x|) / (1 + |x|^alpha).
class Envelope {
 public:
  Envelope(const NormingSeq& norm, int dim) : norm_(norm), dim_(dim) {}

  const NormingSeq& norm() const { return norm_; }
  int dim() const { return dim_; }
  double operator()(long n, std::span<const double> x) const;

 private:
  const NormingSeq& norm_;
  int dim_;
};

double envelope_eval(const Envelope& env, long n, std::span<const double> x);

enum class Regime { local, crossover, large_deviation };
std::string to_string(Regime r);
std::optional<Regime> parse_regime(const std::string& s);

/// local if |x| <= a_n/4, crossover if |x| <= 4 a_n, large deviation beyond.
Regime regime_tag(const Envelope& env, long n, std::span<const double> x);

enum class RowStatus { pass, fail, inconclusive };
std::string to_string(RowStatus s);
std::optional<RowStatus> parse_status(const std::string& s);

struct LLDRow {
  long n = 0;
  std::vector<double> x;
  Regime regime = Regime::local;
  double p_hat = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  double fourier_bound = 0.0;
  double envelope = 0.0;
  double ratio_mc = 0.0;
  double ratio_oracle = 0.0;
  RowStatus status = RowStatus::inconclusive;
  double a_n = 0.0;  // not part of the CSV; used by the sharpness summary
};

enum class Verdict { pass, fail, inconclusive };
std::string to_string(Verdict v);
int exit_code(Verdict v);  // 0, 1, 2

struct RegimeSummary {
  Regime regime = Regime::local;
  std::size_t rows = 0;
  std::size_t resolved = 0;
  double max_ratio_mc = 0.0;
  double max_ratio_oracle = 0.0;
};

struct LLDReport {
  int dim = 1;
  std::vector<LLDRow> rows;
  double c_hat = 0.0;                 // max ratio_oracle over rows with a finite bound and no violation
  double slope = 0.0;                 // log max ratio_oracle vs log n
  std::size_t slope_points = 0;
  std::size_t oracle_violations = 0;  // rows with ci_lo > fourier bound
  double sharp_fraction = 0.0;        // crossover rows with ratio_mc >= 0.01 c_hat
  std::size_t sharp_rows = 0;
  std::vector<RegimeSummary> regimes;
  std::vector<std::size_t> inconclusive;  // row indices
  Verdict verdict = Verdict::inconclusive;
  double slope_tolerance = 0.1;
  double mc_factor = 1.5;
};

/// Row statuses, fitted C, slope and verdict from filled rows. C and the slope
/// come from the oracle ratios of every row with a finite bound. Rows whose CI is
/// wider than the estimate are INCONCLUSIVE and skip the sampling check; a row
/// FAILs when its lower limit exceeds the bound or its upper ratio exceeds
/// mc_factor * C.
void finalize_report(LLDReport& report);

/// Human-readable summary block.
std::string summarize(const LLDReport& report);

/// Grid of the sweep: x = multiple * a_n * direction for each n.
struct SweepGrid {
  std::vector<long> ns;
  std::vector<std::vector<double>> directions;  // unit vectors
  std::vector<double> multiples;                // of a_n; 0 yields the origin once
};

/// Dyadic ladder 2^lo..2^hi.
std::vector<long> dyadic_ladder(int lo, int hi);
/// {0} and 2^k for k = lo..hi.
std::vector<double> dyadic_multiples(int lo, int hi);
/// Expands the grid at one n into concrete centres (origin once, both signs in d = 1).
std::vector<std::vector<double>> grid_points(const SweepGrid& grid, double a_n, bool both_signs);

enum class Estimator { plain, conditional };

struct SweepOptions {
  double h = 1.0;
  double budget_scale = 1.0;
  std::uint64_t seed = 1;
  Estimator estimator = Estimator::conditional;
  bool both_signs = true;  // d = 1: mirror every centre
  OracleOptions oracle;
  std::vector<MCEstimate>* tallies = nullptr;  // filled when set
};

/// Fills rows from Monte Carlo and the Fourier oracle, then finalises.
LLDReport sweep(const Law& law, const CharFnModel& model, const SmoothingKernel& kernel, const Envelope& env,
                const SweepGrid& grid, const SweepOptions& opt);

/// Lattice version: P(S_n - floor(b_n) = N) for integer N near multiples of a_n,
/// bounded by the same Fourier integral at N + floor(b_n) - b_n.
LLDReport lattice_sweep(const LatticeSpec& law, const CharFnModel& model, const SmoothingKernel& kernel,
                        const Envelope& env, const SweepGrid& grid, const SweepOptions& opt);

/// Least-squares slope of log y against log x.
double loglog_slope(std::span<const double> x, std::span<const double> y);

struct Provenance {
  std::string config_hash;
  std::string version;
};

/// CSV with the report schema, preceded by a `#` comment line carrying the
/// provenance; a summary file is written next to it (path + ".summary.txt").
void emit_report(const LLDReport& report, const std::string& path, const Provenance& prov);
std::string report_csv(const LLDReport& report, const Provenance& prov);
/// Parses a CSV written by emit_report (rows only; summary fields are recomputed).
LLDReport read_report(const std::string& path);
LLDReport parse_report_csv(const std::string& text);

/// Shortest decimal that round-trips to the same double.
std::string format_double(double v);

}  // namespace lld
