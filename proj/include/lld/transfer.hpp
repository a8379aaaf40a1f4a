#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "lld/common.hpp"
#include "lld/interval_map.hpp"
#include "lld/smoothing.hpp"
#include "lld/svf.hpp"
#include "lld/tail_cf.hpp"

namespace lld {

using SparseC = Eigen::SparseMatrix<cplx, Eigen::ColMajor>;

/// Scalar observable on [0, 1]: z^(-1/alpha) - kappa, or value * 1_[lo, hi).
class Observable {
 public:
  enum class Kind { power, indicator };

  static Observable power(double alpha, double kappa = 0.0);
  static Observable indicator(double value, double lo, double hi);

  Kind kind() const { return kind_; }
  double alpha() const { return alpha_; }
  double kappa() const { return kappa_; }
  Observable centred(double kappa) const;
  double operator()(double z) const;
  /// int_{z1}^{z2} v(z) dz for the uncentred observable.
  double integral(double z1, double z2) const;
  /// int_{z1}^{z2} e^{i s v(z)} dz (centring included).
  cplx phase_integral(double s, double z1, double z2) const;

 private:
  Kind kind_ = Kind::power;
  double alpha_ = 0.5;
  double kappa_ = 0.0;
  double value_ = 0.0, lo_ = 0.0, hi_ = 0.0;
  std::shared_ptr<const TailTransform> pareto_;  // J for the unit Pareto law of index alpha
};

struct TransferOptions {
  int m = 1024;                 // uniform resolution (a power of two)
  int graded_cells = 32;        // geometric refinement of the first uniform cell
  int gauss_exact_branches = 128;
  long gauss_truncation = 10000;  // branches beyond are one lumped cell
  double gauss_group_ratio = 1.25;
};

/// Ulam discretisation of the twisted transfer operator R(s) f = R(e^{isv} f).
///
/// State vectors hold cell masses; entry (j, k) is
/// (1/|c_k|) int_{c_k and f^-1 c_j} e^{isv(z)} dz, so columns sum to one at s = 0.
/// For the Gauss map, cells below 1/(B+1) collect whole branches: their target
/// masses are exact sums over the branches and their twist is the exact average
/// of e^{isv} over the cell.
class TransferModel {
 public:
  TransferModel(IntervalMap map, Observable obs, TransferOptions opt = {});

  const IntervalMap& map() const { return map_; }
  const Observable& observable() const { return obs_; }
  const TransferOptions& options() const { return opt_; }
  std::size_t size() const { return widths_.size(); }
  const std::vector<double>& edges() const { return edges_; }
  const std::vector<double>& widths() const { return widths_; }

  SparseC assemble(double s) const;
  /// Fixed vector at s = 0 (cell masses, summing to one).
  const Eigen::VectorXd& invariant() const { return invariant_; }
  /// int v dmu_m for the uncentred observable (finite for alpha > 1 or bounded v).
  double discrete_mean() const;
  /// Returns a copy whose observable is centred by kappa.
  TransferModel recentred(double kappa) const;
  /// L1 distance between the cell-averaged fixed vector and a density.
  double density_l1_error(const std::function<double(double)>& density) const;
  /// Inverse CDF of the fixed vector (uniform within cells).
  double invariant_quantile(double u) const;

 private:
  struct Group {
    std::size_t cell;
    long first_branch, end_branch;  // branches [first, end); end < 0 means unbounded lump
  };
  struct Entry {
    int row;
    int col;
    double z1, z2;  // source subinterval for exact pieces
  };
  void build_cells();
  void build_pieces();
  void compute_invariant();

  IntervalMap map_;
  Observable obs_;
  TransferOptions opt_;
  std::vector<double> edges_;
  std::vector<double> widths_;
  std::vector<Entry> pieces_;                  // exact pieces
  std::vector<Group> groups_;                  // gauss grouped cells
  std::vector<std::vector<std::pair<int, double>>> group_mass_;  // per group: (target, mass)
  Eigen::VectorXd invariant_;
};

struct EigenData {
  cplx lambda = 1.0;
  Eigen::VectorXcd zeta;   // right eigenvector, entries summing to one
  Eigen::VectorXcd left;   // left eigenvector
  double subleading = 0.0; // |lambda_2| from the deflated iteration
  double gap = 0.0;        // |lambda_2| / |lambda|
  int iterations = 0;
};

/// Power iteration with deflation (tolerance 1e-12, at most 1e5 iterations).
EigenData leading_eig(const SparseC& A, double tol = 1e-12, bool want_subleading = true);
EigenData leading_eig(const TransferModel& model, double s, double tol = 1e-12, bool want_subleading = true);

struct EigenPoint {
  double s = 0.0;
  cplx lambda = 1.0;
  double gap = 0.0;
  bool flagged = false;
};

struct EigencurveFit {
  std::vector<EigenPoint> points;
  double c = 0.0;
  double alpha_hat = 0.0;
  double residual = 0.0;        // max |log residual| over the fitted decade
  bool flagged = false;         // residual above 0.1
  double derivative_at_zero = 0.0;       // |d lambda / ds| at 0 (alpha > 1)
  std::vector<double> derivative_ratio;  // |lambda'(s)| / (s^(alpha-1) l~(1/s)) on the grid (alpha > 1)
};

/// Log-spaced radial grid of `points` values from s_max down `decades` decades.
std::vector<double> eigencurve_grid(double s_max, int points, double decades);

/// Samples lambda(s) and fits -log|lambda| ~ c s^alpha_hat l~(1/s) on the decade nearest 0.
EigencurveFit eigencurve(const TransferModel& model, const std::vector<double>& s_grid, const EllTilde& ell_tilde);

/// Writes `s,re_lambda,im_lambda,abs_lambda,gap,fit_flag`.
std::string eigencurve_csv(const EigencurveFit& fit, const std::string& header_comment);

struct OperatorBoundOptions {
  long exact_max_n = 64;      // beyond this the leading eigen-term is used
  int grading_levels = 40;    // dyadic panels below eps
  int per_panel = 16;
  double cutoff = 1e-17;
  long max_fine_nodes = 400000;  // larger |x| is reported as unaffordable (NaN)
};

/// Numerical analogue of sup_j |A_{n,x} 1| with
/// A_{n,x} = int e^{-isx} r(s) R(s)^n ds on the discretisation.
///
/// The s-axis is cut into dyadic panels below eps with Gauss-Legendre nodes.
/// Matrices are assembled once per node and shared by every n: small n are
/// powered exactly, larger n use lambda^n zeta (u^H m0)/(u^H zeta). Each n keeps
/// the panels where |lambda|^n is above the cutoff. An x integrates the panel
/// interpolants against e^{-isx} with weights built on finer nodes.
class OperatorBound {
 public:
  OperatorBound(const TransferModel& model, const SmoothingKernel& kernel, std::vector<long> ns,
                OperatorBoundOptions opt = {});
  /// n must be one of the constructor's; NaN when |x| needs more than max_fine_nodes.
  double evaluate(long n, double x) const;
  double support(long n) const;

 private:
  struct Table {
    double support = 0.0;
    std::size_t panels = 0;
    Eigen::MatrixXcd values;  // size x (panels * per_panel), already multiplied by r(s)/m0
  };
  const Table& table(long n) const;

  OperatorBoundOptions opt_;
  std::vector<double> panel_lo_, panel_hi_;  // ascending
  std::vector<std::pair<long, Table>> tables_;
};

double operator_lld_bound(const TransferModel& model, const SmoothingKernel& kernel, long n, double x,
                          OperatorBoundOptions opt = {});

struct SpectralHypothesisReport {
  std::vector<std::pair<double, double>> difference;  // (h, ratio)
  std::vector<std::pair<double, double>> gradient;    // alpha > 1
  bool bounded = false;
  double gap_at_zero = 0.0;
  double lambda_at_zero = 0.0;
};

/// Matrix-norm analogue of the modulus-of-continuity checks for R(s) (induced
/// sup-norm on cell densities) and the spectral gap at 0. Advisory evidence.
SpectralHypothesisReport spectral_hypothesis_report(const TransferModel& model, double eps, double alpha,
                                                    const EllTilde& ell_tilde, int k_min = 4, int k_max = 14);

/// Induced sup-norm of A acting on cell densities.
double density_sup_norm(const TransferModel& model, const SparseC& A);

}  // namespace lld
