#pragma once

#include <memory>
#include <span>
#include <vector>

#include "lld/common.hpp"
#include "lld/heavytail.hpp"
#include "lld/svf.hpp"

namespace lld {

/// Evaluator of Psi(s) = E e^{is.X}.
///
/// Exact mode uses the law's semi-analytic transform (series and contour
/// quadrature for the tails, closed forms for the body). Empirical mode
/// averages e^{is.X_k} over a fixed sample drawn once at construction.
class CharFnModel {
 public:
  enum class Mode { exact, empirical };

  explicit CharFnModel(std::shared_ptr<const Law> law);
  CharFnModel(std::shared_ptr<const Law> law, std::size_t samples, std::uint64_t seed);

  Mode mode() const { return mode_; }
  const Law& law() const { return *law_; }
  std::shared_ptr<const Law> law_ptr() const { return law_; }
  int dim() const { return law_->dim(); }

  cplx psi(std::span<const double> s) const;
  cplx psi_minus_one(std::span<const double> s) const;
  /// log Psi(s), accurate when Psi is close to 1.
  cplx log_psi(std::span<const double> s) const;
  /// Gradient; exact differentiated transform or central differences (step fd_step).
  void gradient(std::span<const double> s, std::span<cplx> out, double fd_step = 1e-6) const;
  /// Standard error of the empirical estimate at s (0 in exact mode).
  double standard_error(std::span<const double> s) const;

 private:
  std::shared_ptr<const Law> law_;
  Mode mode_;
  std::vector<double> sample_;  // row-major, dim() per draw
};

/// log(1 + w) without cancellation for small |w|.
cplx log1p_complex(cplx w);

/// Stable characteristic function exp{-sum_i L_i |s.theta_i|^alpha (1 - i sgn tan(pi alpha/2))}
/// with L_i = cos(pi alpha / 2) Gamma(1 - alpha) w_i. For alpha = 2 the Gaussian
/// limit exp(-sum_i w_i (s.theta_i)^2) is used.
class StableTarget {
 public:
  StableTarget(double alpha, std::vector<Atom> atoms);
  static StableTarget for_law(const Law& law) { return {law.alpha(), law.stable_atoms()}; }

  double alpha() const { return alpha_; }
  const std::vector<Atom>& atoms() const { return atoms_; }
  const std::vector<double>& lambda() const { return lambda_; }
  cplx cf(std::span<const double> s) const;
  /// k_u = int |u.theta|^alpha dLambda (alpha < 2); sum_i w_i |u.theta_i|^2 for alpha = 2.
  double k(std::span<const double> u) const;

 private:
  double alpha_;
  std::vector<Atom> atoms_;
  std::vector<double> lambda_;
};

cplx stable_cf(const StableTarget& target, std::span<const double> s);

/// sup over an s-grid of |Psi(s/a_n)^n e^{-i s.b_n/a_n} - cf(s)|.
double stable_convergence_error(const CharFnModel& model, const NormingSeq& norm, long n,
                                const std::vector<std::vector<double>>& s_grid);

struct DecayFit {
  double epsilon = 0.0;
  double min_c = 0.0;
  double max_c = 0.0;
  double limit_c = 0.0;            // c(s) at the smallest radius, worst direction
  std::vector<double> worst_direction;
  bool holds() const { return min_c > 0.0; }
};

/// c(s) = -log|Psi(s)| / (|s|^alpha l~(1/|s|)) over a radial grid of Pi_{3 eps} \ {0}.
DecayFit fit_decay_constant(const CharFnModel& model, const EllTilde& ell_tilde, double eps,
                            int radii = 60, int directions = 16);

/// Largest eps <= pi/4 (from a halving ladder starting at pi/4) with min c > 0.
double select_epsilon(const CharFnModel& model, const EllTilde& ell_tilde);

struct ModulusRow {
  int k = 0;          // h = 2^-k
  double h = 0.0;
  double ratio = 0.0;  // max over s of the relevant ratio at this h
};

struct ModulusReport {
  std::vector<ModulusRow> difference;  // part (i) for alpha < 1, part (ii) for alpha > 1
  std::vector<ModulusRow> gradient;    // part (iii), alpha > 1 only
  bool bounded = false;                // no growth of the maxima under refinement
};

/// Finite-difference ratios for the modulus of continuity of Psi (alpha < 1) or
/// of its gradient (alpha > 1), and |grad Psi(s)| / (|s|^(alpha-1) l~(1/|s|)).
ModulusReport modulus_report(const CharFnModel& model, const EllTilde& ell_tilde, double M,
                             int k_min = 4, int k_max = 16);

/// a_n^{d+beta} int_{Pi_{3 eps}} |s|^beta |Psi(s)|^n ds (slowly varying weight L = 1).
double scaled_decay_integral(const CharFnModel& model, const NormingSeq& norm, long n,
                             double beta, double eps);

}  // namespace lld
