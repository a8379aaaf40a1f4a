#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "lld/common.hpp"
#include "lld/rng.hpp"
#include "lld/svf.hpp"
#include "lld/tail_cf.hpp"

namespace lld {

/// Point mass of a spectral measure: a unit direction and its weight.
struct Atom {
  std::vector<double> direction;
  double weight = 0.0;
};

/// Atomic probability measure on the unit sphere of R^d.
class SpectralMeasure {
 public:
  SpectralMeasure() = default;
  explicit SpectralMeasure(std::vector<Atom> atoms);

  int dim() const { return dim_; }
  const std::vector<Atom>& atoms() const { return atoms_; }
  /// sum_i w_i |u . theta_i|^alpha
  double moment(std::span<const double> u, double alpha) const;
  bool symmetric() const;

 private:
  std::vector<Atom> atoms_;
  int dim_ = 0;
};

struct NondegeneracyReport {
  double minimum = 0.0;
  std::vector<double> witness;  // unit direction attaining the minimum
  bool degenerate() const { return minimum < 1e-8; }
};

/// Minimises sum_i w_i |u . theta_i|^alpha over a quasi-uniform grid of the
/// sphere (>= 10^4 directions for d = 2, 3) followed by local refinement.
NondegeneracyReport nondegeneracy_check(const SpectralMeasure& sigma, double alpha);

/// Common interface of every random variable the toolkit sums.
///
/// Laws are immutable; sampling draws from an explicit Rng so that independent
/// streams can run on independent threads.
class Law {
 public:
  virtual ~Law() = default;

  virtual int dim() const = 0;
  virtual double alpha() const = 0;
  /// Slowly varying factor of the tail P(|X| > x) ~ l(x) x^-alpha (up to the
  /// directional weights returned by stable_atoms()).
  virtual const SlowlyVarying& ell() const = 0;
  /// Directional tail weights, unnormalised, as they enter the stable limit.
  virtual std::vector<Atom> stable_atoms() const = 0;
  virtual bool lattice() const { return false; }
  virtual bool symmetric() const = 0;
  virtual std::string describe() const = 0;

  virtual void sample(Rng& rng, std::span<double> out) const = 0;
  /// E X; only finite for alpha > 1.
  virtual std::vector<double> mean() const = 0;
  /// Psi(s) - 1 with Psi(s) = E e^{i s.X}.
  virtual cplx psi_minus_one(std::span<const double> s) const = 0;
  /// Gradient of Psi at s (alpha > 1).
  virtual void psi_gradient(std::span<const double> s, std::span<cplx> out) const = 0;
  /// P(X in Pi_h(c)) for the half-open cube prod_j (c_j - h, c_j + h].
  virtual double cube_probability(std::span<const double> center, double h) const = 0;
  /// P(X in Pi_h(c), |X| > radius). Only laws without atoms provide it.
  virtual bool atomless() const { return false; }
  virtual double cube_probability_beyond(std::span<const double> center, double h, double radius) const;

  cplx psi(std::span<const double> s) const { return 1.0 + psi_minus_one(s); }

  /// True when Psi(s) - 1 = sum_j axis_part(j, s_j), which lets d-dimensional
  /// Fourier sums tabulate one function per axis.
  virtual bool axis_separable() const { return dim() == 1; }
  virtual cplx axis_part(int j, double t) const;
};

/// Scalar law with exactly regularly varying tails:
/// P(X > x) = p T(x), P(X <= -x) = q T(x) for x >= 1, T(x) = l(x) x^-alpha,
/// and the remaining mass 1 - (p+q)T(1) uniform on (-1, 1).
class ScalarTailSpec final : public Law {
 public:
  ScalarTailSpec(double alpha, double p, double q, const SlowlyVarying& ell);

  double p() const { return p_; }
  double q() const { return q_; }
  double body_mass() const { return body_; }
  double tail(double x) const;           // T(x), x >= 1
  double tail_inverse(double w) const;   // x >= 1 with T(x) = w, w in (0, T(1)]
  double cdf(double x) const;
  double quantile(double u) const;       // exact inverse CDF
  /// P(X in (a, b]); infinite ends allowed, tails evaluated without cancellation against 1.
  double interval_probability(double a, double b) const;
  /// P(X in (a, b], |X| > radius).
  double interval_probability_beyond(double a, double b, double radius) const;
  const TailTransform& transform() const { return tf_; }

  int dim() const override { return 1; }
  double alpha() const override { return alpha_; }
  const SlowlyVarying& ell() const override { return ell_; }
  std::vector<Atom> stable_atoms() const override;
  bool symmetric() const override { return p_ == q_; }
  std::string describe() const override;
  void sample(Rng& rng, std::span<double> out) const override;
  std::vector<double> mean() const override;
  cplx psi_minus_one(std::span<const double> s) const override;
  void psi_gradient(std::span<const double> s, std::span<cplx> out) const override;
  double cube_probability(std::span<const double> center, double h) const override;
  bool atomless() const override { return true; }
  double cube_probability_beyond(std::span<const double> center, double h, double radius) const override;

  cplx psi_minus_one(double s) const;
  cplx psi_derivative(double s) const;

 private:
  double alpha_, p_, q_;
  SlowlyVarying ell_;
  double tail1_, body_;
  TailTransform tf_;
};

double sample_scalar(const ScalarTailSpec& spec, double u);

/// X = R theta where R follows the scalar law with p = 1, q = 0 and theta is
/// drawn from an atomic spectral measure independently of R.
class MultiTailSpec final : public Law {
 public:
  MultiTailSpec(double alpha, const SpectralMeasure& sigma, const SlowlyVarying& ell);

  const SpectralMeasure& sigma() const { return sigma_; }
  const ScalarTailSpec& radial() const { return radial_; }
  std::vector<double> draw(double u1, double u2) const;

  int dim() const override { return sigma_.dim(); }
  double alpha() const override { return radial_.alpha(); }
  const SlowlyVarying& ell() const override { return radial_.ell(); }
  std::vector<Atom> stable_atoms() const override { return sigma_.atoms(); }
  bool symmetric() const override { return sigma_.symmetric(); }
  std::string describe() const override;
  void sample(Rng& rng, std::span<double> out) const override;
  std::vector<double> mean() const override;
  cplx psi_minus_one(std::span<const double> s) const override;
  void psi_gradient(std::span<const double> s, std::span<cplx> out) const override;
  double cube_probability(std::span<const double> center, double h) const override;
  bool atomless() const override { return true; }
  double cube_probability_beyond(std::span<const double> center, double h, double radius) const override;
  bool axis_separable() const override { return axis_aligned_; }
  cplx axis_part(int j, double t) const override;

 private:
  SpectralMeasure sigma_;
  bool axis_aligned_ = false;
  ScalarTailSpec radial_;
  std::vector<double> cumulative_;

  // radial range (lo, hi] of the ray through an atom inside the cube; false if empty
  bool ray_range(const Atom& a, std::span<const double> center, double h, double& lo, double& hi) const;
};

std::vector<double> sample_multivariate(const MultiTailSpec& spec, double u1, double u2);

/// Integer-valued law: X = span * floor(Y) with probability p, -span * floor(Y)
/// with probability q, and 0 otherwise, where P(Y > y) = y^-alpha on [1, inf).
/// Hence P(X >= span k) = p k^-alpha exactly for k >= 1.
class LatticeSpec final : public Law {
 public:
  LatticeSpec(double alpha, double p, double q, int span = 1);

  double p() const { return p_; }
  double q() const { return q_; }
  int span() const { return span_; }
  double pmf(long k) const;          // P(X = k)
  double upper_tail(long k) const;   // P(X >= k), k >= 1

  int dim() const override { return 1; }
  double alpha() const override { return alpha_; }
  const SlowlyVarying& ell() const override { return ell_; }
  std::vector<Atom> stable_atoms() const override;
  bool lattice() const override { return true; }
  bool symmetric() const override { return p_ == q_; }
  std::string describe() const override;
  void sample(Rng& rng, std::span<double> out) const override;
  std::vector<double> mean() const override;
  cplx psi_minus_one(std::span<const double> s) const override;
  void psi_gradient(std::span<const double> s, std::span<cplx> out) const override;
  double cube_probability(std::span<const double> center, double h) const override;

  double draw(double u) const;  // exact integer value, stored as double
  /// P(X in (a, b]) summed over lattice points.
  double interval_probability(double a, double b) const;

 private:
  cplx unit_minus_one(double t) const;  // phi(t) - 1 for the one-sided law of floor(Y)
  cplx unit_derivative(double t) const;

  double alpha_, p_, q_;
  int span_;
  SlowlyVarying ell_;
  UnitPolylog li_;
  std::unique_ptr<UnitPolylog> li_lower_;
};

/// Jointly lattice and nonlattice law: X = L + B U with L a LatticeSpec,
/// B ~ Bernoulli(w) and U uniform on (-1/2, 1/2), all independent.
class MixedSpec final : public Law {
 public:
  MixedSpec(LatticeSpec lattice, double weight);

  const LatticeSpec& lattice_part() const { return lattice_; }
  double weight() const { return weight_; }

  int dim() const override { return 1; }
  double alpha() const override { return lattice_.alpha(); }
  const SlowlyVarying& ell() const override { return lattice_.ell(); }
  std::vector<Atom> stable_atoms() const override { return lattice_.stable_atoms(); }
  bool symmetric() const override { return lattice_.symmetric(); }
  std::string describe() const override;
  void sample(Rng& rng, std::span<double> out) const override;
  std::vector<double> mean() const override { return lattice_.mean(); }
  cplx psi_minus_one(std::span<const double> s) const override;
  void psi_gradient(std::span<const double> s, std::span<cplx> out) const override;
  double cube_probability(std::span<const double> center, double h) const override;

 private:
  LatticeSpec lattice_;
  double weight_;
};

/// b_n: zero for alpha < 1 and n E X for alpha > 1.
std::vector<double> compute_b_n(const Law& law, long n);

}  // namespace lld
