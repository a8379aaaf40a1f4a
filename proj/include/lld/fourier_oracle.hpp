#pragma once

#include <span>
#include <vector>

#include "lld/charfn.hpp"
#include "lld/smoothing.hpp"

namespace lld {

struct OracleOptions {
  double cutoff = 1e-17;     // |Psi|^n below this (relative) is treated as zero
  int min_nodes_1d = 1024;
  int min_nodes_2d = 256;    // per dimension
  int per_panel = 16;        // Gauss-Legendre nodes per sub-panel
  double node_scale = 1.0;   // multiplies the number of sub-panels (refinement studies)
  double imag_tol = 1e-6;
};

struct QuadNode {
  double s;
  double w;
};

/// Composite Gauss-Legendre nodes on [-S, S]: panels graded geometrically
/// towards 0 (where Psi^n has its |s|^alpha cusp), cut into sub-panels no
/// longer than one period of e^{-isx}, mirrored to the negative side.
std::vector<QuadNode> oracle_axis_nodes(double S, double abs_x, int min_nodes, int per_panel,
                                        double node_scale);

/// Fourier upper bound I_{n,x} = int e^{-is.(x+b)} r(s) Psi(s)^n ds for all x of
/// a sweep at one n. In d = 1 the integrand is tabulated once on nodes fine
/// enough for the largest |x|; in d = 2 nodes are rebuilt per x, adapted to
/// each |x_j|, and the table of Psi^n on them is shared between queries with
/// the same node counts.
class FourierOracle {
 public:
  FourierOracle(const CharFnModel& model, const SmoothingKernel& kernel, long n,
                std::vector<double> shift, double max_abs_x, OracleOptions opt = {});

  struct Value {
    double re = 0.0;
    double im = 0.0;
    std::size_t nodes = 0;
  };
  /// Raises NumericalError when |Im| exceeds the tolerance (resolution problem).
  Value evaluate(std::span<const double> x) const;
  /// Effective half-width of the integration box in each dimension.
  const std::vector<double>& support() const { return support_; }

 private:
  const CharFnModel& model_;
  const SmoothingKernel& kernel_;
  long n_;
  std::vector<double> shift_;
  OracleOptions opt_;
  std::vector<double> support_;
  std::vector<QuadNode> nodes_1d_;
  std::vector<cplx> values_1d_;

  // Psi^n on the product of two axis node sets
  class PowerRows {
   public:
    PowerRows(const FourierOracle& o, const std::vector<QuadNode>& ax, const std::vector<QuadNode>& ay);
    cplx operator()(std::size_t a, std::size_t b) const;

   private:
    const FourierOracle& o_;
    const std::vector<QuadNode>& ax_;
    const std::vector<QuadNode>& ay_;
    bool separable_;
    std::vector<cplx> ux_, uy_;
  };
};

double fourier_bound(const CharFnModel& model, const SmoothingKernel& kernel, long n,
                     std::span<const double> x, OracleOptions opt = {});

struct OracleVerdict {
  bool pass = false;
  double margin = 0.0;  // bound - lower confidence limit
};

/// The Fourier bound majorises the cube probability, so the lower confidence
/// limit of any Monte Carlo estimate must not exceed it.
OracleVerdict bound_vs_mc(double bound, double ci_lo);

}  // namespace lld
