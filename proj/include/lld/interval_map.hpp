#pragma once

#include <string>
#include <vector>

namespace lld {

enum class MapKind { gauss, doubling, afu };

/// Monotone branch of a piecewise expanding map, f(z) = slope * z - shift on
/// [lo, hi) for the linear kinds; Gauss branches are described by their index.
struct Branch {
  double lo = 0.0;
  double hi = 0.0;
  double image_lo = 0.0;
  double image_hi = 1.0;
};

/// Interval maps of [0, 1]:
///   gauss     f(z) = 1/z - floor(1/z), countably many full branches (1/(k+1), 1/k]
///   doubling  f(z) = 2z mod 1
///   afu       f(z) = 2.5 z mod 1 with branches [0, .4), [.4, .8), [.8, 1) and
///             images [0, 1), [0, 1), [0, .5): finitely many images, not Markov.
class IntervalMap {
 public:
  static IntervalMap gauss();
  static IntervalMap doubling();
  static IntervalMap afu();
  static IntervalMap by_name(const std::string& name);

  MapKind kind() const { return kind_; }
  const std::string& name() const { return name_; }
  /// Slope of the linear kinds (2 or 2.5); 0 for gauss.
  double slope() const { return slope_; }

  double apply(double z) const;
  long double apply(long double z) const;

  /// Branches of the linear kinds; for gauss the first `count` branches.
  std::vector<Branch> branches(int count = 0) const;
  /// Distinct images of the branches (finite for every kind).
  std::vector<Branch> image_set() const;

  /// inf |f'| over branch interiors for f and for its second iterate.
  double expansion() const;
  double expansion_second_iterate() const;
  /// sup |f''| / (f')^2 estimated on a grid.
  double adler() const;

  /// Absolutely continuous invariant density (closed form for all three kinds;
  /// the Parry density for afu).
  double invariant_density(double z) const;
  double invariant_cdf(double z) const;

  /// Preimages of y with their conditional probabilities under the invariant
  /// measure given f(z) = y (finite kinds only).
  struct Preimage {
    double z;
    double weight;
  };
  std::vector<Preimage> preimages(double y) const;

 private:
  IntervalMap(MapKind kind, std::string name, double slope);
  void build_parry();

  MapKind kind_;
  std::string name_;
  double slope_;
  // afu: breakpoints T^k(1) sorted ascending with the density value to their left
  std::vector<double> parry_breaks_;
  std::vector<double> parry_values_;
  std::vector<double> parry_cdf_;
  double parry_norm_ = 1.0;
};

/// n iterates z, f z, ..., f^{n-1} z. The Gauss map is iterated in extended
/// precision. An iterate landing exactly on 0 is moved to the smallest normal double and counted
/// in `perturbed`.
std::vector<double> orbit(const IntervalMap& map, double z0, long n, long* perturbed = nullptr);

}  // namespace lld
