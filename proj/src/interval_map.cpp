#include "lld/interval_map.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "lld/common.hpp"

namespace lld {

namespace {
constexpr int kParryTerms = 60;  // 2.5^-60 ~ 1e-24
}

IntervalMap::IntervalMap(MapKind kind, std::string name, double slope)
    : kind_(kind), name_(std::move(name)), slope_(slope) {}

IntervalMap IntervalMap::gauss() { return {MapKind::gauss, "gauss", 0.0}; }
IntervalMap IntervalMap::doubling() { return {MapKind::doubling, "doubling", 2.0}; }
IntervalMap IntervalMap::afu() {
  IntervalMap m{MapKind::afu, "afu", 2.5};
  m.build_parry();
  return m;
}

IntervalMap IntervalMap::by_name(const std::string& name) {
  if (name == "gauss") return gauss();
  if (name == "doubling") return doubling();
  if (name == "afu") return afu();
  throw DomainError("unknown interval map '" + name + "' (expected gauss, doubling or afu)");
}

void IntervalMap::build_parry() {
  // T^k(1) = m / 2^k exactly: T(m / 2^k) = (5m mod 2^(k+1)) / 2^(k+1).
  std::vector<double> orbit_of_one;
  unsigned __int128 m = 1;
  for (int k = 0; k < kParryTerms; ++k) {
    orbit_of_one.push_back(std::ldexp(static_cast<double>(m), -k));
    const unsigned __int128 mod = static_cast<unsigned __int128>(1) << (k + 1);
    m = (5 * m) % mod;
  }
  parry_norm_ = 0.0;
  for (int k = 0; k < kParryTerms; ++k) parry_norm_ += std::pow(slope_, -k) * orbit_of_one[k];
  std::vector<int> order(kParryTerms);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) { return orbit_of_one[a] < orbit_of_one[b]; });
  // On [t_(i-1), t_(i)) the density is the sum of beta^-k over all k with t_k > z.
  double suffix = 0.0;
  std::vector<double> values(kParryTerms);
  for (int i = kParryTerms - 1; i >= 0; --i) {
    suffix += std::pow(slope_, -order[i]);
    values[i] = suffix / parry_norm_;
  }
  parry_breaks_.clear();
  parry_values_.clear();
  parry_cdf_.clear();
  double prev = 0.0, cdf = 0.0;
  for (int i = 0; i < kParryTerms; ++i) {
    const double t = orbit_of_one[order[i]];
    cdf += values[i] * (t - prev);
    parry_breaks_.push_back(t);
    parry_values_.push_back(values[i]);
    parry_cdf_.push_back(cdf);
    prev = t;
  }
}

double IntervalMap::apply(double z) const {
  switch (kind_) {
    case MapKind::gauss: {
      const double r = 1.0 / z;
      return r - std::floor(r);
    }
    case MapKind::doubling:
    case MapKind::afu: {
      const double y = slope_ * z;
      return y - std::floor(y);
    }
  }
  return 0.0;
}

long double IntervalMap::apply(long double z) const {
  if (kind_ != MapKind::gauss) return static_cast<long double>(apply(static_cast<double>(z)));
  const long double r = 1.0L / z;
  return r - std::floor(r);
}

std::vector<Branch> IntervalMap::branches(int count) const {
  std::vector<Branch> out;
  switch (kind_) {
    case MapKind::gauss:
      for (int k = 1; k <= std::max(count, 1); ++k) out.push_back({1.0 / (k + 1), 1.0 / k, 0.0, 1.0});
      break;
    case MapKind::doubling:
      out = {{0.0, 0.5, 0.0, 1.0}, {0.5, 1.0, 0.0, 1.0}};
      break;
    case MapKind::afu:
      out = {{0.0, 0.4, 0.0, 1.0}, {0.4, 0.8, 0.0, 1.0}, {0.8, 1.0, 0.0, 0.5}};
      break;
  }
  return out;
}

std::vector<Branch> IntervalMap::image_set() const {
  if (kind_ == MapKind::afu) return {{0.0, 0.0, 0.0, 1.0}, {0.0, 0.0, 0.0, 0.5}};
  return {{0.0, 0.0, 0.0, 1.0}};
}

double IntervalMap::expansion() const {
  if (kind_ != MapKind::gauss) return slope_;
  return 1.0;  // 1/z^2 -> 1 as z -> 1; the second iterate expands uniformly
}

double IntervalMap::expansion_second_iterate() const {
  if (kind_ != MapKind::gauss) return slope_ * slope_;
  double worst = std::numeric_limits<double>::infinity();
  for (int i = 1; i < 200000; ++i) {
    const double z = i / 200000.0;
    const double y = apply(z);
    if (y <= 1e-12) continue;
    worst = std::min(worst, 1.0 / (z * z * y * y));
  }
  return worst;
}

double IntervalMap::adler() const {
  if (kind_ != MapKind::gauss) return 0.0;
  double worst = 0.0;
  for (int i = 1; i <= 100000; ++i) worst = std::max(worst, 2.0 * (i / 100000.0));  // |f''|/f'^2 = 2z
  return worst;
}

double IntervalMap::invariant_density(double z) const {
  switch (kind_) {
    case MapKind::gauss: return 1.0 / ((1.0 + z) * std::log(2.0));
    case MapKind::doubling: return 1.0;
    case MapKind::afu: {
      const auto it = std::upper_bound(parry_breaks_.begin(), parry_breaks_.end(), z);
      if (it == parry_breaks_.end()) return 0.0;
      return parry_values_[static_cast<std::size_t>(it - parry_breaks_.begin())];
    }
  }
  return 0.0;
}

double IntervalMap::invariant_cdf(double z) const {
  z = std::clamp(z, 0.0, 1.0);
  switch (kind_) {
    case MapKind::gauss: return std::log1p(z) / std::log(2.0);
    case MapKind::doubling: return z;
    case MapKind::afu: {
      const auto it = std::upper_bound(parry_breaks_.begin(), parry_breaks_.end(), z);
      if (it == parry_breaks_.end()) return 1.0;
      const auto i = static_cast<std::size_t>(it - parry_breaks_.begin());
      const double left = i == 0 ? 0.0 : parry_breaks_[i - 1];
      const double base = i == 0 ? 0.0 : parry_cdf_[i - 1];
      return base + parry_values_[i] * (z - left);
    }
  }
  return 0.0;
}

std::vector<IntervalMap::Preimage> IntervalMap::preimages(double y) const {
  std::vector<Preimage> out;
  switch (kind_) {
    case MapKind::gauss:
      throw DomainError("gauss preimages are countable; use the telescoping form");
    case MapKind::doubling:
      out = {{0.5 * y, 0.5}, {0.5 * (y + 1.0), 0.5}};
      break;
    case MapKind::afu: {
      const double hy = invariant_density(y);
      for (int k = 0; k < 3; ++k) {
        if (k == 2 && y >= 0.5) break;
        const double z = (y + k) / slope_;
        out.push_back({z, invariant_density(z) / (slope_ * hy)});
      }
      break;
    }
  }
  return out;
}

std::vector<double> orbit(const IntervalMap& map, double z0, long n, long* perturbed) {
  if (!(z0 > 0.0 && z0 < 1.0)) throw DomainError("orbit start must lie in (0, 1)");
  if (n < 1) throw DomainError("orbit length must be at least 1");
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(n));
  long moved = 0;
  long double z = z0;
  for (long k = 0; k < n; ++k) {
    if (z <= 0.0L) {
      z = std::numeric_limits<double>::min();  // must survive the cast to double
      ++moved;
    }
    out.push_back(static_cast<double>(z));
    z = map.apply(z);
  }
  if (perturbed) *perturbed = moved;
  return out;
}

}  // namespace lld
