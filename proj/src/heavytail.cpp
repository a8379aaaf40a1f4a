#include "lld/heavytail.hpp"

#include <algorithm>
#include <boost/math/special_functions/zeta.hpp>
#include <cmath>
#include <limits>
#include <sstream>

#include "lld/quadrature.hpp"

namespace lld {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// Wraps t into (-pi, pi].
double wrap_angle(double t) {
  double r = std::remainder(t, 2.0 * kPi);
  if (r <= -kPi) r += 2.0 * kPi;
  return r;
}

// Golden-section minimisation of f on [a, b].
template <class F>
double golden_min(F&& f, double a, double b, int iters = 80) {
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - g * (b - a), d = a + g * (b - a);
  double fc = f(c), fd = f(d);
  for (int i = 0; i < iters; ++i) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - g * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + g * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

std::string fmt_double(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

}  // namespace

// ---------------------------------------------------------------------------
// Spectral measures

SpectralMeasure::SpectralMeasure(std::vector<Atom> atoms) : atoms_(std::move(atoms)) {
  if (atoms_.empty()) throw DomainError("spectral measure needs at least one atom");
  dim_ = static_cast<int>(atoms_.front().direction.size());
  if (dim_ < 1) throw DomainError("spectral measure atoms must have dimension >= 1");
  double total = 0.0;
  for (const auto& a : atoms_) {
    if (static_cast<int>(a.direction.size()) != dim_)
      throw DomainError("spectral measure atoms have inconsistent dimensions");
    if (!(a.weight > 0.0)) throw DomainError("spectral measure weights must be positive");
    const double norm = std::sqrt(dot(a.direction, a.direction));
    if (std::abs(norm - 1.0) > 1e-12) throw DomainError("spectral measure atom is not a unit vector");
    total += a.weight;
  }
  if (std::abs(total - 1.0) > 1e-12) throw DomainError("spectral measure weights must sum to 1");
}

double SpectralMeasure::moment(std::span<const double> u, double alpha) const {
  double s = 0.0;
  for (const auto& a : atoms_) s += a.weight * std::pow(std::abs(dot(u, a.direction)), alpha);
  return s;
}

bool SpectralMeasure::symmetric() const {
  for (const auto& a : atoms_) {
    bool found = false;
    for (const auto& b : atoms_) {
      bool opposite = std::abs(a.weight - b.weight) < 1e-12;
      for (int j = 0; j < dim_ && opposite; ++j)
        opposite = std::abs(a.direction[j] + b.direction[j]) < 1e-12;
      if (opposite) {
        found = true;
        break;
      }
    }
    if (!found) return false;
  }
  return true;
}

NondegeneracyReport nondegeneracy_check(const SpectralMeasure& sigma, double alpha) {
  const int d = sigma.dim();
  NondegeneracyReport rep;
  rep.minimum = std::numeric_limits<double>::infinity();
  if (d == 1) {
    for (double sgn : {1.0, -1.0}) {
      const std::vector<double> u{sgn};
      const double v = sigma.moment(u, alpha);
      if (v < rep.minimum) {
        rep.minimum = v;
        rep.witness = u;
      }
    }
    return rep;
  }
  if (d == 2) {
    const int grid = 20000;
    auto f = [&](double phi) {
      const double u[2] = {std::cos(phi), std::sin(phi)};
      return sigma.moment(u, alpha);
    };
    double best_phi = 0.0;
    for (int k = 0; k < grid; ++k) {
      const double phi = 2.0 * kPi * k / grid;
      const double v = f(phi);
      if (v < rep.minimum) {
        rep.minimum = v;
        best_phi = phi;
      }
    }
    const double step = 2.0 * kPi / grid;
    const double phi = golden_min(f, best_phi - step, best_phi + step);
    if (f(phi) < rep.minimum) {
      rep.minimum = f(phi);
      best_phi = phi;
    }
    rep.witness = {std::cos(best_phi), std::sin(best_phi)};
    return rep;
  }
  if (d == 3) {
    // Fibonacci lattice, then coordinate-wise golden refinement in (polar, azimuth).
    const int grid = 20000;
    auto to_vec = [](double th, double ph) {
      return std::vector<double>{std::sin(th) * std::cos(ph), std::sin(th) * std::sin(ph),
                                 std::cos(th)};
    };
    auto f = [&](double th, double ph) { return sigma.moment(to_vec(th, ph), alpha); };
    double bt = 0.0, bp = 0.0;
    const double golden_angle = kPi * (3.0 - std::sqrt(5.0));
    for (int k = 0; k < grid; ++k) {
      const double z = 1.0 - 2.0 * (k + 0.5) / grid;
      const double th = std::acos(z);
      const double ph = golden_angle * k;
      const double v = f(th, ph);
      if (v < rep.minimum) {
        rep.minimum = v;
        bt = th;
        bp = ph;
      }
    }
    double step = std::sqrt(4.0 * kPi / grid);
    for (int sweep = 0; sweep < 6; ++sweep) {
      bt = golden_min([&](double th) { return f(th, bp); }, bt - step, bt + step);
      bp = golden_min([&](double ph) { return f(bt, ph); }, bp - step, bp + step);
      step *= 0.5;
    }
    rep.minimum = std::min(rep.minimum, f(bt, bp));
    rep.witness = to_vec(bt, bp);
    return rep;
  }
  throw DomainError("nondegeneracy check supports d <= 3");
}

double Law::cube_probability_beyond(std::span<const double>, double, double) const {
  throw DomainError(describe() + " has atoms; the maximum-conditioned estimator does not apply");
}

// ---------------------------------------------------------------------------
// Scalar law

ScalarTailSpec::ScalarTailSpec(double alpha, double p, double q, const SlowlyVarying& ell)
    : alpha_(alpha), p_(p), q_(q), ell_(ell), tail1_(ell(1.0)), tf_(alpha, ell) {
  require_supported_alpha(alpha);
  if (!(p >= 0.0 && q >= 0.0 && p + q > 0.0)) throw DomainError("tail weights need p, q >= 0 and p + q > 0");
  if ((p + q) * tail1_ > 1.0 + 1e-15)
    throw DomainError("tail weights exceed total probability: (p+q) T(1) > 1");
  body_ = std::max(0.0, 1.0 - (p + q) * tail1_);
  double prev = std::log(tail1_);
  for (double lx = 0.25; lx < std::min(690.0, 600.0 / alpha); lx += 0.25) {  // T stays above underflow
    const double cur = std::log(tail(std::exp(lx)));
    if (!(cur < prev)) throw DomainError("tail T(x) = l(x) x^-alpha is not strictly decreasing");
    prev = cur;
  }
}

double ScalarTailSpec::tail(double x) const { return ell_(x) * std::pow(x, -alpha_); }

double ScalarTailSpec::tail_inverse(double w) const {
  if (!(w > 0.0 && w <= tail1_ * (1.0 + 1e-15))) throw DomainError("tail level outside (0, T(1)]");
  if (ell_.beta() == 0.0) return std::max(1.0, std::pow(ell_.c() / w, 1.0 / alpha_));
  double lo = 0.0, hi = 1.0;
  const double target = std::log(w);
  auto g = [&](double lx) { return std::log(ell_(std::exp(lx))) - alpha_ * lx - target; };
  while (g(hi) > 0.0) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1400.0) throw NumericalError("tail inverse out of range");
  }
  for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, hi); ++it) {
    const double mid = 0.5 * (lo + hi);
    (g(mid) > 0.0 ? lo : hi) = mid;
  }
  return std::exp(0.5 * (lo + hi));
}

double ScalarTailSpec::cdf(double x) const {
  if (x <= -1.0) return q_ * tail(-x);
  if (x < 1.0) return q_ * tail1_ + body_ * 0.5 * (x + 1.0);
  return 1.0 - p_ * tail(x);
}

double ScalarTailSpec::quantile(double u) const {
  const double left = q_ * tail1_;
  if (u < left) return -tail_inverse(u / q_);
  if (u < left + body_ || p_ == 0.0) return std::min(1.0, -1.0 + 2.0 * (u - left) / body_);
  const double w = (1.0 - u) / p_;
  return tail_inverse(std::min(w, tail1_));
}

double sample_scalar(const ScalarTailSpec& spec, double u) {
  if (!(u > 0.0 && u < 1.0)) throw DomainError("uniform variate must lie in (0,1)");
  return spec.quantile(u);
}

std::vector<Atom> ScalarTailSpec::stable_atoms() const {
  std::vector<Atom> out;
  if (p_ > 0.0) out.push_back({{1.0}, p_});
  if (q_ > 0.0) out.push_back({{-1.0}, q_});
  return out;
}

std::string ScalarTailSpec::describe() const {
  return "scalar(alpha=" + fmt_double(alpha_) + ", p=" + fmt_double(p_) + ", q=" + fmt_double(q_) +
         ", c=" + fmt_double(ell_.c()) + ", beta=" + fmt_double(ell_.beta()) + ")";
}

void ScalarTailSpec::sample(Rng& rng, std::span<double> out) const { out[0] = quantile(rng.uniform()); }

std::vector<double> ScalarTailSpec::mean() const {
  if (!(alpha_ > 1.0)) throw DomainError("E X is infinite for alpha < 1");
  double tail_int;
  if (ell_.beta() == 0.0)
    tail_int = ell_.c() / (alpha_ - 1.0);
  else
    tail_int = quad::adaptive_to_infinity([this](double x) { return tail(x); }, 1.0, 1e-11);
  return {(p_ - q_) * (tail1_ + tail_int)};
}

cplx ScalarTailSpec::psi_minus_one(double s) const {
  const cplx jm = tf_.value_minus_mass(s);
  return body_ * (sinc(s) - 1.0) + p_ * jm + q_ * std::conj(jm);
}

cplx ScalarTailSpec::psi_derivative(double s) const {
  const cplx dj = tf_.derivative(s);
  return body_ * sinc_derivative(s) + p_ * dj + q_ * std::conj(dj);
}

cplx ScalarTailSpec::psi_minus_one(std::span<const double> s) const { return psi_minus_one(s[0]); }

void ScalarTailSpec::psi_gradient(std::span<const double> s, std::span<cplx> out) const {
  out[0] = psi_derivative(s[0]);
}

double ScalarTailSpec::interval_probability(double a, double b) const {
  if (!(b > a)) return 0.0;
  auto upper = [&](double x) { return std::isinf(x) ? 0.0 : tail(x); };  // P(X > x), x >= 1
  if (a >= 1.0) return p_ * (tail(a) - upper(b));
  if (b <= -1.0) return q_ * (tail(-b) - upper(-a));
  const double fb = std::isinf(b) ? 1.0 : cdf(b);
  const double fa = std::isinf(a) ? 0.0 : cdf(a);
  return fb - fa;
}

double ScalarTailSpec::interval_probability_beyond(double a, double b, double radius) const {
  const double r = std::max(radius, 0.0);
  return interval_probability(std::max(a, r), b) + interval_probability(a, std::min(b, -r));
}

double ScalarTailSpec::cube_probability(std::span<const double> center, double h) const {
  return interval_probability(center[0] - h, center[0] + h);
}

double ScalarTailSpec::cube_probability_beyond(std::span<const double> center, double h, double radius) const {
  return interval_probability_beyond(center[0] - h, center[0] + h, radius);
}

// ---------------------------------------------------------------------------
// Multivariate law

MultiTailSpec::MultiTailSpec(double alpha, const SpectralMeasure& sigma, const SlowlyVarying& ell)
    : sigma_(sigma), radial_(alpha, 1.0, 0.0, ell) {
  const auto rep = nondegeneracy_check(sigma_, alpha);
  if (rep.degenerate()) {
    std::ostringstream os;
    os << "spectral measure is degenerate: min_u int |u.theta|^alpha dsigma = " << rep.minimum;
    throw DomainError(os.str());
  }
  double acc = 0.0;
  for (const auto& a : sigma_.atoms()) {
    acc += a.weight;
    cumulative_.push_back(acc);
  }
  cumulative_.back() = 1.0;
  axis_aligned_ = std::all_of(sigma_.atoms().begin(), sigma_.atoms().end(), [](const Atom& a) {
    return std::count_if(a.direction.begin(), a.direction.end(), [](double v) { return v != 0.0; }) == 1;
  });
}

cplx MultiTailSpec::axis_part(int j, double t) const {
  if (!axis_aligned_) return Law::axis_part(j, t);
  cplx acc = 0.0;
  for (const auto& a : sigma_.atoms())
    if (a.direction[j] != 0.0) acc += a.weight * radial_.psi_minus_one(t * a.direction[j]);
  return acc;
}

cplx Law::axis_part(int j, double t) const {
  if (dim() != 1 || j != 0) throw DomainError("axis_part: law is not axis-separable");
  const double s = t;
  return psi_minus_one(std::span<const double>(&s, 1));
}

std::vector<double> MultiTailSpec::draw(double u1, double u2) const {
  const double r = radial_.quantile(u1);
  const auto idx = static_cast<std::size_t>(
      std::upper_bound(cumulative_.begin(), cumulative_.end(), u2) - cumulative_.begin());
  const auto& theta = sigma_.atoms()[std::min(idx, cumulative_.size() - 1)].direction;
  std::vector<double> x(theta.size());
  for (std::size_t j = 0; j < theta.size(); ++j) x[j] = r * theta[j];
  return x;
}

std::vector<double> sample_multivariate(const MultiTailSpec& spec, double u1, double u2) {
  return spec.draw(u1, u2);
}

std::string MultiTailSpec::describe() const {
  return "multivariate(d=" + std::to_string(dim()) + ", alpha=" + fmt_double(alpha()) +
         ", atoms=" + std::to_string(sigma_.atoms().size()) + ")";
}

void MultiTailSpec::sample(Rng& rng, std::span<double> out) const {
  const double u1 = rng.uniform();
  const double u2 = rng.uniform();
  const double r = radial_.quantile(u1);
  const auto idx = static_cast<std::size_t>(
      std::upper_bound(cumulative_.begin(), cumulative_.end(), u2) - cumulative_.begin());
  const auto& theta = sigma_.atoms()[std::min(idx, cumulative_.size() - 1)].direction;
  for (std::size_t j = 0; j < theta.size(); ++j) out[j] = r * theta[j];
}

std::vector<double> MultiTailSpec::mean() const {
  const double er = radial_.mean()[0];
  std::vector<double> m(dim(), 0.0);
  for (const auto& a : sigma_.atoms())
    for (int j = 0; j < dim(); ++j) m[j] += er * a.weight * a.direction[j];
  return m;
}

cplx MultiTailSpec::psi_minus_one(std::span<const double> s) const {
  cplx acc = 0.0;
  for (const auto& a : sigma_.atoms()) acc += a.weight * radial_.psi_minus_one(dot(s, a.direction));
  return acc;
}

void MultiTailSpec::psi_gradient(std::span<const double> s, std::span<cplx> out) const {
  std::fill(out.begin(), out.end(), cplx(0.0));
  for (const auto& a : sigma_.atoms()) {
    const cplx d = a.weight * radial_.psi_derivative(dot(s, a.direction));
    for (int j = 0; j < dim(); ++j) out[j] += d * a.direction[j];
  }
}

bool MultiTailSpec::ray_range(const Atom& a, std::span<const double> center, double h, double& lo,
                              double& hi) const {
  lo = -std::numeric_limits<double>::infinity();
  hi = std::numeric_limits<double>::infinity();
  for (int j = 0; j < dim(); ++j) {
    const double th = a.direction[j];
    const double c0 = center[j] - h, c1 = center[j] + h;
    if (std::abs(th) < 1e-15) {
      if (!(c0 < 0.0 && 0.0 <= c1)) return false;
      continue;
    }
    double r0 = c0 / th, r1 = c1 / th;
    if (th < 0.0) std::swap(r0, r1);
    lo = std::max(lo, r0);
    hi = std::min(hi, r1);
  }
  return hi > lo;
}

double MultiTailSpec::cube_probability(std::span<const double> center, double h) const {
  double total = 0.0, lo, hi;
  for (const auto& a : sigma_.atoms())
    if (ray_range(a, center, h, lo, hi)) total += a.weight * radial_.interval_probability(lo, hi);
  return total;
}

double MultiTailSpec::cube_probability_beyond(std::span<const double> center, double h, double radius) const {
  double total = 0.0, lo, hi;
  for (const auto& a : sigma_.atoms())
    if (ray_range(a, center, h, lo, hi)) total += a.weight * radial_.interval_probability_beyond(lo, hi, radius);
  return total;
}

// ---------------------------------------------------------------------------
// Lattice law

LatticeSpec::LatticeSpec(double alpha, double p, double q, int span)
    : alpha_(alpha), p_(p), q_(q), span_(span), ell_(SlowlyVarying::constant(std::pow(span, alpha))),
      li_(alpha) {
  require_supported_alpha(alpha);
  if (!(p >= 0.0 && q >= 0.0 && p + q > 0.0 && p + q <= 1.0))
    throw DomainError("lattice tail weights need p, q >= 0 and 0 < p + q <= 1");
  if (span < 1) throw DomainError("lattice span must be a positive integer");
  if (alpha > 1.0) li_lower_ = std::make_unique<UnitPolylog>(alpha - 1.0);
}

double LatticeSpec::pmf(long k) const {
  if (k == 0) return 1.0 - p_ - q_;
  if (k % span_ != 0) return 0.0;
  const double j = static_cast<double>(std::labs(k) / span_);
  const double mass = std::pow(j, -alpha_) - std::pow(j + 1.0, -alpha_);
  return (k > 0 ? p_ : q_) * mass;
}

double LatticeSpec::upper_tail(long k) const {
  if (k < 1) throw DomainError("upper tail defined for k >= 1");
  const double j = std::ceil(static_cast<double>(k) / span_);
  return p_ * std::pow(j, -alpha_);
}

std::vector<Atom> LatticeSpec::stable_atoms() const {
  std::vector<Atom> out;
  if (p_ > 0.0) out.push_back({{1.0}, p_});
  if (q_ > 0.0) out.push_back({{-1.0}, q_});
  return out;
}

std::string LatticeSpec::describe() const {
  return "lattice(alpha=" + fmt_double(alpha_) + ", p=" + fmt_double(p_) + ", q=" + fmt_double(q_) +
         ", span=" + std::to_string(span_) + ")";
}

double LatticeSpec::draw(double u) const {
  if (u < q_) return -span_ * std::floor(std::pow(u / q_, -1.0 / alpha_));
  if (u < 1.0 - p_) return 0.0;
  return span_ * std::floor(std::pow((1.0 - u) / p_, -1.0 / alpha_));
}

void LatticeSpec::sample(Rng& rng, std::span<double> out) const { out[0] = draw(rng.uniform()); }

std::vector<double> LatticeSpec::mean() const {
  if (!(alpha_ > 1.0)) throw DomainError("E X is infinite for alpha < 1");
  return {(p_ - q_) * span_ * boost::math::zeta(alpha_)};
}

cplx LatticeSpec::unit_minus_one(double t) const {
  if (t == 0.0) return 0.0;
  // E z^{floor Y} = 1 + Li_alpha(z)(1 - 1/z), z = e^{it}
  return li_(t) * (1.0 - std::exp(cplx(0.0, -t)));
}

cplx LatticeSpec::unit_derivative(double t) const {
  if (t == 0.0) return cplx(0.0, boost::math::zeta(alpha_));
  const cplx em = std::exp(cplx(0.0, -t));
  return cplx(0.0, 1.0) * ((*li_lower_)(t) * (1.0 - em) + li_(t) * em);
}

cplx LatticeSpec::psi_minus_one(std::span<const double> s) const {
  const double t = wrap_angle(span_ * s[0]);
  const cplx u = unit_minus_one(t);
  return p_ * u + q_ * std::conj(u);
}

void LatticeSpec::psi_gradient(std::span<const double> s, std::span<cplx> out) const {
  if (!li_lower_) throw DomainError("lattice characteristic-function derivative needs alpha > 1");
  const double t = wrap_angle(span_ * s[0]);
  const cplx d = unit_derivative(t);
  out[0] = static_cast<double>(span_) * (p_ * d + q_ * std::conj(d));
}

double LatticeSpec::interval_probability(double a, double b) const {
  if (!(b > a)) return 0.0;
  // Differences of upper tails avoid cancellation on the right half-line.
  auto survive = [&](double x) -> double {  // P(X > x)
    if (x >= 0.0) return p_ * std::pow(std::ceil((std::floor(x) + 1.0) / span_), -alpha_);
    const double m = -std::floor(x);  // X <= x  <=>  X <= -m
    return 1.0 - q_ * std::pow(std::ceil(m / span_), -alpha_);
  };
  auto below = [&](double x) -> double {  // P(X <= x)
    if (x < 0.0) return q_ * std::pow(std::ceil(-std::floor(x) / span_), -alpha_);
    return 1.0 - p_ * std::pow(std::ceil((std::floor(x) + 1.0) / span_), -alpha_);
  };
  if (a >= 0.0) return survive(a) - survive(b);
  return below(b) - below(a);
}

double LatticeSpec::cube_probability(std::span<const double> center, double h) const {
  return interval_probability(center[0] - h, center[0] + h);
}

// ---------------------------------------------------------------------------
// Mixed law

MixedSpec::MixedSpec(LatticeSpec lattice, double weight)
    : lattice_(std::move(lattice)), weight_(weight) {
  if (!(weight >= 0.0 && weight <= 1.0)) throw DomainError("mixing weight must lie in [0,1]");
}

std::string MixedSpec::describe() const {
  return "mixed(" + lattice_.describe() + ", w=" + fmt_double(weight_) + ")";
}

void MixedSpec::sample(Rng& rng, std::span<double> out) const {
  lattice_.sample(rng, out);
  const double b = rng.uniform();
  const double u = rng.uniform();
  if (b < weight_) out[0] += u - 0.5;
}

cplx MixedSpec::psi_minus_one(std::span<const double> s) const {
  const double m = 1.0 - weight_ + weight_ * sinc(0.5 * s[0]);
  const cplx l = lattice_.psi_minus_one(s);
  return l * m + (m - 1.0);
}

void MixedSpec::psi_gradient(std::span<const double> s, std::span<cplx> out) const {
  const double m = 1.0 - weight_ + weight_ * sinc(0.5 * s[0]);
  const double dm = 0.5 * weight_ * sinc_derivative(0.5 * s[0]);
  cplx dl;
  lattice_.psi_gradient(s, std::span<cplx>(&dl, 1));
  out[0] = dl * m + lattice_.psi(s) * dm;
}

double MixedSpec::cube_probability(std::span<const double> center, double h) const {
  const double a = center[0] - h, b = center[0] + h;
  double smooth = 0.0;
  const long span = lattice_.span();
  // Lattice points k with (a - k, b - k] meeting (-1/2, 1/2].
  const long k0 = static_cast<long>(std::floor((a - 0.5) / span)) * span;
  for (long k = k0; static_cast<double>(k) < b + 0.5 + span; k += span) {
    const double lo = std::max(a - k, -0.5), hi = std::min(b - k, 0.5);
    if (hi > lo) smooth += lattice_.pmf(k) * (hi - lo);
  }
  return (1.0 - weight_) * lattice_.interval_probability(a, b) + weight_ * smooth;
}

// ---------------------------------------------------------------------------

std::vector<double> compute_b_n(const Law& law, long n) {
  require_supported_alpha(law.alpha());
  if (law.alpha() < 1.0) return std::vector<double>(law.dim(), 0.0);
  auto m = law.mean();
  for (auto& v : m) v *= static_cast<double>(n);
  return m;
}

}  // namespace lld
