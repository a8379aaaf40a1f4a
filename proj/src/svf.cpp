#include "lld/svf.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "lld/common.hpp"
#include "lld/quadrature.hpp"

namespace lld {

namespace {
constexpr double kE = 2.71828182845904523536;
constexpr double kMaxW = 700.0;  // log(1+x) beyond which l~ is not tabulated
}  // namespace

SlowlyVarying::SlowlyVarying(double c, double beta) : c_(c), beta_(beta) {
  if (!(c > 0.0) || !std::isfinite(c) || !std::isfinite(beta))
    throw DomainError("slowly varying scale c must be positive and finite");
}

double SlowlyVarying::operator()(double x) const {
  if (beta_ == 0.0) return c_;
  return c_ * std::pow(std::log(kE + x), beta_);
}

double eval_ell(const SlowlyVarying& ell, double x) {
  if (!(x >= 0.0)) throw DomainError("slowly varying function evaluated at negative x");
  return ell(x);
}

EllTilde::EllTilde(const SlowlyVarying& ell, double alpha) : ell_(ell), alpha_(alpha) {
  require_supported_alpha(alpha);
  if (alpha_ < 2.0 || ell_.beta() == 0.0) return;
  const int nodes = static_cast<int>(kMaxW / step_) + 1;
  cumulative_.resize(nodes);
  cumulative_[0] = 0.0;
  auto integrand = [this](double w) { return ell_(std::exp(w)); };
  for (int k = 1; k < nodes; ++k)
    cumulative_[k] =
        cumulative_[k - 1] + quad::integrate_gl(integrand, (k - 1) * step_, k * step_, 12);
}

double EllTilde::integral_to(double w) const {
  if (ell_.beta() == 0.0) return ell_.c() * w;
  auto integrand = [this](double t) { return ell_(std::exp(t)); };
  if (w >= kMaxW) {
    return cumulative_.back() +
           quad::adaptive(integrand, (cumulative_.size() - 1) * step_, w, 1e-13);
  }
  const auto k = static_cast<std::size_t>(w / step_);
  const double w0 = k * step_;
  if (w == w0) return cumulative_[k];
  return cumulative_[k] + quad::integrate_gl(integrand, w0, w, 12);
}

double EllTilde::operator()(double x) const {
  if (!(x >= 0.0)) throw DomainError("l~ evaluated at negative x");
  if (alpha_ < 2.0) return ell_(x);
  return 1.0 + integral_to(std::log1p(x));
}

double eval_ell_tilde(const SlowlyVarying& ell, double alpha, double x) {
  return EllTilde(ell, alpha)(x);
}

double solve_norming(double alpha, const std::function<double(double)>& ell_tilde, double n,
                     double a_max) {
  if (!(n >= 1.0)) throw DomainError("norming index n must be >= 1");
  auto g = [&](double log_a) {
    const double a = std::exp(log_a);
    return alpha * log_a - std::log(ell_tilde(a)) - std::log(n);
  };
  double lo = std::log(1e-6);
  double hi = std::log(a_max);
  double glo = g(lo);
  const double ghi = g(hi);
  if (!(glo < 0.0))
    throw NumericalError("norming root lies below the search bracket (l is mis-specified)");
  if (!(ghi > 0.0))
    throw NumericalError("norming bracket exhausted at A_max: a^alpha/l~(a) never reaches n");
  for (int it = 0; it < 200 && hi - lo > 1e-16 * std::max(1.0, std::abs(hi)); ++it) {
    const double mid = 0.5 * (lo + hi);
    const double gm = g(mid);
    if (!std::isfinite(gm)) throw NumericalError("norming function not finite");
    if (gm < 0.0) {
      if (gm < glo - 1e-12) throw NumericalError("a^alpha/l~(a) is not monotone: invalid l family");
      lo = mid;
      glo = gm;
    } else {
      hi = mid;
    }
  }
  const double a = std::exp(0.5 * (lo + hi));
  const double resid = n * ell_tilde(a) / std::pow(a, alpha) - 1.0;
  if (std::abs(resid) > 1e-10) {
    std::ostringstream os;
    os << "norming residual " << resid << " exceeds 1e-10 at n=" << n;
    throw NumericalError(os.str());
  }
  return a;
}

NormingSeq::NormingSeq(double alpha, const SlowlyVarying& ell)
    : alpha_(alpha), ell_tilde_(ell, alpha) {
  // g(a) = a^alpha / l~(a) must be increasing on the bisection range.
  double prev = -std::numeric_limits<double>::infinity();
  for (double la = std::log(1e-6); la < std::log(1e300); la += 0.5) {
    const double a = std::exp(la);
    const double v = alpha_ * la - std::log(ell_tilde_(a));
    if (v <= prev) throw NumericalError("a^alpha/l~(a) is not monotone: invalid l family");
    prev = v;
  }
}

double NormingSeq::a(long n) const {
  if (n < 1) throw DomainError("a_n requires n >= 1");
  {
    std::lock_guard<std::mutex> lock(mu_);
    if (auto it = memo_.find(n); it != memo_.end()) return it->second;
  }
  const double v = solve_norming(alpha_, [this](double x) { return ell_tilde_(x); },
                                 static_cast<double>(n));
  std::lock_guard<std::mutex> lock(mu_);
  memo_.emplace(n, v);
  return v;
}

double NormingSeq::normalization_residual(long n) const {
  const double an = a(n);
  return static_cast<double>(n) * ell_tilde_(an) / std::pow(an, alpha_);
}

double compute_a_n(const NormingSeq& norm, long n) { return norm.a(n); }

double karamata_check(const SlowlyVarying& ell, double alpha, double K) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw DomainError("Karamata check: x^-alpha l(x) is not integrable at 0 unless alpha < 1");
  if (!(K >= 10.0)) throw DomainError("Karamata check requires K >= 10");
  // x = y^(1/(1-alpha)) turns x^-alpha dx into dy/(1-alpha); then y = Y * exp(-t).
  const double p = 1.0 / (1.0 - alpha);
  const double Y = std::pow(K, 1.0 - alpha);
  auto integrand = [&](double t) {
    const double y = Y * std::exp(-t);
    return ell(std::pow(y, p)) * y;
  };
  const double tmax = std::log(Y) + 40.0;
  double integral = 0.0;
  // Panels of unit length in t keep the fixed-order rule exact to rounding.
  for (double t = 0.0; t < tmax; t += 1.0)
    integral += quad::integrate_gl(integrand, t, std::min(t + 1.0, tmax), 20);
  const double numer = integral * p;
  const double denom = p * Y * ell(K);
  return numer / denom;
}

PotterReport potter_check(const SlowlyVarying& ell, double delta, double x_max,
                          int points_per_decade) {
  if (!(delta > 0.0)) throw DomainError("Potter exponent delta must be positive");
  const int count = static_cast<int>(std::log10(x_max) * points_per_decade) + 1;
  std::vector<double> xs(count), ls(count);
  for (int i = 0; i < count; ++i) {
    xs[i] = std::pow(10.0, static_cast<double>(i) / points_per_decade);
    ls[i] = ell(xs[i]);
  }
  PotterReport rep;
  rep.delta = delta;
  rep.constant = 1.0;
  rep.worst_x = rep.worst_y = 1.0;
  for (int i = 0; i < count; ++i) {
    for (int j = 0; j < count; ++j) {
      const double ratio = ls[j] / ls[i];
      const double bound = std::pow(std::max(xs[j] / xs[i], xs[i] / xs[j]), delta);
      const double c = ratio / bound;
      if (c > rep.constant) {
        rep.constant = c;
        rep.worst_x = xs[i];
        rep.worst_y = xs[j];
      }
    }
  }
  return rep;
}

}  // namespace lld
