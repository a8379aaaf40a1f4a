#include "lld/charfn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "lld/quadrature.hpp"

namespace lld {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// Unit directions covering the sphere: +-1 in d = 1, `count` angles in d = 2,
// a Fibonacci set in d = 3.
std::vector<std::vector<double>> sphere_directions(int d, int count) {
  std::vector<std::vector<double>> dirs;
  if (d == 1) return {{1.0}, {-1.0}};
  if (d == 2) {
    for (int k = 0; k < count; ++k) {
      const double phi = 2.0 * kPi * (k + 0.5) / count;
      dirs.push_back({std::cos(phi), std::sin(phi)});
    }
    return dirs;
  }
  const double golden_angle = kPi * (3.0 - std::sqrt(5.0));
  for (int k = 0; k < count; ++k) {
    const double z = 1.0 - 2.0 * (k + 0.5) / count;
    const double r = std::sqrt(1.0 - z * z);
    dirs.push_back({r * std::cos(golden_angle * k), r * std::sin(golden_angle * k), z});
  }
  return dirs;
}

double sup_norm(std::span<const double> u) {
  double m = 0.0;
  for (double v : u) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace

cplx log1p_complex(cplx w) {
  const double re = w.real(), im = w.imag();
  return {0.5 * std::log1p(2.0 * re + re * re + im * im), std::atan2(im, 1.0 + re)};
}

// ---------------------------------------------------------------------------

CharFnModel::CharFnModel(std::shared_ptr<const Law> law) : law_(std::move(law)), mode_(Mode::exact) {}

CharFnModel::CharFnModel(std::shared_ptr<const Law> law, std::size_t samples, std::uint64_t seed)
    : law_(std::move(law)), mode_(Mode::empirical) {
  const int d = law_->dim();
  sample_.resize(samples * d);
  Rng rng(seed, 0x5eed);
  for (std::size_t k = 0; k < samples; ++k)
    law_->sample(rng, std::span<double>(sample_.data() + k * d, d));
}

cplx CharFnModel::psi_minus_one(std::span<const double> s) const {
  if (mode_ == Mode::exact) return law_->psi_minus_one(s);
  const int d = dim();
  const std::size_t n = sample_.size() / d;
  double re = 0.0, im = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double phase = dot(s, std::span<const double>(sample_.data() + k * d, d));
    const double half = std::sin(0.5 * phase);
    re -= 2.0 * half * half;  // cos - 1 without cancellation
    im += std::sin(phase);
  }
  return {re / n, im / n};
}

cplx CharFnModel::psi(std::span<const double> s) const { return 1.0 + psi_minus_one(s); }

cplx CharFnModel::log_psi(std::span<const double> s) const { return log1p_complex(psi_minus_one(s)); }

void CharFnModel::gradient(std::span<const double> s, std::span<cplx> out, double fd_step) const {
  if (mode_ == Mode::exact) {
    law_->psi_gradient(s, out);
    return;
  }
  std::vector<double> sp(s.begin(), s.end()), sm(s.begin(), s.end());
  for (int j = 0; j < dim(); ++j) {
    sp[j] = s[j] + fd_step;
    sm[j] = s[j] - fd_step;
    out[j] = (psi_minus_one(sp) - psi_minus_one(sm)) / (2.0 * fd_step);
    sp[j] = sm[j] = s[j];
  }
}

double CharFnModel::standard_error(std::span<const double> s) const {
  if (mode_ == Mode::exact) return 0.0;
  const int d = dim();
  const std::size_t n = sample_.size() / d;
  double c1 = 0.0, c2 = 0.0, s1 = 0.0, s2 = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double phase = dot(s, std::span<const double>(sample_.data() + k * d, d));
    const double c = std::cos(phase), sn = std::sin(phase);
    c1 += c;
    c2 += c * c;
    s1 += sn;
    s2 += sn * sn;
  }
  const double var = (c2 / n - (c1 / n) * (c1 / n)) + (s2 / n - (s1 / n) * (s1 / n));
  return std::sqrt(std::max(var, 0.0) / n);
}

// ---------------------------------------------------------------------------

StableTarget::StableTarget(double alpha, std::vector<Atom> atoms) : alpha_(alpha), atoms_(std::move(atoms)) {
  require_supported_alpha(alpha);
  const double scale = alpha_ == 2.0 ? 1.0 : std::cos(kPi * alpha_ / 2.0) * std::tgamma(1.0 - alpha_);
  for (const auto& a : atoms_) lambda_.push_back(scale * a.weight);
}

cplx StableTarget::cf(std::span<const double> s) const {
  if (alpha_ == 2.0) {
    double q = 0.0;
    for (std::size_t i = 0; i < atoms_.size(); ++i) {
      const double v = dot(s, atoms_[i].direction);
      q += lambda_[i] * v * v;
    }
    return std::exp(-q);
  }
  const double tan_term = std::tan(kPi * alpha_ / 2.0);
  cplx expo = 0.0;
  for (std::size_t i = 0; i < atoms_.size(); ++i) {
    const double v = dot(s, atoms_[i].direction);
    if (v == 0.0) continue;
    const double sgn = v > 0.0 ? 1.0 : -1.0;
    expo += lambda_[i] * std::pow(std::abs(v), alpha_) * cplx(1.0, -sgn * tan_term);
  }
  return std::exp(-expo);
}

double StableTarget::k(std::span<const double> u) const {
  double acc = 0.0;
  for (std::size_t i = 0; i < atoms_.size(); ++i)
    acc += lambda_[i] * std::pow(std::abs(dot(u, atoms_[i].direction)), alpha_);
  return acc;
}

cplx stable_cf(const StableTarget& target, std::span<const double> s) { return target.cf(s); }

double stable_convergence_error(const CharFnModel& model, const NormingSeq& norm, long n,
                                const std::vector<std::vector<double>>& s_grid) {
  const auto target = StableTarget::for_law(model.law());
  const double an = norm.a(n);
  const auto bn = compute_b_n(model.law(), n);
  double worst = 0.0;
  std::vector<double> scaled(model.dim());
  for (const auto& s : s_grid) {
    for (int j = 0; j < model.dim(); ++j) scaled[j] = s[j] / an;
    const cplx z = static_cast<double>(n) * model.log_psi(scaled) - cplx(0.0, dot(s, bn) / an);
    worst = std::max(worst, std::abs(std::exp(z) - target.cf(s)));
  }
  return worst;
}

// ---------------------------------------------------------------------------

DecayFit fit_decay_constant(const CharFnModel& model, const EllTilde& ell_tilde, double eps,
                            int radii, int directions) {
  if (!(eps > 0.0 && eps <= kPi / 4.0 + 1e-15)) throw DomainError("eps must lie in (0, pi/4]");
  const double alpha = model.law().alpha();
  DecayFit fit;
  fit.epsilon = eps;
  fit.min_c = std::numeric_limits<double>::infinity();
  fit.max_c = -std::numeric_limits<double>::infinity();
  fit.limit_c = std::numeric_limits<double>::infinity();
  const auto dirs = sphere_directions(model.dim(), directions);
  std::vector<double> s(model.dim());
  for (const auto& u : dirs) {
    const double rmax = 3.0 * eps / sup_norm(u);
    for (int k = 0; k < radii; ++k) {
      // radii from rmax * 1e-6 up to rmax, geometric
      const double r = rmax * std::pow(1e-6, 1.0 - static_cast<double>(k) / (radii - 1));
      for (int j = 0; j < model.dim(); ++j) s[j] = r * u[j];
      const double c = -model.log_psi(s).real() / (std::pow(r, alpha) * ell_tilde(1.0 / r));
      if (c < fit.min_c) {
        fit.min_c = c;
        fit.worst_direction = u;
      }
      fit.max_c = std::max(fit.max_c, c);
      if (k == 0) fit.limit_c = std::min(fit.limit_c, c);
    }
  }
  return fit;
}

double select_epsilon(const CharFnModel& model, const EllTilde& ell_tilde) {
  for (double eps = kPi / 4.0; eps > kPi / 1024.0; eps *= 0.5) {
    if (fit_decay_constant(model, ell_tilde, eps).holds()) return eps;
  }
  throw NumericalError("characteristic-function decay fails for every eps >= pi/1024 (degenerate law?)");
}

// ---------------------------------------------------------------------------

ModulusReport modulus_report(const CharFnModel& model, const EllTilde& ell_tilde, double M,
                             int k_min, int k_max) {
  if (!(M > 0.0)) throw DomainError("modulus report needs M > 0");
  const int d = model.dim();
  const double alpha = model.law().alpha();
  const auto& ell = ell_tilde.ell();
  // s grid on Pi_M: 21 points per axis in d = 1, 11 per axis otherwise.
  const int per_axis = d == 1 ? 21 : 11;
  std::vector<std::vector<double>> grid;
  std::vector<int> idx(d, 0);
  while (true) {
    std::vector<double> s(d);
    for (int j = 0; j < d; ++j) s[j] = M * (2.0 * idx[j] / (per_axis - 1) - 1.0);
    grid.push_back(s);
    int j = 0;
    while (j < d && ++idx[j] == per_axis) idx[j++] = 0;
    if (j == d) break;
  }
  std::vector<double> centre(d, 0.0);
  if (alpha > 1.0) centre = model.law().mean();

  // gradient of the centred transform Psi(s) e^{-is.EX}
  auto centred_grad = [&](std::span<const double> s, std::vector<cplx>& g) {
    g.assign(d, 0.0);
    model.gradient(s, g);
    const cplx ps = model.psi(s);
    const cplx rot = std::exp(cplx(0.0, -dot(s, centre)));
    for (int j = 0; j < d; ++j) g[j] = (g[j] - cplx(0.0, centre[j]) * ps) * rot;
  };

  ModulusReport rep;
  std::vector<cplx> g0, g1;
  for (int k = k_min; k <= k_max; ++k) {
    const double h = std::ldexp(1.0, -k);
    double worst = 0.0;
    for (const auto& s : grid) {
      for (int j = 0; j < d; ++j) {
        std::vector<double> sh = s;
        sh[j] += h;
        double num;
        double den;
        if (alpha < 1.0) {
          num = std::abs(model.psi_minus_one(sh) - model.psi_minus_one(s));
          den = std::pow(h, alpha) * ell(1.0 / h);
        } else {
          centred_grad(s, g0);
          centred_grad(sh, g1);
          num = 0.0;
          for (int i = 0; i < d; ++i) num = std::max(num, std::abs(g1[i] - g0[i]));
          den = std::pow(h, alpha - 1.0) * ell_tilde(1.0 / h);
        }
        worst = std::max(worst, num / den);
      }
    }
    rep.difference.push_back({k, h, worst});
    if (alpha > 1.0) {
      double gworst = 0.0;
      for (const auto& u : sphere_directions(d, 8)) {
        std::vector<double> s(d);
        for (int j = 0; j < d; ++j) s[j] = h * u[j];
        centred_grad(s, g0);
        double num = 0.0;
        for (int i = 0; i < d; ++i) num = std::max(num, std::abs(g0[i]));
        gworst = std::max(gworst, num / (std::pow(h, alpha - 1.0) * ell_tilde(1.0 / h)));
      }
      rep.gradient.push_back({k, h, gworst});
    }
  }
  auto no_growth = [](const std::vector<ModulusRow>& rows) {
    if (rows.size() < 2) return true;
    double early = 0.0;
    for (std::size_t i = 0; i <= rows.size() / 2; ++i) early = std::max(early, rows[i].ratio);
    return std::isfinite(rows.back().ratio) && rows.back().ratio <= 2.0 * early;
  };
  rep.bounded = no_growth(rep.difference) && no_growth(rep.gradient);
  return rep;
}

// ---------------------------------------------------------------------------

double scaled_decay_integral(const CharFnModel& model, const NormingSeq& norm, long n,
                             double beta, double eps) {
  const int d = model.dim();
  const double an = norm.a(n);
  const double top = 3.0 * eps;
  // Radial panels graded towards 0 where the integrand has its cusp.
  std::vector<double> cuts{0.0};
  for (int k = 60; k >= 0; --k) cuts.push_back(top * std::ldexp(1.0, -k));
  auto radial = [&](std::span<const double> u, double rmax, double jac_power) {
    std::vector<double> s(d);
    double acc = 0.0;
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
      const double a = cuts[k] * rmax / top, b = cuts[k + 1] * rmax / top;
      acc += quad::integrate_gl(
          [&](double r) {
            for (int j = 0; j < d; ++j) s[j] = r * u[j];
            const double mod = std::exp(static_cast<double>(n) * model.log_psi(s).real());
            return std::pow(r, beta + jac_power) * mod;
          },
          a, b, 16);
    }
    return acc;
  };
  double total = 0.0;
  if (d == 1) {
    total = radial(std::vector<double>{1.0}, top, 0.0) + radial(std::vector<double>{-1.0}, top, 0.0);
  } else if (d == 2) {
    // Polar coordinates over the square; panels of width pi/4 follow its corners.
    for (int p = 0; p < 8; ++p) {
      total += quad::integrate_gl(
          [&](double phi) {
            const std::vector<double> u{std::cos(phi), std::sin(phi)};
            return radial(u, top / sup_norm(u), 1.0);
          },
          p * kPi / 4.0, (p + 1) * kPi / 4.0, 24);
    }
  } else {
    throw DomainError("scaled decay integral supports d <= 2");
  }
  return total * std::pow(an, d + beta);
}

}  // namespace lld
