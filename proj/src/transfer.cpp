#include "lld/transfer.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "lld/quadrature.hpp"

namespace lld {

namespace {

constexpr double kMaxGaussPhase = 232.0;  // beyond this a piece uses the exact tail transform

int gl_size_for_phase(double delta) {
  if (delta <= 0.3) return 4;
  if (delta <= 2.0) return 8;
  if (delta <= 12.0) return 16;
  if (delta <= 40.0) return 32;
  if (delta <= 100.0) return 64;
  return 128;
}

}  // namespace

// ---------------------------------------------------------------------------
// Observable

Observable Observable::power(double alpha, double kappa) {
  require_supported_alpha(alpha);
  Observable o;
  o.kind_ = Kind::power;
  o.alpha_ = alpha;
  o.kappa_ = kappa;
  o.pareto_ = std::make_shared<TailTransform>(alpha, SlowlyVarying::constant(1.0));
  return o;
}

Observable Observable::indicator(double value, double lo, double hi) {
  if (!(lo < hi)) throw DomainError("indicator observable needs lo < hi");
  Observable o;
  o.kind_ = Kind::indicator;
  o.value_ = value;
  o.lo_ = lo;
  o.hi_ = hi;
  o.alpha_ = 2.0;  // bounded: every moment is finite
  return o;
}

Observable Observable::centred(double kappa) const {
  Observable o = *this;
  o.kappa_ = kappa;
  return o;
}

double Observable::operator()(double z) const {
  if (kind_ == Kind::indicator) return (z >= lo_ && z < hi_ ? value_ : 0.0) - kappa_;
  return std::pow(z, -1.0 / alpha_) - kappa_;
}

double Observable::integral(double z1, double z2) const {
  if (kind_ == Kind::indicator) return value_ * std::max(0.0, std::min(z2, hi_) - std::max(z1, lo_));
  if (alpha_ < 1.0 && z1 <= 0.0) return std::numeric_limits<double>::infinity();
  const double e = 1.0 - 1.0 / alpha_;
  return (std::pow(z2, e) - std::pow(z1, e)) / e;
}

cplx Observable::phase_integral(double s, double z1, double z2) const {
  const double len = z2 - z1;
  if (!(len > 0.0)) return 0.0;
  const cplx centre = std::polar(1.0, -s * kappa_);
  if (kind_ == Kind::indicator) {
    const double inside = std::max(0.0, std::min(z2, hi_) - std::max(z1, lo_));
    return centre * (std::polar(1.0, s * value_) * inside + (len - inside));
  }
  if (s == 0.0) return len;
  const double inv = -1.0 / alpha_;
  const double v2 = std::pow(z2, inv);
  const double v1 = z1 > 0.0 ? std::pow(z1, inv) : std::numeric_limits<double>::infinity();
  const double delta = std::abs(s) * (v1 - v2);
  if (delta <= kMaxGaussPhase) {
    const auto& rule = quad::gauss_legendre(gl_size_for_phase(delta));
    cplx acc = 0.0;
    const double mid = 0.5 * (z1 + z2), half = 0.5 * len;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
      const double z = mid + half * rule.nodes[i];
      acc += rule.weights[i] * std::polar(1.0, s * std::pow(z, inv));
    }
    return centre * half * acc;
  }
  // int_z^1... in V = z^(-1/alpha): int_{z1}^{z2} e^{isv} dz = z2 J(s V2) - z1 J(s V1)
  cplx val = z2 * pareto_->value(s * v2);
  if (z1 > 0.0) val -= z1 * pareto_->value(s * v1);
  return centre * val;
}

// ---------------------------------------------------------------------------
// TransferModel

TransferModel::TransferModel(IntervalMap map, Observable obs, TransferOptions opt)
    : map_(std::move(map)), obs_(std::move(obs)), opt_(opt) {
  if (opt_.m < 4 || (opt_.m & (opt_.m - 1)) != 0) throw DomainError("Ulam resolution m must be a power of two >= 4");
  build_cells();
  build_pieces();
  compute_invariant();
}

void TransferModel::build_cells() {
  edges_.clear();
  groups_.clear();
  const double m = opt_.m;
  if (map_.kind() == MapKind::gauss) {
    const long B = opt_.gauss_exact_branches;
    const long K = opt_.gauss_truncation;
    if (B < 2 || K <= B + 1) throw DomainError("gauss discretisation needs 2 <= B < K - 1");
    std::vector<long> g{B + 1};
    while (g.back() < K) {
      const long next = std::max(g.back() + 1, std::lround(static_cast<double>(g.back()) * opt_.gauss_group_ratio));
      g.push_back(std::min(next, K));
    }
    // ascending edges: 0, 1/K, ..., 1/(B+1)
    edges_.push_back(0.0);
    groups_.push_back({0, K, -1});
    for (std::size_t i = g.size() - 1; i >= 1; --i) {
      edges_.push_back(1.0 / static_cast<double>(g[i]));
      groups_.push_back({edges_.size() - 1, g[i - 1], g[i]});
    }
    edges_.push_back(1.0 / static_cast<double>(B + 1));
    const double start = edges_.back();
    for (int k = 1; k <= opt_.m; ++k) {
      const double e = k / m;
      if (e - start < 0.25 / m) continue;
      edges_.push_back(e);
    }
  } else {
    edges_.push_back(0.0);
    for (int k = opt_.graded_cells - 1; k >= 1; --k) edges_.push_back(std::ldexp(1.0 / m, -k));
    for (int k = 1; k <= opt_.m; ++k) edges_.push_back(k / m);
  }
  widths_.resize(edges_.size() - 1);
  for (std::size_t k = 0; k + 1 < edges_.size(); ++k) widths_[k] = edges_[k + 1] - edges_[k];
}

void TransferModel::build_pieces() {
  pieces_.clear();
  group_mass_.clear();
  const std::size_t M = widths_.size();
  auto targets = [&](double y0, double y1, auto&& emit) {
    // cells overlapping (y0, y1)
    auto j = static_cast<std::size_t>(std::upper_bound(edges_.begin(), edges_.end(), y0) - edges_.begin());
    j = j == 0 ? 0 : j - 1;
    for (; j < M && edges_[j] < y1; ++j) {
      const double a = std::max(y0, edges_[j]), b = std::min(y1, edges_[j + 1]);
      if (b > a) emit(static_cast<int>(j), a, b);
    }
  };

  if (map_.kind() == MapKind::gauss) {
    std::vector<bool> grouped(M, false);
    for (const auto& g : groups_) grouped[g.cell] = true;
    const long B = opt_.gauss_exact_branches;
    for (std::size_t k = 0; k < M; ++k) {
      if (grouped[k]) continue;
      const double z0 = edges_[k], z1 = edges_[k + 1];
      const long b_lo = std::max(1L, static_cast<long>(std::floor(1.0 / z1)) - 1);
      const long b_hi = std::min(B, static_cast<long>(std::ceil(1.0 / z0)) + 1);
      for (long b = b_lo; b <= b_hi; ++b) {
        const double a = std::max(z0, 1.0 / static_cast<double>(b + 1));
        const double c = std::min(z1, 1.0 / static_cast<double>(b));
        if (!(c > a)) continue;
        const double bd = static_cast<double>(b);
        const double y0 = std::max(0.0, 1.0 / c - bd), y1 = std::min(1.0, 1.0 / a - bd);
        targets(y0, y1, [&](int j, double ya, double yb) {
          pieces_.push_back({j, static_cast<int>(k), 1.0 / (bd + yb), 1.0 / (bd + ya)});
        });
      }
    }
    // whole-branch cells: target masses sum_b (1/(b+y0) - 1/(b+y1))
    for (const auto& g : groups_) {
      std::vector<std::pair<int, double>> masses;
      for (std::size_t j = 0; j < M; ++j) {
        const double y0 = edges_[j], y1 = edges_[j + 1], w = y1 - y0;
        double mass = 0.0;
        if (g.end_branch > 0) {
          for (long b = g.first_branch; b < g.end_branch; ++b) {
            const double bd = static_cast<double>(b);
            mass += w / ((bd + y0) * (bd + y1));
          }
        } else {
          // Euler-Maclaurin for the unbounded lump sum over b >= K
          const double K = static_cast<double>(g.first_branch);
          const double f = w / ((K + y0) * (K + y1));
          const double fp = -f * (1.0 / (K + y0) + 1.0 / (K + y1));
          mass = std::log1p(w / (K + y0)) + 0.5 * f - fp / 12.0;
        }
        masses.emplace_back(static_cast<int>(j), mass);
      }
      group_mass_.push_back(std::move(masses));
    }
    return;
  }

  const auto branches = map_.branches();
  const double slope = map_.slope();
  for (std::size_t k = 0; k < M; ++k) {
    const double z0 = edges_[k], z1 = edges_[k + 1];
    for (std::size_t q = 0; q < branches.size(); ++q) {
      const double a = std::max(z0, branches[q].lo), c = std::min(z1, branches[q].hi);
      if (!(c > a)) continue;
      const double shift = static_cast<double>(q);
      const double y0 = slope * a - shift, y1 = std::min(branches[q].image_hi, slope * c - shift);
      targets(std::max(0.0, y0), y1, [&](int j, double ya, double yb) {
        pieces_.push_back({j, static_cast<int>(k), (ya + shift) / slope, (yb + shift) / slope});
      });
    }
  }
}

SparseC TransferModel::assemble(double s) const {
  std::vector<Eigen::Triplet<cplx>> trip(pieces_.size());
  parallel_for(pieces_.size(), [&](std::size_t i) {
    const auto& p = pieces_[i];
    trip[i] = {p.row, p.col, obs_.phase_integral(s, p.z1, p.z2) / widths_[p.col]};
  });
  for (std::size_t g = 0; g < groups_.size(); ++g) {
    const std::size_t k = groups_[g].cell;
    const double w = widths_[k];
    const cplx twist = obs_.phase_integral(s, edges_[k], edges_[k + 1]) / w;
    for (const auto& [j, mass] : group_mass_[g]) trip.emplace_back(j, static_cast<int>(k), twist * (mass / w));
  }
  const auto M = static_cast<Eigen::Index>(widths_.size());
  SparseC A(M, M);
  A.setFromTriplets(trip.begin(), trip.end());
  A.makeCompressed();
  return A;
}

void TransferModel::compute_invariant() {
  const SparseC A = assemble(0.0);
  const Eigen::SparseMatrix<double> R = A.real();
  Eigen::VectorXd x = Eigen::Map<const Eigen::VectorXd>(widths_.data(), static_cast<Eigen::Index>(widths_.size()));
  for (int it = 0; it < 100000; ++it) {
    Eigen::VectorXd y = R * x;
    y /= y.sum();
    const double diff = (y - x).lpNorm<1>();
    x = y;
    if (diff < 1e-15) break;
  }
  invariant_ = x.cwiseMax(0.0);
  invariant_ /= invariant_.sum();
}

double TransferModel::discrete_mean() const {
  double acc = 0.0;
  for (std::size_t k = 0; k < widths_.size(); ++k)
    acc += invariant_[static_cast<Eigen::Index>(k)] * obs_.integral(edges_[k], edges_[k + 1]) / widths_[k];
  return acc;
}

TransferModel TransferModel::recentred(double kappa) const {
  TransferModel copy = *this;
  copy.obs_ = obs_.centred(kappa);
  return copy;
}

double TransferModel::density_l1_error(const std::function<double(double)>& density) const {
  const auto& rule = quad::gauss_legendre(16);
  double err = 0.0;
  for (std::size_t k = 0; k < widths_.size(); ++k) {
    const double h = invariant_[static_cast<Eigen::Index>(k)] / widths_[k];
    const double mid = 0.5 * (edges_[k] + edges_[k + 1]), half = 0.5 * widths_[k];
    for (std::size_t i = 0; i < rule.nodes.size(); ++i)
      err += half * rule.weights[i] * std::abs(h - density(mid + half * rule.nodes[i]));
  }
  return err;
}

double TransferModel::invariant_quantile(double u) const {
  double acc = 0.0;
  for (std::size_t k = 0; k < widths_.size(); ++k) {
    const double mass = invariant_[static_cast<Eigen::Index>(k)];
    if (acc + mass >= u && mass > 0.0) return edges_[k] + widths_[k] * std::clamp((u - acc) / mass, 0.0, 1.0);
    acc += mass;
  }
  return edges_.back() - 0.5 * widths_.back();
}

// ---------------------------------------------------------------------------
// Spectral data

namespace {

struct PowerResult {
  cplx lambda;
  Eigen::VectorXcd vec;
  bool converged;
  int iterations;
};

template <class Apply>
PowerResult power_iterate(Apply&& apply, Eigen::VectorXcd x, double tol, int max_iter) {
  x.normalize();
  cplx lambda = 0.0;
  for (int it = 1; it <= max_iter; ++it) {
    Eigen::VectorXcd y = apply(x);
    lambda = x.dot(y);  // x^H y
    const double res = (y - lambda * x).norm();
    const double ny = y.norm();
    if (ny == 0.0) return {0.0, x, true, it};
    if (res <= tol * std::max(std::abs(lambda), 1e-300)) return {lambda, y / ny, true, it};
    x = y / ny;
  }
  return {lambda, x, false, max_iter};
}

}  // namespace

EigenData leading_eig(const SparseC& A, double tol, bool want_subleading) {
  const Eigen::Index M = A.rows();
  EigenData out;
  Eigen::VectorXcd start = Eigen::VectorXcd::Constant(M, cplx(1.0, 0.0));
  auto right = power_iterate([&](const Eigen::VectorXcd& v) { Eigen::VectorXcd r = A * v; return r; }, start, tol, 20000);
  auto left = power_iterate([&](const Eigen::VectorXcd& v) { Eigen::VectorXcd r = A.adjoint() * v; return r; }, start,
                            tol, 20000);
  if (!right.converged || !left.converged) {
    if (M > 4096) throw NumericalError("leading eigenvalue: power iteration did not converge (resolution error)");
    // Dense fallback for nearly degenerate moduli.
    const Eigen::MatrixXcd D = Eigen::MatrixXcd(A);
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(D);
    Eigen::Index best = 0;
    for (Eigen::Index i = 1; i < M; ++i)
      if (std::abs(es.eigenvalues()[i]) > std::abs(es.eigenvalues()[best])) best = i;
    right.lambda = es.eigenvalues()[best];
    right.vec = es.eigenvectors().col(best);
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> esl(D.adjoint());
    Eigen::Index bl = 0;
    for (Eigen::Index i = 1; i < M; ++i)
      if (std::abs(esl.eigenvalues()[i] - std::conj(right.lambda)) < std::abs(esl.eigenvalues()[bl] - std::conj(right.lambda)))
        bl = i;
    left.vec = esl.eigenvectors().col(bl);
  }
  out.lambda = right.lambda;
  out.iterations = right.iterations;
  const cplx total = right.vec.sum();
  out.zeta = std::abs(total) > 1e-300 ? Eigen::VectorXcd(right.vec / total) : right.vec;
  out.left = left.vec;
  if (want_subleading) {
    const cplx denom = out.left.dot(out.zeta);  // u^H zeta
    auto deflated = [&](const Eigen::VectorXcd& v) {
      Eigen::VectorXcd r = A * v;
      r -= out.lambda * out.zeta * (out.left.dot(v) / denom);
      return r;
    };
    Eigen::VectorXcd x = Eigen::VectorXcd::Zero(M);
    for (Eigen::Index i = 0; i < M; ++i) x[i] = cplx(std::sin(1.0 + 0.7 * i), std::cos(0.3 * i));
    x.normalize();
    std::vector<double> log_norm;
    cplx rayleigh = 0.0;
    for (int it = 0; it < 400; ++it) {
      Eigen::VectorXcd y = deflated(x);
      rayleigh = x.dot(y);
      const double ny = y.norm();
      if (ny == 0.0) break;
      log_norm.push_back(std::log(ny));
      x = y / ny;
    }
    double growth = 0.0;
    if (log_norm.size() >= 100) {
      double acc = 0.0;
      for (std::size_t i = log_norm.size() - 100; i < log_norm.size(); ++i) acc += log_norm[i];
      growth = std::exp(acc / 100.0);
    }
    out.subleading = std::abs(std::abs(rayleigh) - growth) < 1e-3 * std::max(growth, 1e-300) ? std::abs(rayleigh) : growth;
    out.gap = out.subleading / std::abs(out.lambda);
  }
  return out;
}

EigenData leading_eig(const TransferModel& model, double s, double tol, bool want_subleading) {
  return leading_eig(model.assemble(s), tol, want_subleading);
}

std::vector<double> eigencurve_grid(double s_max, int points, double decades) {
  std::vector<double> g;
  for (int i = 0; i < points; ++i) g.push_back(s_max * std::pow(10.0, -decades * i / (points - 1)));
  std::sort(g.begin(), g.end());
  return g;
}

EigencurveFit eigencurve(const TransferModel& model, const std::vector<double>& s_grid, const EllTilde& ell_tilde) {
  if (s_grid.empty()) throw DomainError("eigencurve grid is empty");
  for (double s : s_grid)
    if (!(s > 0.0)) throw DomainError("eigencurve grid must exclude 0");
  EigencurveFit fit;
  fit.points.resize(s_grid.size());
  for (std::size_t i = 0; i < s_grid.size(); ++i) {
    const auto e = leading_eig(model, s_grid[i], 1e-12, true);
    fit.points[i] = {s_grid[i], e.lambda, e.gap, false};
  }
  const double s_min = *std::min_element(s_grid.begin(), s_grid.end());
  std::vector<double> xs, ys;
  std::vector<std::size_t> used;
  for (std::size_t i = 0; i < s_grid.size(); ++i) {
    const double s = s_grid[i];
    const double decay = -std::log(std::abs(fit.points[i].lambda));
    if (s > 10.0 * s_min * (1 + 1e-12) || !(decay > 0.0)) continue;
    xs.push_back(std::log(s));
    ys.push_back(std::log(decay) - std::log(ell_tilde(1.0 / s)));
    used.push_back(i);
  }
  if (xs.size() >= 2) {
    const double k = static_cast<double>(xs.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      sx += xs[i];
      sy += ys[i];
      sxx += xs[i] * xs[i];
      sxy += xs[i] * ys[i];
    }
    fit.alpha_hat = (k * sxy - sx * sy) / (k * sxx - sx * sx);
    const double intercept = (sy - fit.alpha_hat * sx) / k;
    fit.c = std::exp(intercept);
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const double r = std::abs(ys[i] - (intercept + fit.alpha_hat * xs[i]));
      fit.residual = std::max(fit.residual, r);
      fit.points[used[i]].flagged = r > 0.1;
    }
  } else {
    fit.residual = std::numeric_limits<double>::infinity();
  }
  fit.flagged = !(fit.residual <= 0.1);

  const double alpha = model.observable().alpha();
  if (model.observable().kind() == Observable::Kind::power && alpha > 1.0) {
    // lambda'(0) = 1^T A'(0) zeta0 = i sum_k zeta_k avg_k(v - kappa), exact on the discretisation
    const auto& e = model.edges();
    const auto& w = model.widths();
    double acc = 0.0;
    for (std::size_t k = 0; k < w.size(); ++k)
      acc += model.invariant()[static_cast<Eigen::Index>(k)] *
             (model.observable().integral(e[k], e[k + 1]) / w[k] - model.observable().kappa());
    fit.derivative_at_zero = std::abs(acc);
    for (double s : s_grid) {
      const double h = 1e-3 * s;
      const cplx lp = leading_eig(model, s + h, 1e-13, false).lambda;
      const cplx lm = leading_eig(model, s - h, 1e-13, false).lambda;
      const double d = std::abs(lp - lm) / (2.0 * h);
      fit.derivative_ratio.push_back(d / (std::pow(s, alpha - 1.0) * ell_tilde(1.0 / s)));
    }
  }
  return fit;
}

std::string eigencurve_csv(const EigencurveFit& fit, const std::string& header_comment) {
  std::ostringstream os;
  os.precision(17);
  if (!header_comment.empty()) os << "# " << header_comment << '\n';
  os << "s,re_lambda,im_lambda,abs_lambda,gap,fit_flag\n";
  for (const auto& p : fit.points)
    os << p.s << ',' << p.lambda.real() << ',' << p.lambda.imag() << ',' << std::abs(p.lambda) << ',' << p.gap << ','
       << (p.flagged ? 1 : 0) << '\n';
  return os.str();
}

// ---------------------------------------------------------------------------
// Operator bound

OperatorBound::OperatorBound(const TransferModel& model, const SmoothingKernel& kernel, std::vector<long> ns,
                             OperatorBoundOptions opt)
    : opt_(opt) {
  std::sort(ns.begin(), ns.end());
  ns.erase(std::unique(ns.begin(), ns.end()), ns.end());
  for (long n : ns)
    if (n < 0) throw DomainError("operator bound needs n >= 0");
  const double eps = kernel.epsilon();

  // [0, eps 2^-L], then dyadic panels up to eps; the top three split in four.
  panel_lo_.push_back(0.0);
  panel_hi_.push_back(std::ldexp(eps, -opt_.grading_levels));
  for (int k = opt_.grading_levels - 1; k >= 0; --k) {
    const double lo = std::ldexp(eps, -k - 1), hi = std::ldexp(eps, -k);
    const int split = k < 3 ? 4 : 1;
    for (int p = 0; p < split; ++p) {
      panel_lo_.push_back(lo + (hi - lo) * p / split);
      panel_hi_.push_back(lo + (hi - lo) * (p + 1) / split);
    }
  }
  const int q = opt_.per_panel;
  const auto& rule = quad::gauss_legendre(q);
  const Eigen::VectorXd& m0 = model.invariant();
  const auto M = static_cast<Eigen::Index>(model.size());
  Eigen::VectorXcd inv_m0(M);
  for (Eigen::Index j = 0; j < M; ++j) inv_m0[j] = m0[j] > 0.0 ? 1.0 / m0[j] : 0.0;

  std::vector<long> small, large;
  for (long n : ns) (n <= opt_.exact_max_n ? small : large).push_back(n);

  struct NodeData {
    double s = 0.0, r = 0.0;
    cplx lambda = 1.0;
    Eigen::VectorXcd lead;              // (u^H m0)/(u^H zeta) zeta / m0
    std::vector<Eigen::VectorXcd> pow;  // R^n m0 / m0 for the small n
  };
  const std::size_t total = panel_lo_.size() * static_cast<std::size_t>(q);
  std::vector<NodeData> nodes(total);
  parallel_for(total, [&](std::size_t idx) {
    const std::size_t p = idx / q;
    const int i = static_cast<int>(idx % q);
    NodeData& nd = nodes[idx];
    nd.s = panel_lo_[p] + 0.5 * (panel_hi_[p] - panel_lo_[p]) * (rule.nodes[i] + 1.0);
    nd.r = kernel.r0(nd.s);
    if (nd.r == 0.0) return;
    const SparseC A = model.assemble(nd.s);
    const auto e = leading_eig(A, 1e-12, false);
    nd.lambda = e.lambda;
    if (!large.empty()) {
      const cplx coeff = e.left.dot(m0.cast<cplx>()) / e.left.dot(e.zeta);
      nd.lead = coeff * e.zeta.cwiseProduct(inv_m0);
    }
    Eigen::VectorXcd w = m0.cast<cplx>();
    long done = 0;
    for (long n : small) {
      for (; done < n; ++done) w = A * w;
      nd.pow.push_back(w.cwiseProduct(inv_m0));
    }
  });

  const double floor = std::log(opt_.cutoff);
  for (long n : ns) {
    Table t;
    // last panel holding a node with |lambda|^n above the cutoff
    std::size_t last = 0;
    for (std::size_t idx = 0; idx < total; ++idx) {
      const auto& nd = nodes[idx];
      if (nd.r != 0.0 && static_cast<double>(n) * std::log(std::abs(nd.lambda)) > floor) last = idx / q;
    }
    t.panels = last + 1;
    t.support = panel_hi_[last];
    t.values = Eigen::MatrixXcd::Zero(M, static_cast<Eigen::Index>(t.panels * q));
    const auto small_pos = std::find(small.begin(), small.end(), n);
    for (std::size_t idx = 0; idx < t.panels * q; ++idx) {
      const auto& nd = nodes[idx];
      if (nd.r == 0.0) continue;
      const auto col = static_cast<Eigen::Index>(idx);
      if (small_pos != small.end()) {
        t.values.col(col) = nd.r * nd.pow[static_cast<std::size_t>(small_pos - small.begin())];
      } else {
        t.values.col(col) = nd.r * std::exp(static_cast<double>(n) * std::log(nd.lambda)) * nd.lead;
      }
    }
    tables_.emplace_back(n, std::move(t));
  }
}

const OperatorBound::Table& OperatorBound::table(long n) const {
  for (const auto& [k, t] : tables_)
    if (k == n) return t;
  throw DomainError("operator bound was not prepared for n = " + std::to_string(n));
}

double OperatorBound::support(long n) const { return table(n).support; }

double OperatorBound::evaluate(long n, double x) const {
  const Table& t = table(n);
  const int q = opt_.per_panel;
  const auto& rule = quad::gauss_legendre(q);
  // barycentric weights of the Gauss-Legendre nodes on [-1, 1]
  std::vector<double> bary(q, 1.0);
  for (int i = 0; i < q; ++i)
    for (int j = 0; j < q; ++j)
      if (i != j) bary[i] /= (rule.nodes[i] - rule.nodes[j]);

  auto pieces_for = [&](std::size_t p) {
    const double len = panel_hi_[p] - panel_lo_[p];
    return std::max(1L, static_cast<long>(std::ceil(len * std::abs(x) / (2.0 * kPi))));
  };
  long fine_total = 0;
  for (std::size_t p = 0; p < t.panels; ++p) fine_total += pieces_for(p) * q;
  if (fine_total > opt_.max_fine_nodes) return std::numeric_limits<double>::quiet_NaN();

  // omega_{p,i} = int_panel e^{-isx} L_i(s) ds
  Eigen::VectorXcd omega = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(t.panels * q));
  std::vector<double> basis(q);
  for (std::size_t p = 0; p < t.panels; ++p) {
    const double lo = panel_lo_[p], len = panel_hi_[p] - lo;
    const long pieces = pieces_for(p);
    const auto off = static_cast<Eigen::Index>(p * q);
    for (long piece = 0; piece < pieces; ++piece) {
      const double a = lo + len * piece / pieces, b = lo + len * (piece + 1) / pieces;
      for (int f = 0; f < q; ++f) {
        const double s = 0.5 * (a + b) + 0.5 * (b - a) * rule.nodes[f];
        const cplx ph = std::polar(0.5 * (b - a) * rule.weights[f], -s * x);
        const double u = 2.0 * (s - lo) / len - 1.0;  // panel-local coordinate
        double denom = 0.0;
        int exact = -1;
        for (int i = 0; i < q; ++i) {
          const double d = u - rule.nodes[i];
          if (d == 0.0) {
            exact = i;
            break;
          }
          basis[i] = bary[i] / d;
          denom += basis[i];
        }
        if (exact >= 0) {
          omega[off + exact] += ph;
          continue;
        }
        for (int i = 0; i < q; ++i) omega[off + i] += ph * (basis[i] / denom);
      }
    }
  }
  const Eigen::VectorXcd acc = t.values * omega;
  // negative half by conjugate symmetry: total = 2 Re(positive half)
  double sup = 0.0;
  for (Eigen::Index j = 0; j < acc.size(); ++j) sup = std::max(sup, std::abs(2.0 * acc[j].real()));
  return sup;
}

double operator_lld_bound(const TransferModel& model, const SmoothingKernel& kernel, long n, double x,
                          OperatorBoundOptions opt) {
  return OperatorBound(model, kernel, {n}, opt).evaluate(n, x);
}

// ---------------------------------------------------------------------------
// Hypothesis diagnostics

double density_sup_norm(const TransferModel& model, const SparseC& A) {
  const auto& w = model.widths();
  std::vector<double> rows(w.size(), 0.0);
  for (Eigen::Index k = 0; k < A.outerSize(); ++k)
    for (SparseC::InnerIterator it(A, k); it; ++it)
      rows[static_cast<std::size_t>(it.row())] += std::abs(it.value()) * w[static_cast<std::size_t>(k)];
  double sup = 0.0;
  for (std::size_t j = 0; j < w.size(); ++j) sup = std::max(sup, rows[j] / w[j]);
  return sup;
}

SpectralHypothesisReport spectral_hypothesis_report(const TransferModel& model, double eps, double alpha,
                                                    const EllTilde& ell_tilde, int k_min, int k_max) {
  SpectralHypothesisReport rep;
  const auto e0 = leading_eig(model, 0.0, 1e-12, true);
  rep.lambda_at_zero = std::abs(e0.lambda);
  rep.gap_at_zero = e0.gap;
  const std::vector<double> centres{-0.5 * eps, 0.0, 0.5 * eps, eps};
  auto deriv = [&](double s, double h) {
    const double d = h / 64.0;
    SparseC D = model.assemble(s + d) - model.assemble(s - d);
    D *= 1.0 / (2.0 * d);
    return D;
  };
  for (int k = k_min; k <= k_max; ++k) {
    const double h = std::ldexp(1.0, -k);
    double worst = 0.0;
    for (double s : centres) {
      double num, den;
      if (alpha < 1.0) {
        SparseC diff = model.assemble(s + h) - model.assemble(s);
        num = density_sup_norm(model, diff);
        den = std::pow(h, alpha) * ell_tilde.ell()(1.0 / h);
      } else {
        SparseC diff = deriv(s + h, h) - deriv(s, h);
        num = density_sup_norm(model, diff);
        den = std::pow(h, alpha - 1.0) * ell_tilde(1.0 / h);
      }
      worst = std::max(worst, num / den);
    }
    rep.difference.emplace_back(h, worst);
  }
  double early = 0.0;
  const std::size_t half = std::max<std::size_t>(1, rep.difference.size() / 2);
  for (std::size_t i = 0; i < half; ++i) early = std::max(early, rep.difference[i].second);
  rep.bounded = rep.difference.back().second <= 2.0 * early;
  return rep;
}

}  // namespace lld
