#include "lld/fourier_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>

#include "lld/quadrature.hpp"

namespace lld {

namespace {

constexpr int kGradingLevels = 40;  // innermost panel is S 2^-40
constexpr int kScan1d = 2000;
constexpr int kScan2d = 128;

// exp(n log Psi - i s.b): Psi^n centred by the shift.
cplx centred_power(cplx psi_m1, long n, double phase) {
  const cplx lg = log1p_complex(psi_m1);
  return std::exp(static_cast<double>(n) * lg - cplx(0.0, phase));
}

double log_abs_power(cplx psi_m1, long n) {
  return static_cast<double>(n) * std::real(log1p_complex(psi_m1));
}

// Smallest S in (0, eps] beyond which n log|Psi| stays below log(cutoff) on the scan.
double effective_support(const std::function<cplx(double)>& psi_m1, long n, double eps, double cutoff) {
  const double floor = std::log(cutoff);
  int last = 0;
  for (int k = 1; k <= kScan1d; ++k) {
    const double s = eps * k / kScan1d;
    if (log_abs_power(psi_m1(s), n) > floor || log_abs_power(psi_m1(-s), n) > floor) last = k;
  }
  return std::min(eps, eps * (last + 1) / kScan1d);
}

}  // namespace

std::vector<QuadNode> oracle_axis_nodes(double S, double abs_x, int min_nodes, int per_panel,
                                        double node_scale) {
  if (!(S > 0.0)) throw DomainError("oracle nodes need a positive support");
  std::vector<double> breaks{0.0};
  for (int k = kGradingLevels; k >= 0; --k) breaks.push_back(std::ldexp(S, -k));
  const auto& rule = quad::gauss_legendre(per_panel);

  double period = abs_x > 0.0 ? 2.0 * kPi / abs_x : std::numeric_limits<double>::infinity();
  auto count_for = [&](double len) {
    const double pieces = std::ceil(node_scale * std::max(1.0, len / period));
    return static_cast<long>(std::max(1.0, pieces));
  };
  auto total = [&] {
    long t = 0;
    for (std::size_t k = 0; k + 1 < breaks.size(); ++k) t += count_for(breaks[k + 1] - breaks[k]);
    return 2 * t * per_panel;
  };
  while (total() < min_nodes) period = std::min(period, S) * 0.5;

  std::vector<QuadNode> nodes;
  nodes.reserve(static_cast<std::size_t>(total()));
  for (std::size_t k = 0; k + 1 < breaks.size(); ++k) {
    const long m = count_for(breaks[k + 1] - breaks[k]);
    const double h = (breaks[k + 1] - breaks[k]) / static_cast<double>(m);
    for (long p = 0; p < m; ++p) {
      const double lo = breaks[k] + h * static_cast<double>(p);
      for (int i = 0; i < per_panel; ++i) {
        const double s = lo + 0.5 * h * (rule.nodes[i] + 1.0);
        const double w = 0.5 * h * rule.weights[i];
        nodes.push_back({s, w});
        nodes.push_back({-s, w});
      }
    }
  }
  return nodes;
}

FourierOracle::FourierOracle(const CharFnModel& model, const SmoothingKernel& kernel, long n,
                             std::vector<double> shift, double max_abs_x, OracleOptions opt)
    : model_(model), kernel_(kernel), n_(n), shift_(std::move(shift)), opt_(opt) {
  const int d = model.dim();
  if (d < 1 || d > 2) throw DomainError("Fourier oracle supports d = 1 and d = 2");
  if (n < 1) throw DomainError("Fourier oracle needs n >= 1");
  if (static_cast<int>(shift_.size()) != d) throw DomainError("shift dimension mismatch");
  const double eps = kernel.epsilon();

  if (d == 1) {
    auto psi1 = [&](double s) { return model_.psi_minus_one(std::span<const double>(&s, 1)); };
    support_ = {effective_support(psi1, n, eps, opt_.cutoff)};
    nodes_1d_ = oracle_axis_nodes(support_[0], max_abs_x, opt_.min_nodes_1d, opt_.per_panel,
                                  opt_.node_scale);
    values_1d_.resize(nodes_1d_.size());
    parallel_for(nodes_1d_.size(), [&](std::size_t i) {
      const double s = nodes_1d_[i].s;
      const double r = kernel_.r0(s);
      values_1d_[i] = r == 0.0 ? cplx(0.0)
                               : nodes_1d_[i].w * r *
                                     centred_power(model_.psi_minus_one(std::span<const double>(&s, 1)), n_,
                                                   s * shift_[0]);
    });
    return;
  }

  // d = 2: bounding box of {|Psi|^n > cutoff} from a grid scan of [-eps, eps]^2.
  const double floor = std::log(opt_.cutoff);
  const double step = eps / kScan2d;
  std::vector<int> reach(2, 0);
  for (int a = -kScan2d; a <= kScan2d; ++a) {
    for (int b = -kScan2d; b <= kScan2d; ++b) {
      const double s[2] = {a * step, b * step};
      if (log_abs_power(model_.psi_minus_one(s), n) > floor) {
        reach[0] = std::max(reach[0], std::abs(a));
        reach[1] = std::max(reach[1], std::abs(b));
      }
    }
  }
  support_ = {std::min(eps, (reach[0] + 1) * step), std::min(eps, (reach[1] + 1) * step)};
}

FourierOracle::PowerRows::PowerRows(const FourierOracle& o, const std::vector<QuadNode>& ax,
                                    const std::vector<QuadNode>& ay)
    : o_(o), ax_(ax), ay_(ay),
      separable_(o.model_.mode() == CharFnModel::Mode::exact && o.model_.law().axis_separable()) {
  if (!separable_) return;
  for (const auto& q : ax) ux_.push_back(o.model_.law().axis_part(0, q.s));
  for (const auto& q : ay) uy_.push_back(o.model_.law().axis_part(1, q.s));
}

cplx FourierOracle::PowerRows::operator()(std::size_t a, std::size_t b) const {
  cplx u;
  if (separable_) {
    u = ux_[a] + uy_[b];
  } else {
    const double s[2] = {ax_[a].s, ay_[b].s};
    u = o_.model_.psi_minus_one(s);
  }
  return std::exp(static_cast<double>(o_.n_) * log1p_complex(u));
}

FourierOracle::Value FourierOracle::evaluate(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != model_.dim()) throw DomainError("query dimension mismatch");
  cplx total = 0.0;
  Value out;
  if (model_.dim() == 1) {
    // Fixed-size chunks summed in index order keep the result independent of threads.
    constexpr std::size_t kChunk = 1 << 14;
    const std::size_t chunks = (nodes_1d_.size() + kChunk - 1) / kChunk;
    std::vector<cplx> partial(chunks);
    parallel_for(chunks, [&](std::size_t c) {
      cplx acc = 0.0;
      const std::size_t end = std::min(nodes_1d_.size(), (c + 1) * kChunk);
      for (std::size_t i = c * kChunk; i < end; ++i)
        acc += values_1d_[i] * std::polar(1.0, -nodes_1d_[i].s * x[0]);
      partial[c] = acc;
    });
    for (const auto& p : partial) total += p;
    out.nodes = nodes_1d_.size();
  } else {
    const auto ax = oracle_axis_nodes(support_[0], std::abs(x[0]), opt_.min_nodes_2d, opt_.per_panel,
                                      opt_.node_scale);
    const auto ay = oracle_axis_nodes(support_[1], std::abs(x[1]), opt_.min_nodes_2d, opt_.per_panel,
                                      opt_.node_scale);
    // Per-axis factors: weight * r0 * e^{-i s (x + b)}.
    auto axis_factor = [&](const std::vector<QuadNode>& nodes, int j) {
      std::vector<cplx> f(nodes.size());
      for (std::size_t i = 0; i < nodes.size(); ++i)
        f[i] = nodes[i].w * kernel_.r0(nodes[i].s) * std::polar(1.0, -nodes[i].s * (x[j] + shift_[j]));
      return f;
    };
    const auto fx = axis_factor(ax, 0);
    const auto fy = axis_factor(ay, 1);
    const PowerRows power(*this, ax, ay);
    std::vector<cplx> rows(ax.size());
    parallel_for(ax.size(), [&](std::size_t a) {
      if (fx[a] == 0.0) return;
      cplx acc = 0.0;
      for (std::size_t b = 0; b < ay.size(); ++b)
        if (fy[b] != 0.0) acc += fy[b] * power(a, b);
      rows[a] = fx[a] * acc;
    });
    for (const auto& r : rows) total += r;
    out.nodes = ax.size() * ay.size();
  }
  out.re = total.real();
  out.im = total.imag();
  if (!(std::abs(out.im) < opt_.imag_tol) || !std::isfinite(out.re)) {
    std::ostringstream os;
    os << "Fourier bound not resolved: imaginary residue " << out.im << " at n=" << n_;
    throw NumericalError(os.str());
  }
  return out;
}

double fourier_bound(const CharFnModel& model, const SmoothingKernel& kernel, long n,
                     std::span<const double> x, OracleOptions opt) {
  const auto shift = compute_b_n(model.law(), n);
  double max_abs = 0.0;
  for (double v : x) max_abs = std::max(max_abs, std::abs(v));
  const FourierOracle oracle(model, kernel, n, shift, max_abs, opt);
  return oracle.evaluate(x).re;
}

OracleVerdict bound_vs_mc(double bound, double ci_lo) {
  return {ci_lo <= 0.0 || ci_lo <= bound, bound - ci_lo};
}

}  // namespace lld
