#include "lld/smoothing.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "lld/common.hpp"
#include "lld/quadrature.hpp"
#include "lld/tail_cf.hpp"

namespace lld {

namespace {

constexpr int kHalfGrid = 1 << 14;  // intervals on [0, eps]
constexpr int kBumpNodes = 256;
constexpr std::uint64_t kCacheMagic = 0x6c6c646b65726e31ULL;  // "lldkern1"

double bump(double xi, double eps) {
  const double t = 2.0 * xi / eps;
  if (std::abs(t) >= 1.0) return 0.0;
  return std::exp(-1.0 / (1.0 - t * t));
}

std::filesystem::path cache_path(double eps) {
  const char* dir = std::getenv("LLD_CACHE_DIR");
  if (!dir || !*dir) return {};
  std::uint64_t bits;
  std::memcpy(&bits, &eps, sizeof bits);
  std::ostringstream name;
  name << "kernel-" << std::hex << bits << ".bin";
  return std::filesystem::path(dir) / name.str();
}

bool load_cached(const std::filesystem::path& path, double eps, double& a, double& K,
                 std::vector<double>& hat) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return false;
  std::uint64_t magic = 0, count = 0;
  double e = 0.0;
  in.read(reinterpret_cast<char*>(&magic), sizeof magic);
  in.read(reinterpret_cast<char*>(&e), sizeof e);
  in.read(reinterpret_cast<char*>(&a), sizeof a);
  in.read(reinterpret_cast<char*>(&K), sizeof K);
  in.read(reinterpret_cast<char*>(&count), sizeof count);
  if (!in || magic != kCacheMagic || e != eps || count != kHalfGrid + 1) return false;
  hat.resize(count);
  in.read(reinterpret_cast<char*>(hat.data()), static_cast<std::streamsize>(count * sizeof(double)));
  return static_cast<bool>(in);
}

void store_cached(const std::filesystem::path& path, double eps, double a, double K,
                  const std::vector<double>& hat) {
  std::error_code ec;
  std::filesystem::create_directories(path.parent_path(), ec);
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) return;
    const std::uint64_t count = hat.size();
    out.write(reinterpret_cast<const char*>(&kCacheMagic), sizeof kCacheMagic);
    out.write(reinterpret_cast<const char*>(&eps), sizeof eps);
    out.write(reinterpret_cast<const char*>(&a), sizeof a);
    out.write(reinterpret_cast<const char*>(&K), sizeof K);
    out.write(reinterpret_cast<const char*>(&count), sizeof count);
    out.write(reinterpret_cast<const char*>(hat.data()), static_cast<std::streamsize>(count * sizeof(double)));
  }
  std::filesystem::rename(tmp, path, ec);
}

}  // namespace

double SmoothingKernel::base_g(double x) const {
  // g(x) = (1/pi) int_0^{eps/2} bump(xi) cos(x xi) d xi
  double acc = 0.0;
  for (std::size_t i = 0; i < bump_nodes_.size(); ++i) acc += bump_weights_[i] * std::cos(x * bump_nodes_[i]);
  return acc / kPi;
}

double SmoothingKernel::gamma0(double y) const {
  const double v = K_ * base_g(a_ * y);
  return v * v;
}

double SmoothingKernel::gamma0_hat(double xi) const {
  const double u = std::abs(xi) / step_;
  if (u >= kHalfGrid) return 0.0;
  // 4-point Lagrange on nodes i-1..i+2 (mirrored across 0 by evenness).
  const int i = static_cast<int>(u);
  const double t = u - i;
  auto at = [&](int j) { return hat_[std::min(std::abs(j), kHalfGrid)]; };
  const double f0 = at(i - 1), f1 = at(i), f2 = at(i + 1), f3 = at(i + 2);
  return f0 * (-t * (t - 1.0) * (t - 2.0) / 6.0) + f1 * ((t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0) +
         f2 * (-(t + 1.0) * t * (t - 2.0) / 2.0) + f3 * ((t + 1.0) * t * (t - 1.0) / 6.0);
}

double SmoothingKernel::r0(double s) const {
  if (std::abs(s) >= eps_) return 0.0;
  return sinc(s) * gamma0_hat(s) / (2.0 * kPi);
}

double SmoothingKernel::r(std::span<const double> s) const {
  double v = 1.0;
  for (double sj : s) {
    v *= r0(sj);
    if (v == 0.0) break;
  }
  return v;
}

double eval_r(const SmoothingKernel& kernel, std::span<const double> s) { return kernel.r(s); }

double SmoothingKernel::smoothed_indicator(double z) const {
  return 0.5 * quad::integrate_gl([&](double t) { return gamma0(z - t); }, -1.0, 1.0, 64);
}

SmoothingKernel build_kernel(double eps) {
  if (!(eps > 0.0 && eps <= kPi / 4.0 + 1e-15)) throw DomainError("kernel band limit eps must lie in (0, pi/4]");
  SmoothingKernel k;
  k.eps_ = eps;
  k.step_ = eps / kHalfGrid;
  const auto& rule = quad::gauss_legendre(kBumpNodes);
  const double half = 0.25 * eps;  // [0, eps/2] mapped from [-1, 1]
  for (int i = 0; i < kBumpNodes; ++i) {
    const double xi = half * (rule.nodes[i] + 1.0);
    k.bump_nodes_.push_back(xi);
    k.bump_weights_.push_back(half * rule.weights[i] * bump(xi, eps));
  }

  const auto path = cache_path(eps);
  if (!path.empty() && load_cached(path, eps, k.a_, k.K_, k.hat_)) return k;

  // Step 3: dilation so that g(a x) > 0 on [-2, 2].
  auto min_on_core = [&](double a) {
    double m = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= 10000; ++i) m = std::min(m, k.base_g(a * (-2.0 + 4.0 * i / 10000.0)));
    return m;
  };
  double a = 1.0;
  while (!(min_on_core(a) > 0.0)) {
    a *= 0.9;
    if (a < 1e-3) throw NumericalError("kernel step 3 (dilation): no dilation makes g positive on [-2,2]");
  }
  k.a_ = a;
  // Step 4: scale so that K g(a x) >= 1 on [-2, 2].
  k.K_ = 1.0 / min_on_core(a);

  // Step 5: gamma0_hat = (1/2pi) (K bump_a) * (K bump_a), bump_a(xi) = bump(xi/a)/a.
  std::vector<double> f(kHalfGrid + 1);
  for (int i = 0; i <= kHalfGrid; ++i) f[i] = bump(i * k.step_ / a, eps) / a;
  const int support = static_cast<int>(std::ceil(0.5 * a * eps / k.step_));
  auto fa = [&](int j) { return std::abs(j) > support ? 0.0 : f[std::abs(j)]; };
  k.hat_.assign(kHalfGrid + 1, 0.0);
  const double pref = k.K_ * k.K_ * k.step_ / (2.0 * kPi);
  parallel_for(kHalfGrid + 1, [&](std::size_t i) {
    const int ii = static_cast<int>(i);
    double acc = 0.0;
    for (int j = std::max(-support, ii - support); j <= std::min(support, ii + support); ++j)
      acc += fa(j) * fa(ii - j);
    k.hat_[i] = pref * acc;
  });

  const auto cert = certify_kernel(k);
  if (cert.min_gamma0_core < 1.0 - 1e-12)
    throw NumericalError("kernel step 4 (scaling): gamma0 < 1 somewhere on [-2,2]");
  if (cert.parseval_error > 1e-6)
    throw NumericalError("kernel step 5 (self-convolution): Parseval check failed");
  if (!path.empty()) store_cached(path, eps, k.a_, k.K_, k.hat_);
  return k;
}

bool KernelCertificate::ok() const {
  return min_gamma0_core >= 1.0 - 1e-12 && min_gamma0_wide >= 0.0 && parseval_error <= 1e-6 &&
         support_value == 0.0 && c2_drift < 0.05 && min_indicator_core >= 1.0 - 1e-9;
}

KernelCertificate certify_kernel(const SmoothingKernel& k) {
  KernelCertificate c;
  c.min_gamma0_core = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 10000; ++i)
    c.min_gamma0_core = std::min(c.min_gamma0_core, k.gamma0(-2.0 + 4.0 * i / 9999.0));
  c.min_gamma0_wide = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= 20000; ++i)
    c.min_gamma0_wide = std::min(c.min_gamma0_wide, k.gamma0(-50.0 + 100.0 * i / 20000.0));
  // Trapezoid over the even grid: spectrally accurate for a smooth compactly supported integrand.
  const auto& hat = k.gamma0_hat_samples();
  double integral = hat[0];
  for (std::size_t i = 1; i < hat.size(); ++i) integral += 2.0 * hat[i];
  integral *= k.grid_step();
  c.parseval_error = std::abs(integral / (2.0 * kPi) - k.gamma0(0.0));
  c.support_value = 0.0;
  for (double f : {1.0 + 1e-12, 1.01, 1.5, 3.0}) c.support_value = std::max(c.support_value, std::abs(k.r0(f * k.epsilon())));
  auto max_second = [&](double h) {
    double m = 0.0;
    for (double s = -k.epsilon(); s <= k.epsilon(); s += k.epsilon() / 512.0)
      m = std::max(m, std::abs(k.r0(s + h) - 2.0 * k.r0(s) + k.r0(s - h)) / (h * h));
    return m;
  };
  const double coarse = max_second(k.epsilon() / 256.0);
  const double fine = max_second(k.epsilon() / 512.0);
  c.c2_drift = std::abs(fine - coarse) / std::max(fine, 1e-300);
  c.min_indicator_core = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= 200; ++i)
    c.min_indicator_core = std::min(c.min_indicator_core, k.smoothed_indicator(-1.0 + 2.0 * i / 200.0));
  return c;
}

}  // namespace lld
