#pragma once

#include <atomic>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace lld {

using cplx = std::complex<double>;

/// Raised when an input violates a documented precondition (e.g. alpha = 1).
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a numerical procedure fails to reach its stated tolerance.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr double kPi = 3.14159265358979323846;

/// The stability index alpha = 1 is excluded throughout; alpha must lie in (0,1) or (1,2].
void require_supported_alpha(double alpha);

/// Process-wide cap on worker threads (the CLI `--threads` flag sets it).
void set_max_threads(unsigned n);
unsigned max_threads();

/// Runs fn(i) for i in [0, count) on up to max_threads() workers. Work items are
/// claimed dynamically; callers must write results into per-index slots so that
/// the outcome does not depend on scheduling.
template <class F>
void parallel_for(std::size_t count, F&& fn) {
  const unsigned workers =
      static_cast<unsigned>(std::min<std::size_t>(max_threads(), count));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace lld
