#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace fbmoo {

/// Deterministic uniform generator. All experiment randomness flows through
/// one seeded instance so reports are reproducible bit-for-bit; doubles are
/// derived from raw engine output instead of std distributions, whose
/// sequences differ between standard library implementations.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : state_(seed ? seed : 0x9e3779b97f4a7c15ull) {}

  std::uint64_t next_u64() {
    // xorshift* : small, fast, and identical everywhere.
    std::uint64_t x = state_;
    x ^= x >> 12;
    x ^= x << 25;
    x ^= x >> 27;
    state_ = x;
    return x * 0x2545f4914f6cdd1dull;
  }

  /// Uniform in [0,1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n).
  std::uint64_t integer(std::uint64_t n) { return n ? next_u64() % n : 0; }

private:
  std::uint64_t state_;
};

/// Thread cap: min(FBMOO_THREADS, hardware concurrency), at least 1.
int thread_count();

/// Runs fn(i) for i in [0, n). Results must only depend on i, never on the
/// partition, so output is identical for any thread count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

inline void require(bool cond, const std::string& message) {
  if (!cond) throw std::invalid_argument(message);
}

} // namespace fbmoo
