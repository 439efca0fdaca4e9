#pragma once

#include <cmath>
#include <cstdint>
#include <limits>

namespace lapdecon {

inline constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

//! Counter-based generator: the i-th output is a bijective mix of key + i*gamma.
//! Child streams are derived from (key, stream id) so that per-replication
//! draws never depend on scheduling order.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  explicit CounterRng(std::uint64_t seed = 0) noexcept : key_(mix64(seed ^ 0x6a09e667f3bcc909ULL)) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept {
    ++counter_;
    return mix64(key_ + counter_ * 0x9e3779b97f4a7c15ULL);
  }

  //! Independent stream keyed by `stream`; does not advance this generator.
  [[nodiscard]] CounterRng split(std::uint64_t stream) const noexcept {
    CounterRng child;
    child.key_ = mix64(key_ ^ mix64(stream + 0xd1b54a32d192ed03ULL));
    return child;
  }

  //! Uniform on the open interval (0, 1).
  double uniform() noexcept {
    return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
  }

  //! Standard Laplace variate by inverse CDF.
  double laplace() noexcept {
    const double u = uniform() - 0.5;
    return u < 0.0 ? std::log1p(2.0 * u) : -std::log1p(-2.0 * u);
  }

  //! Standard normal variate (Box-Muller, one of the pair discarded).
  double normal() noexcept {
    const double u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  }

  [[nodiscard]] std::uint64_t counter() const noexcept { return counter_; }

 private:
  std::uint64_t key_ = 0;
  std::uint64_t counter_ = 0;
};

//! Seed for cell (a, b, c) of an experiment derived from a master seed.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b = 0,
                                 std::uint64_t c = 0) noexcept {
  std::uint64_t s = mix64(master + 0x2545f4914f6cdd1dULL);
  s = mix64(s ^ (a + 0x9e3779b97f4a7c15ULL));
  s = mix64(s ^ (b + 0xc2b2ae3d27d4eb4fULL));
  return mix64(s ^ (c + 0x165667b19e3779f9ULL));
}

}  // namespace lapdecon
