#pragma once

#include <cstdint>
#include <limits>

namespace genrl {

// SplitMix64 finalizer. Bijective on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Counter-based generator: draw i of a stream is mix64(key + i * golden).
///
/// A stream is identified by its key alone, so `split(id)` yields independent
/// child streams without touching the parent, and `at(i)` gives random access
/// into the stream. Distributions are implemented here instead of through
/// <random> so that sampled values are identical across standard libraries.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed = 0, std::uint64_t stream = 0) noexcept
      : key_(mix64(seed ^ mix64(stream + 0x632BE59BD9B4E019ULL))) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() noexcept { return at(counter_++); }

  /// Stateless random access; does not advance the counter.
  result_type at(std::uint64_t index) const noexcept {
    return mix64(key_ + index * 0x9E3779B97F4A7C15ULL);
  }

  Rng split(std::uint64_t id) const noexcept {
    Rng child;
    child.key_ = mix64(key_ ^ mix64(id ^ 0xD1B54A32D192ED03ULL));
    return child;
  }

  /// Uniform in [0, 1).
  double uniform() noexcept { return to_unit((*this)()); }
  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n) noexcept {
    __extension__ using u128 = unsigned __int128;
    return static_cast<std::uint64_t>((static_cast<u128>((*this)()) * n) >> 64);
  }

  /// Uniform integer in [lo, hi].
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) noexcept {
    return lo + static_cast<std::int64_t>(below(static_cast<std::uint64_t>(hi - lo) + 1));
  }

  bool bernoulli(double p) noexcept { return uniform() < p; }

  /// Standard normal via Box-Muller; consumes two draws.
  double normal() noexcept;

  std::uint64_t counter() const noexcept { return counter_; }

  static double to_unit(std::uint64_t bits) noexcept {
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
  }

 private:
  std::uint64_t key_ = 0;
  std::uint64_t counter_ = 0;
};

}  // namespace genrl
