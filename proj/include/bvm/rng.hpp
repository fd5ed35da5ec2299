#pragma once

#include <cstdint>
#include <initializer_list>
#include <limits>

namespace bvm {

/// SplitMix64 finalizer. Bijective on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Derives an independent stream key from a base seed and a path of counters,
/// e.g. derive_seed(base, {n_index, replicate}). The result depends only on the
/// arguments, never on evaluation order or thread assignment.
constexpr std::uint64_t derive_seed(std::uint64_t base,
                                    std::initializer_list<std::uint64_t> path) noexcept {
  std::uint64_t key = mix64(base ^ 0x6a09e667f3bcc909ULL);
  for (std::uint64_t step : path) {
    key = mix64(key + 0x9e3779b97f4a7c15ULL * (step + 1));
  }
  return key;
}

/// Counter-based generator: output i is mix64(key + (i + 1) * gamma).
/// Satisfies UniformRandomBitGenerator, so it composes with <random>
/// distributions. Construction is free, which makes one engine per draw cheap.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  explicit constexpr CounterRng(std::uint64_t key) noexcept : key_(key) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  constexpr result_type operator()() noexcept {
    counter_ += 0x9e3779b97f4a7c15ULL;
    return mix64(key_ + counter_);
  }

  constexpr std::uint64_t key() const noexcept { return key_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace bvm
