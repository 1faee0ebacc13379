#pragma once

#include <cstdint>

namespace wml {

/// Counter-based generator: the n-th draw of stream (seed, stream_id) is a
/// pure function of its arguments, so per-sample streams can be consumed on
/// any thread in any order with identical results.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream) noexcept
      : key_(mix(seed ^ mix(stream + 0x632be59bd9b4e019ULL))) {}

  std::uint64_t at(std::uint64_t counter) const noexcept {
    return mix(key_ + counter * 0x9e3779b97f4a7c15ULL);
  }

  std::uint64_t next() noexcept { return at(counter_++); }

  /// Uniform on [0, 1) with 53 random bits; every value is a multiple of
  /// 2^-53 and therefore exact in the 64-bit fixed-point phase format.
  double uniform() noexcept { return static_cast<double>(next() >> 11) * 0x1p-53; }

  /// Independent child stream.
  CounterRng split(std::uint64_t child) const noexcept { return CounterRng(key_, child); }

 private:
  static std::uint64_t mix(std::uint64_t z) noexcept {
    // splitmix64 finalizer
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace wml
