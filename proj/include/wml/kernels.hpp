#pragma once

// Data-parallel inner loops of the sum engines. Every kernel exists as a
// portable scalar reference and, when the CPU supports it, as an AVX2+FMA
// variant. `active()` picks one at first use; WML_SIMD=scalar forces the
// reference path.

#include <cstddef>
#include <cstdint>
#include <string_view>

namespace wml::kernels {

/// Structure-of-arrays batch of independent difference tables.
///
/// Lane l owns `depth` unit-modulus rotors stored at re/im[level * lanes + l].
/// Level 0 is e(P(n)) for the current n, level i is e(Delta^i P(n)), and the
/// last level is constant. One step adds w_l(s) * level0 into the lane's
/// accumulator, then multiplies every level by the level above it.
struct RotorBatch {
  std::size_t lanes = 0;
  std::size_t depth = 0;
  double* re = nullptr;
  double* im = nullptr;
  double* acc_re = nullptr;
  double* acc_im = nullptr;
  /// Optional weights. Lane l at step s uses w[w_start[l] + s]; null means
  /// unit weights.
  const double* w_re = nullptr;
  const double* w_im = nullptr;
  const std::int64_t* w_start = nullptr;
};

struct KernelTable {
  std::string_view name;
  /// (cos 2 pi t, sin 2 pi t) for arbitrary finite t.
  void (*cis_turns)(const double* t, double* re, double* im, std::size_t n);
  /// Same for phases given as 64-bit fractions of a turn (phase / 2^64).
  void (*cis_fixed)(const std::uint64_t* phase, double* re, double* im, std::size_t n);
  /// Advances every lane of `batch` by `steps` steps.
  void (*rotor_accumulate)(const RotorBatch& batch, std::size_t steps);
};

const KernelTable& scalar();
/// Null when the AVX2 variants were not compiled in or the CPU lacks AVX2/FMA.
const KernelTable* avx2();
const KernelTable& active();

/// Absolute error bound on each component of the cis kernels, all variants.
inline constexpr double kCisError = 8.0 * 0x1p-53;
/// Absolute rounding bound for one complex product of near-unit operands.
inline constexpr double kRotorStepError = 4.0 * 0x1p-53;

/// 64-bit fraction of a turn to a double in [0, 1), rounded to nearest.
inline double fixed_to_turns(std::uint64_t phase) {
  return static_cast<double>(static_cast<std::uint32_t>(phase >> 32)) * 0x1p-32 +
         static_cast<double>(static_cast<std::uint32_t>(phase)) * 0x1p-64;
}

namespace detail {
const KernelTable* avx2_table();
}

}  // namespace wml::kernels
