#include <cmath>
#include <cstdlib>
#include <numbers>
#include <string_view>

#include "wml/kernels.hpp"

namespace wml::kernels {
namespace {

inline void cis_one(double t, double& re, double& im) {
  const double r = t - std::nearbyint(t);  // [-1/2, 1/2], exact
  const double a = 2.0 * std::numbers::pi * r;
  re = std::cos(a);
  im = std::sin(a);
}

void cis_turns_scalar(const double* t, double* re, double* im, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) cis_one(t[i], re[i], im[i]);
}

void cis_fixed_scalar(const std::uint64_t* phase, double* re, double* im, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) cis_one(fixed_to_turns(phase[i]), re[i], im[i]);
}

void rotor_accumulate_scalar(const RotorBatch& b, std::size_t steps) {
  const std::size_t L = b.lanes;
  const std::size_t D = b.depth;
  for (std::size_t l = 0; l < L; ++l) {
    double ar = b.acc_re[l];
    double ai = b.acc_im[l];
    for (std::size_t s = 0; s < steps; ++s) {
      const double e0r = b.re[l];
      const double e0i = b.im[l];
      if (b.w_re) {
        const auto w = static_cast<std::size_t>(b.w_start[l]) + s;
        ar += b.w_re[w] * e0r - b.w_im[w] * e0i;
        ai += b.w_re[w] * e0i + b.w_im[w] * e0r;
      } else {
        ar += e0r;
        ai += e0i;
      }
      for (std::size_t lev = 0; lev + 1 < D; ++lev) {
        double& xr = b.re[lev * L + l];
        double& xi = b.im[lev * L + l];
        const double yr = b.re[(lev + 1) * L + l];
        const double yi = b.im[(lev + 1) * L + l];
        const double nr = xr * yr - xi * yi;
        const double ni = xr * yi + xi * yr;
        xr = nr;
        xi = ni;
      }
    }
    b.acc_re[l] = ar;
    b.acc_im[l] = ai;
  }
}

constexpr KernelTable kScalar{"scalar", &cis_turns_scalar, &cis_fixed_scalar, &rotor_accumulate_scalar};

bool force_scalar() {
  const char* env = std::getenv("WML_SIMD");
  return env && std::string_view(env) == "scalar";
}

}  // namespace

const KernelTable& scalar() { return kScalar; }

const KernelTable* avx2() {
#if defined(WML_HAVE_AVX2)
  static const bool supported = [] {
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  }();
  return supported ? detail::avx2_table() : nullptr;
#else
  return nullptr;
#endif
}

const KernelTable& active() {
  static const KernelTable& chosen = [&]() -> const KernelTable& {
    if (force_scalar()) return kScalar;
    if (const KernelTable* t = avx2()) return *t;
    return kScalar;
  }();
  return chosen;
}

}  // namespace wml::kernels
