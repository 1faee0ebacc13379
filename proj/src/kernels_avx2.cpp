// AVX2 + FMA variants. This translation unit is compiled with -mavx2 -mfma
// and only entered after a runtime CPU check.

#include <immintrin.h>

#include <cmath>
#include <cstdint>

#include "wml/kernels.hpp"

namespace wml::kernels {
namespace {

// 2 pi as an unevaluated double-double sum.
constexpr double kTwoPiHi = 6.28318530717958623200e+00;
constexpr double kTwoPiLo = 2.44929359829470635445e-16;

// Taylor coefficients, |x| <= pi/4; truncation error below 5e-17.
constexpr double kS3 = -1.0 / 6.0;
constexpr double kS5 = 1.0 / 120.0;
constexpr double kS7 = -1.0 / 5040.0;
constexpr double kS9 = 1.0 / 362880.0;
constexpr double kS11 = -1.0 / 39916800.0;
constexpr double kS13 = 1.0 / 6227020800.0;
constexpr double kS15 = -1.0 / 1307674368000.0;
constexpr double kC2 = -0.5;
constexpr double kC4 = 1.0 / 24.0;
constexpr double kC6 = -1.0 / 720.0;
constexpr double kC8 = 1.0 / 40320.0;
constexpr double kC10 = -1.0 / 3628800.0;
constexpr double kC12 = 1.0 / 479001600.0;
constexpr double kC14 = -1.0 / 87178291200.0;
constexpr double kC16 = 1.0 / 20922789888000.0;

inline void cis4(__m256d t, __m256d& out_re, __m256d& out_im) {
  const __m256d q = _mm256_round_pd(_mm256_mul_pd(t, _mm256_set1_pd(4.0)),
                                    _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
  const __m256d r = _mm256_fnmadd_pd(q, _mm256_set1_pd(0.25), t);  // [-1/8, 1/8]
  const __m256d x = _mm256_fmadd_pd(r, _mm256_set1_pd(kTwoPiHi), _mm256_mul_pd(r, _mm256_set1_pd(kTwoPiLo)));
  const __m256d x2 = _mm256_mul_pd(x, x);

  __m256d s = _mm256_set1_pd(kS15);
  s = _mm256_fmadd_pd(s, x2, _mm256_set1_pd(kS13));
  s = _mm256_fmadd_pd(s, x2, _mm256_set1_pd(kS11));
  s = _mm256_fmadd_pd(s, x2, _mm256_set1_pd(kS9));
  s = _mm256_fmadd_pd(s, x2, _mm256_set1_pd(kS7));
  s = _mm256_fmadd_pd(s, x2, _mm256_set1_pd(kS5));
  s = _mm256_fmadd_pd(s, x2, _mm256_set1_pd(kS3));
  s = _mm256_mul_pd(s, x2);
  s = _mm256_fmadd_pd(s, x, x);

  __m256d c = _mm256_set1_pd(kC16);
  c = _mm256_fmadd_pd(c, x2, _mm256_set1_pd(kC14));
  c = _mm256_fmadd_pd(c, x2, _mm256_set1_pd(kC12));
  c = _mm256_fmadd_pd(c, x2, _mm256_set1_pd(kC10));
  c = _mm256_fmadd_pd(c, x2, _mm256_set1_pd(kC8));
  c = _mm256_fmadd_pd(c, x2, _mm256_set1_pd(kC6));
  c = _mm256_fmadd_pd(c, x2, _mm256_set1_pd(kC4));
  c = _mm256_fmadd_pd(c, x2, _mm256_set1_pd(kC2));
  c = _mm256_fmadd_pd(c, x2, _mm256_set1_pd(1.0));

  // Quadrant fix-up: q mod 4 selects (c,s), (-s,c), (-c,-s), (s,-c).
  const __m256i qi = _mm256_cvtepi32_epi64(_mm256_cvtpd_epi32(q));
  const __m256i one = _mm256_set1_epi64x(1);
  const __m256i two = _mm256_set1_epi64x(2);
  const __m256d swap = _mm256_castsi256_pd(_mm256_cmpeq_epi64(_mm256_and_si256(qi, one), one));
  const __m256d sign_c = _mm256_castsi256_pd(
      _mm256_slli_epi64(_mm256_and_si256(_mm256_add_epi64(qi, one), two), 62));
  const __m256d sign_s = _mm256_castsi256_pd(_mm256_slli_epi64(_mm256_and_si256(qi, two), 62));
  const __m256d cc = _mm256_blendv_pd(c, s, swap);
  const __m256d ss = _mm256_blendv_pd(s, c, swap);
  out_re = _mm256_xor_pd(cc, sign_c);
  out_im = _mm256_xor_pd(ss, sign_s);
}

inline __m256d fixed4_to_turns(__m256i p) {
  // Each 32-bit half becomes an exact double via the 2^52 exponent trick.
  const __m256i magic_bits = _mm256_set1_epi64x(0x4330000000000000LL);
  const __m256d magic = _mm256_castsi256_pd(magic_bits);
  const __m256i lo = _mm256_and_si256(p, _mm256_set1_epi64x(0xffffffffLL));
  const __m256i hi = _mm256_srli_epi64(p, 32);
  const __m256d dlo = _mm256_sub_pd(_mm256_castsi256_pd(_mm256_or_si256(lo, magic_bits)), magic);
  const __m256d dhi = _mm256_sub_pd(_mm256_castsi256_pd(_mm256_or_si256(hi, magic_bits)), magic);
  return _mm256_fmadd_pd(dhi, _mm256_set1_pd(0x1p-32), _mm256_mul_pd(dlo, _mm256_set1_pd(0x1p-64)));
}

inline void cis_tail(double t, double& re, double& im) {
  alignas(32) double buf[4] = {t, 0.0, 0.0, 0.0};
  alignas(32) double r[4], i[4];
  __m256d vr, vi;
  cis4(_mm256_load_pd(buf), vr, vi);
  _mm256_store_pd(r, vr);
  _mm256_store_pd(i, vi);
  re = r[0];
  im = i[0];
}

void cis_turns_avx2(const double* t, double* re, double* im, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d r, s;
    cis4(_mm256_loadu_pd(t + i), r, s);
    _mm256_storeu_pd(re + i, r);
    _mm256_storeu_pd(im + i, s);
  }
  for (; i < n; ++i) cis_tail(t[i], re[i], im[i]);
}

void cis_fixed_avx2(const std::uint64_t* phase, double* re, double* im, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256i p = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(phase + i));
    __m256d r, s;
    cis4(fixed4_to_turns(p), r, s);
    _mm256_storeu_pd(re + i, r);
    _mm256_storeu_pd(im + i, s);
  }
  for (; i < n; ++i) cis_tail(fixed_to_turns(phase[i]), re[i], im[i]);
}

// G vectors of 4 lanes advanced together to hide the multiply latency chain.
template <int D, int G>
void rotor_lanes(const RotorBatch& b, std::size_t l0, std::size_t steps) {
  const std::size_t L = b.lanes;
  __m256d xr[G][D], xi[G][D], ar[G], ai[G];
  __m256i ws[G];
  for (int g = 0; g < G; ++g) {
    const std::size_t l = l0 + 4 * static_cast<std::size_t>(g);
    for (int lev = 0; lev < D; ++lev) {
      xr[g][lev] = _mm256_loadu_pd(b.re + lev * L + l);
      xi[g][lev] = _mm256_loadu_pd(b.im + lev * L + l);
    }
    ar[g] = _mm256_loadu_pd(b.acc_re + l);
    ai[g] = _mm256_loadu_pd(b.acc_im + l);
    if (b.w_re) ws[g] = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(b.w_start + l));
  }
  const __m256i inc = _mm256_set1_epi64x(1);
  for (std::size_t s = 0; s < steps; ++s) {
    for (int g = 0; g < G; ++g) {
      if (b.w_re) {
        const __m256d wr = _mm256_i64gather_pd(b.w_re, ws[g], 8);
        const __m256d wi = _mm256_i64gather_pd(b.w_im, ws[g], 8);
        ar[g] = _mm256_fmadd_pd(wr, xr[g][0], ar[g]);
        ar[g] = _mm256_fnmadd_pd(wi, xi[g][0], ar[g]);
        ai[g] = _mm256_fmadd_pd(wr, xi[g][0], ai[g]);
        ai[g] = _mm256_fmadd_pd(wi, xr[g][0], ai[g]);
        ws[g] = _mm256_add_epi64(ws[g], inc);
      } else {
        ar[g] = _mm256_add_pd(ar[g], xr[g][0]);
        ai[g] = _mm256_add_pd(ai[g], xi[g][0]);
      }
      for (int lev = 0; lev + 1 < D; ++lev) {
        const __m256d yr = xr[g][lev + 1];
        const __m256d yi = xi[g][lev + 1];
        const __m256d nr = _mm256_fmsub_pd(xr[g][lev], yr, _mm256_mul_pd(xi[g][lev], yi));
        const __m256d ni = _mm256_fmadd_pd(xr[g][lev], yi, _mm256_mul_pd(xi[g][lev], yr));
        xr[g][lev] = nr;
        xi[g][lev] = ni;
      }
    }
  }
  for (int g = 0; g < G; ++g) {
    const std::size_t l = l0 + 4 * static_cast<std::size_t>(g);
    for (int lev = 0; lev < D; ++lev) {
      _mm256_storeu_pd(b.re + lev * L + l, xr[g][lev]);
      _mm256_storeu_pd(b.im + lev * L + l, xi[g][lev]);
    }
    _mm256_storeu_pd(b.acc_re + l, ar[g]);
    _mm256_storeu_pd(b.acc_im + l, ai[g]);
  }
}

void rotor_lane_scalar(const RotorBatch& b, std::size_t l, std::size_t steps) {
  const std::size_t L = b.lanes;
  double ar = b.acc_re[l], ai = b.acc_im[l];
  for (std::size_t s = 0; s < steps; ++s) {
    const double e0r = b.re[l], e0i = b.im[l];
    if (b.w_re) {
      const auto w = static_cast<std::size_t>(b.w_start[l]) + s;
      ar = std::fma(b.w_re[w], e0r, ar);
      ar = std::fma(-b.w_im[w], e0i, ar);
      ai = std::fma(b.w_re[w], e0i, ai);
      ai = std::fma(b.w_im[w], e0r, ai);
    } else {
      ar += e0r;
      ai += e0i;
    }
    for (std::size_t lev = 0; lev + 1 < b.depth; ++lev) {
      double& xr = b.re[lev * L + l];
      double& xi = b.im[lev * L + l];
      const double yr = b.re[(lev + 1) * L + l], yi = b.im[(lev + 1) * L + l];
      const double nr = std::fma(xr, yr, -(xi * yi));
      const double ni = std::fma(xr, yi, xi * yr);
      xr = nr;
      xi = ni;
    }
  }
  b.acc_re[l] = ar;
  b.acc_im[l] = ai;
}

template <int D>
void rotor_depth(const RotorBatch& b, std::size_t steps) {
  constexpr int G = D <= 3 ? 2 : 1;
  std::size_t l = 0;
  for (; l + 4 * G <= b.lanes; l += 4 * G) rotor_lanes<D, G>(b, l, steps);
  for (; l + 4 <= b.lanes; l += 4) rotor_lanes<D, 1>(b, l, steps);
  for (; l < b.lanes; ++l) rotor_lane_scalar(b, l, steps);
}

void rotor_accumulate_avx2(const RotorBatch& b, std::size_t steps) {
  switch (b.depth) {
    case 1: return rotor_depth<1>(b, steps);
    case 2: return rotor_depth<2>(b, steps);
    case 3: return rotor_depth<3>(b, steps);
    case 4: return rotor_depth<4>(b, steps);
    case 5: return rotor_depth<5>(b, steps);
    case 6: return rotor_depth<6>(b, steps);
    case 7: return rotor_depth<7>(b, steps);
    case 8: return rotor_depth<8>(b, steps);
    case 9: return rotor_depth<9>(b, steps);
    default:
      for (std::size_t l = 0; l < b.lanes; ++l) rotor_lane_scalar(b, l, steps);
  }
}

constexpr KernelTable kAvx2{"avx2", &cis_turns_avx2, &cis_fixed_avx2, &rotor_accumulate_avx2};

}  // namespace

namespace detail {
const KernelTable* avx2_table() { return &kAvx2; }
}  // namespace detail

}  // namespace wml::kernels
