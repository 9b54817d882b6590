// AVX2 + FMA kernels. This translation unit is compiled with -mavx2 -mfma and
// must only be entered after the runtime CPU check in dispatch.cpp.

#include <immintrin.h>

#include <cmath>

#include "kernels_internal.hpp"

namespace ehrenfest::kernels::detail {

namespace {

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

double sum_avx2(const double* x, std::size_t n) {
  __m256d a0 = _mm256_setzero_pd();
  __m256d a1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    a0 = _mm256_add_pd(a0, _mm256_loadu_pd(x + i));
    a1 = _mm256_add_pd(a1, _mm256_loadu_pd(x + i + 4));
  }
  double acc = hsum(_mm256_add_pd(a0, a1));
  for (; i < n; ++i) acc += x[i];
  return acc;
}

double sum_sq_dev_avx2(const double* x, std::size_t n, double mean) {
  const __m256d m = _mm256_set1_pd(mean);
  __m256d a0 = _mm256_setzero_pd();
  __m256d a1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256d d0 = _mm256_sub_pd(_mm256_loadu_pd(x + i), m);
    const __m256d d1 = _mm256_sub_pd(_mm256_loadu_pd(x + i + 4), m);
    a0 = _mm256_fmadd_pd(d0, d0, a0);
    a1 = _mm256_fmadd_pd(d1, d1, a1);
  }
  double acc = hsum(_mm256_add_pd(a0, a1));
  for (; i < n; ++i) {
    const double d = x[i] - mean;
    acc += d * d;
  }
  return acc;
}

double dot_avx2(const double* x, const double* y, std::size_t n) {
  __m256d a0 = _mm256_setzero_pd();
  __m256d a1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    a0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), a0);
    a1 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i + 4), _mm256_loadu_pd(y + i + 4), a1);
  }
  double acc = hsum(_mm256_add_pd(a0, a1));
  for (; i < n; ++i) acc += x[i] * y[i];
  return acc;
}

void axpy_avx2(double a, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  }
  for (; i < n; ++i) y[i] += a * x[i];
}

void xpby_avx2(const double* x, double b, double* y, std::size_t n) {
  const __m256d vb = _mm256_set1_pd(b);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(vb, _mm256_loadu_pd(y + i), _mm256_loadu_pd(x + i)));
  }
  for (; i < n; ++i) y[i] = x[i] + b * y[i];
}

// exp(v) for v <= 0: v = k ln2 + r with |r| <= ln2/2, degree-13 Taylor
// polynomial for e^r, then scale by 2^k through the exponent field.
inline __m256d exp_nonpositive(__m256d v) {
  const __m256d lower = _mm256_set1_pd(-708.0);
  const __m256d underflow = _mm256_cmp_pd(v, lower, _CMP_LT_OQ);
  v = _mm256_max_pd(v, lower);

  const __m256d log2e = _mm256_set1_pd(1.4426950408889634);
  const __m256d ln2_hi = _mm256_set1_pd(6.93145751953125e-1);
  const __m256d ln2_lo = _mm256_set1_pd(1.42860682030941723212e-6);
  const __m256d k = _mm256_round_pd(_mm256_mul_pd(v, log2e), _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
  __m256d r = _mm256_fnmadd_pd(k, ln2_hi, v);
  r = _mm256_fnmadd_pd(k, ln2_lo, r);

  static constexpr double kInvFactorial[14] = {
      1.0,
      1.0,
      1.0 / 2.0,
      1.0 / 6.0,
      1.0 / 24.0,
      1.0 / 120.0,
      1.0 / 720.0,
      1.0 / 5040.0,
      1.0 / 40320.0,
      1.0 / 362880.0,
      1.0 / 3628800.0,
      1.0 / 39916800.0,
      1.0 / 479001600.0,
      1.0 / 6227020800.0,
  };
  __m256d p = _mm256_set1_pd(kInvFactorial[13]);
  for (int i = 12; i >= 0; --i) p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(kInvFactorial[i]));

  // 2^k: k + 1.5*2^52 puts k in the low mantissa bits.
  const __m256d magic = _mm256_set1_pd(6755399441055744.0);
  const __m256i ki = _mm256_sub_epi64(_mm256_castpd_si256(_mm256_add_pd(k, magic)),
                                      _mm256_castpd_si256(magic));
  const __m256i bits = _mm256_slli_epi64(_mm256_add_epi64(ki, _mm256_set1_epi64x(1023)), 52);
  const __m256d scaled = _mm256_mul_pd(p, _mm256_castsi256_pd(bits));
  return _mm256_andnot_pd(underflow, scaled);
}

void exp_neg_scaled_avx2(const double* x, double rate, double* out, std::size_t n) {
  const __m256d neg_rate = _mm256_set1_pd(-rate);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(out + i, exp_nonpositive(_mm256_mul_pd(neg_rate, _mm256_loadu_pd(x + i))));
  }
  for (; i < n; ++i) out[i] = std::exp(-rate * x[i]);
}

void gather_apply_avx2(const std::int32_t* nbr, std::size_t rows, std::size_t degree,
                       const double* x, double coef, double* y) {
  const __m256d vc = _mm256_set1_pd(coef);
  std::size_t r = 0;
  for (; r + 4 <= rows; r += 4) {
    __m256d acc = _mm256_setzero_pd();
    for (std::size_t j = 0; j < degree; ++j) {
      const __m128i idx = _mm_loadu_si128(reinterpret_cast<const __m128i*>(nbr + j * rows + r));
      acc = _mm256_add_pd(acc, _mm256_i32gather_pd(x, idx, 8));
    }
    _mm256_storeu_pd(y + r, _mm256_fnmadd_pd(vc, acc, _mm256_loadu_pd(x + r)));
  }
  for (; r < rows; ++r) {
    double acc = 0.0;
    for (std::size_t j = 0; j < degree; ++j) acc += x[nbr[j * rows + r]];
    y[r] = x[r] - coef * acc;
  }
}

}  // namespace

const KernelTable kAvx2Table{
    Isa::Avx2,          "avx2",          sum_avx2,
    sum_sq_dev_avx2,    dot_avx2,        axpy_avx2,
    xpby_avx2,          exp_neg_scaled_avx2, gather_apply_avx2,
};

}  // namespace ehrenfest::kernels::detail
