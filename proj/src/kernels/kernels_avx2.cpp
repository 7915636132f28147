// AVX2/FMA variants. Complex values are interleaved (re, im), so one
// __m256d register carries two complex numbers.

#include <immintrin.h>

#include "kernels_impl.hpp"

namespace optrans::kernels::avx2 {
namespace {

inline __m256d load2(const cplx* p) { return _mm256_loadu_pd(reinterpret_cast<const double*>(p)); }
inline void store2(cplx* p, __m256d v) { _mm256_storeu_pd(reinterpret_cast<double*>(p), v); }

// (re, im) pairs -> (im, re)
inline __m256d swap_ri(__m256d v) { return _mm256_permute_pd(v, 0b0101); }

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

// lane0 - lane1 + lane2 - lane3
inline double hsum_alt(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_sub_sd(s, _mm_unpackhi_pd(s, s)));
}

// alpha * v for a broadcast complex alpha
inline __m256d cmul_bcast(__m256d ar, __m256d ai, __m256d v) {
  return _mm256_fmaddsub_pd(ar, v, _mm256_mul_pd(ai, swap_ri(v)));
}

}  // namespace

cplx dotc(const cplx* a, const cplx* b, std::size_t n) {
  __m256d same0 = _mm256_setzero_pd(), same1 = _mm256_setzero_pd();
  __m256d cross0 = _mm256_setzero_pd(), cross1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d a0 = load2(a + i), b0 = load2(b + i);
    const __m256d a1 = load2(a + i + 2), b1 = load2(b + i + 2);
    same0 = _mm256_fmadd_pd(a0, b0, same0);
    same1 = _mm256_fmadd_pd(a1, b1, same1);
    cross0 = _mm256_fmadd_pd(a0, swap_ri(b0), cross0);
    cross1 = _mm256_fmadd_pd(a1, swap_ri(b1), cross1);
  }
  for (; i + 2 <= n; i += 2) {
    const __m256d a0 = load2(a + i), b0 = load2(b + i);
    same0 = _mm256_fmadd_pd(a0, b0, same0);
    cross0 = _mm256_fmadd_pd(a0, swap_ri(b0), cross0);
  }
  double re = hsum(_mm256_add_pd(same0, same1));
  double im = hsum_alt(_mm256_add_pd(cross0, cross1));
  for (; i < n; ++i) {
    re += a[i].real() * b[i].real() + a[i].imag() * b[i].imag();
    im += a[i].real() * b[i].imag() - a[i].imag() * b[i].real();
  }
  return {re, im};
}

cplx dotu(const cplx* a, const cplx* b, std::size_t n) {
  __m256d same0 = _mm256_setzero_pd(), same1 = _mm256_setzero_pd();
  __m256d cross0 = _mm256_setzero_pd(), cross1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d a0 = load2(a + i), b0 = load2(b + i);
    const __m256d a1 = load2(a + i + 2), b1 = load2(b + i + 2);
    same0 = _mm256_fmadd_pd(a0, b0, same0);
    same1 = _mm256_fmadd_pd(a1, b1, same1);
    cross0 = _mm256_fmadd_pd(a0, swap_ri(b0), cross0);
    cross1 = _mm256_fmadd_pd(a1, swap_ri(b1), cross1);
  }
  for (; i + 2 <= n; i += 2) {
    const __m256d a0 = load2(a + i), b0 = load2(b + i);
    same0 = _mm256_fmadd_pd(a0, b0, same0);
    cross0 = _mm256_fmadd_pd(a0, swap_ri(b0), cross0);
  }
  double re = hsum_alt(_mm256_add_pd(same0, same1));
  double im = hsum(_mm256_add_pd(cross0, cross1));
  for (; i < n; ++i) {
    re += a[i].real() * b[i].real() - a[i].imag() * b[i].imag();
    im += a[i].real() * b[i].imag() + a[i].imag() * b[i].real();
  }
  return {re, im};
}

double norm_sq(const cplx* a, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd(), acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d a0 = load2(a + i), a1 = load2(a + i + 2);
    acc0 = _mm256_fmadd_pd(a0, a0, acc0);
    acc1 = _mm256_fmadd_pd(a1, a1, acc1);
  }
  for (; i + 2 <= n; i += 2) {
    const __m256d a0 = load2(a + i);
    acc0 = _mm256_fmadd_pd(a0, a0, acc0);
  }
  double acc = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) acc += a[i].real() * a[i].real() + a[i].imag() * a[i].imag();
  return acc;
}

void rotate(cplx* x, cplx* y, std::size_t n, double c, double s, cplx ph) {
  const __m256d vc = _mm256_set1_pd(c), vs = _mm256_set1_pd(s);
  const __m256d pr = _mm256_set1_pd(ph.real()), pi = _mm256_set1_pd(ph.imag());
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const __m256d xv = load2(x + i);
    const __m256d py = cmul_bcast(pr, pi, load2(y + i));
    store2(x + i, _mm256_fmsub_pd(vc, xv, _mm256_mul_pd(vs, py)));
    store2(y + i, _mm256_fmadd_pd(vs, xv, _mm256_mul_pd(vc, py)));
  }
  if (i < n) scalar::rotate(x + i, y + i, n - i, c, s, ph);
}

void axpy(cplx alpha, const cplx* x, cplx* y, std::size_t n) {
  const __m256d ar = _mm256_set1_pd(alpha.real()), ai = _mm256_set1_pd(alpha.imag());
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    store2(y + i, _mm256_add_pd(load2(y + i), cmul_bcast(ar, ai, load2(x + i))));
  }
  if (i < n) scalar::axpy(alpha, x + i, y + i, n - i);
}

void mul(const cplx* a, const cplx* b, cplx* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const __m256d av = load2(a + i), bv = load2(b + i);
    const __m256d re = _mm256_movedup_pd(av);
    const __m256d im = _mm256_permute_pd(av, 0b1111);
    store2(out + i, _mm256_fmaddsub_pd(re, bv, _mm256_mul_pd(im, swap_ri(bv))));
  }
  if (i < n) scalar::mul(a + i, b + i, out + i, n - i);
}

}  // namespace optrans::kernels::avx2
