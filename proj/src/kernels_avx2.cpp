// AVX2+FMA variants. This translation unit is compiled with -mavx2 -mfma;
// callers must check avx2_available() before dispatching here.

#include "handgeo/kernels.hpp"

#ifdef HANDGEO_HAVE_AVX2

#include <immintrin.h>

#include <limits>

namespace handgeo::kernels::avx2 {

namespace {

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(lo, _mm_unpackhi_pd(lo, lo)));
}

inline double hmax(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_max_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_max_sd(lo, _mm_unpackhi_pd(lo, lo)));
}

}  // namespace

double sum_sq_diff(const double* a, const double* b, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    acc = _mm256_fmadd_pd(d, d, acc);
  }
  double sum = hsum(acc);
  for (; i < n; ++i) {
    const double d = a[i] - b[i];
    sum += d * d;
  }
  return sum;
}

void scaled_diff(double* dst, const double* a, const double* b, double s,
                 std::size_t n) {
  const __m256d vs = _mm256_set1_pd(s);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    _mm256_storeu_pd(dst + i, _mm256_mul_pd(vs, d));
  }
  for (; i < n; ++i) {
    dst[i] = s * (a[i] - b[i]);
  }
}

void add_inplace(double* acc, const double* src, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d v = _mm256_add_pd(_mm256_loadu_pd(acc + i), _mm256_loadu_pd(src + i));
    _mm256_storeu_pd(acc + i, v);
  }
  for (; i < n; ++i) {
    acc[i] += src[i];
  }
}

double max_value(const double* a, std::size_t n) {
  __m256d vmax = _mm256_set1_pd(-std::numeric_limits<double>::infinity());
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    vmax = _mm256_max_pd(vmax, _mm256_loadu_pd(a + i));
  }
  double m = hmax(vmax);
  for (; i < n; ++i) {
    if (a[i] > m) m = a[i];
  }
  return m;
}

void outer_product(double* dst, const double* col, std::size_t h,
                   const double* row, std::size_t w) {
  for (std::size_t y = 0; y < h; ++y) {
    const __m256d c = _mm256_set1_pd(col[y]);
    double* out = dst + y * w;
    std::size_t x = 0;
    for (; x + 4 <= w; x += 4) {
      _mm256_storeu_pd(out + x, _mm256_mul_pd(c, _mm256_loadu_pd(row + x)));
    }
    for (; x < w; ++x) {
      out[x] = col[y] * row[x];
    }
  }
}

}  // namespace handgeo::kernels::avx2

#endif  // HANDGEO_HAVE_AVX2
