// Copyright 2026 The mtmi Authors
// SPDX-License-Identifier: Apache-2.0

#include <immintrin.h>

#include <cmath>

#include "mtmi/kernels.hpp"

namespace mtmi::kernels::avx2 {
namespace {

inline double HorizontalSum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d pair = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(pair, _mm_unpackhi_pd(pair, pair)));
}

// Four independent accumulators over 16-wide blocks, then 4-wide blocks into
// the first accumulator, then a scalar tail. Gemv reproduces this exact order.
double Dot(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  __m256d acc2 = _mm256_setzero_pd();
  __m256d acc3 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 16 <= n; i += 16) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
    acc2 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 8), _mm256_loadu_pd(b + i + 8), acc2);
    acc3 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 12), _mm256_loadu_pd(b + i + 12), acc3);
  }
  for (; i + 4 <= n; i += 4) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
  }
  double sum = HorizontalSum(_mm256_add_pd(_mm256_add_pd(acc0, acc1), _mm256_add_pd(acc2, acc3)));
  for (; i < n; ++i) sum = std::fma(a[i], b[i], sum);
  return sum;
}

double SquaredDistance(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256d d0 = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    const __m256d d1 = _mm256_sub_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4));
    acc0 = _mm256_fmadd_pd(d0, d0, acc0);
    acc1 = _mm256_fmadd_pd(d1, d1, acc1);
  }
  for (; i + 4 <= n; i += 4) {
    const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    acc0 = _mm256_fmadd_pd(d, d, acc0);
  }
  double sum = HorizontalSum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) {
    const double d = a[i] - b[i];
    sum = std::fma(d, d, sum);
  }
  return sum;
}

void Axpy(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  }
  for (; i < n; ++i) y[i] = std::fma(alpha, x[i], y[i]);
}

// Two rows per pass share each load of x; per-row arithmetic matches Dot.
void Gemv(const double* mat, std::size_t rows, std::size_t cols, const double* x,
          double* out) {
  std::size_t r = 0;
  for (; r + 2 <= rows; r += 2) {
    const double* a = mat + r * cols;
    const double* c = a + cols;
    __m256d a0 = _mm256_setzero_pd(), a1 = _mm256_setzero_pd();
    __m256d a2 = _mm256_setzero_pd(), a3 = _mm256_setzero_pd();
    __m256d c0 = _mm256_setzero_pd(), c1 = _mm256_setzero_pd();
    __m256d c2 = _mm256_setzero_pd(), c3 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 16 <= cols; i += 16) {
      const __m256d x0 = _mm256_loadu_pd(x + i);
      const __m256d x1 = _mm256_loadu_pd(x + i + 4);
      const __m256d x2 = _mm256_loadu_pd(x + i + 8);
      const __m256d x3 = _mm256_loadu_pd(x + i + 12);
      a0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), x0, a0);
      a1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), x1, a1);
      a2 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 8), x2, a2);
      a3 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 12), x3, a3);
      c0 = _mm256_fmadd_pd(_mm256_loadu_pd(c + i), x0, c0);
      c1 = _mm256_fmadd_pd(_mm256_loadu_pd(c + i + 4), x1, c1);
      c2 = _mm256_fmadd_pd(_mm256_loadu_pd(c + i + 8), x2, c2);
      c3 = _mm256_fmadd_pd(_mm256_loadu_pd(c + i + 12), x3, c3);
    }
    for (; i + 4 <= cols; i += 4) {
      const __m256d x0 = _mm256_loadu_pd(x + i);
      a0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), x0, a0);
      c0 = _mm256_fmadd_pd(_mm256_loadu_pd(c + i), x0, c0);
    }
    double sa = HorizontalSum(_mm256_add_pd(_mm256_add_pd(a0, a1), _mm256_add_pd(a2, a3)));
    double sc = HorizontalSum(_mm256_add_pd(_mm256_add_pd(c0, c1), _mm256_add_pd(c2, c3)));
    for (; i < cols; ++i) {
      sa = std::fma(a[i], x[i], sa);
      sc = std::fma(c[i], x[i], sc);
    }
    out[r] = sa;
    out[r + 1] = sc;
  }
  if (r < rows) out[r] = Dot(mat + r * cols, x, cols);
}

}  // namespace

const KernelTable& table() {
  static const KernelTable t{&Dot, &SquaredDistance, &Axpy, &Gemv};
  return t;
}

}  // namespace mtmi::kernels::avx2
