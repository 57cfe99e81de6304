// Copyright 2026 The herald authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// AVX2+FMA variants of the complex kernels. A __m256d register holds two
// complex doubles laid out [re0, im0, re1, im1]; products split into a
// "straight" part (x*y) and a "swapped" part (x*swap(y)) whose even/odd
// lanes recombine into real and imaginary accumulators.

#include "herald/kernels.hpp"

#if defined(HERALD_COMPILE_AVX2) && (defined(__x86_64__) || defined(__i386__))

#include <immintrin.h>

namespace herald::kernels {
namespace {

inline double hsum(__m256d v) {
  alignas(32) double d[4];
  _mm256_store_pd(d, v);
  return (d[0] + d[1]) + (d[2] + d[3]);
}

inline double hsum_evens_minus_odds(__m256d v) {
  alignas(32) double d[4];
  _mm256_store_pd(d, v);
  return (d[0] - d[1]) + (d[2] - d[3]);
}

cdouble dot_conj_avx2(std::size_t n, const cdouble* x, const cdouble* y) {
  const double* px = reinterpret_cast<const double*>(x);
  const double* py = reinterpret_cast<const double*>(y);
  __m256d straight = _mm256_setzero_pd();
  __m256d swapped = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const __m256d vx = _mm256_loadu_pd(px + 2 * i);
    const __m256d vy = _mm256_loadu_pd(py + 2 * i);
    const __m256d vys = _mm256_permute_pd(vy, 0b0101);
    straight = _mm256_fmadd_pd(vx, vy, straight);   // [xr*yr, xi*yi]
    swapped = _mm256_fmadd_pd(vx, vys, swapped);    // [xr*yi, xi*yr]
  }
  double re = hsum(straight);
  double im = hsum_evens_minus_odds(swapped);
  for (; i < n; ++i) {
    const double xr = x[i].real(), xi = x[i].imag();
    const double yr = y[i].real(), yi = y[i].imag();
    re += xr * yr + xi * yi;
    im += xr * yi - xi * yr;
  }
  return {re, im};
}

cdouble dot_avx2(std::size_t n, const cdouble* x, const cdouble* y) {
  const double* px = reinterpret_cast<const double*>(x);
  const double* py = reinterpret_cast<const double*>(y);
  __m256d straight = _mm256_setzero_pd();
  __m256d swapped = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const __m256d vx = _mm256_loadu_pd(px + 2 * i);
    const __m256d vy = _mm256_loadu_pd(py + 2 * i);
    const __m256d vys = _mm256_permute_pd(vy, 0b0101);
    straight = _mm256_fmadd_pd(vx, vy, straight);
    swapped = _mm256_fmadd_pd(vx, vys, swapped);
  }
  double re = hsum_evens_minus_odds(straight);
  double im = hsum(swapped);
  for (; i < n; ++i) {
    const double xr = x[i].real(), xi = x[i].imag();
    const double yr = y[i].real(), yi = y[i].imag();
    re += xr * yr - xi * yi;
    im += xr * yi + xi * yr;
  }
  return {re, im};
}

double norm_sq_avx2(std::size_t n, const cdouble* x) {
  const double* p = reinterpret_cast<const double*>(x);
  const std::size_t m = 2 * n;
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= m; i += 4) {
    const __m256d v = _mm256_loadu_pd(p + i);
    acc = _mm256_fmadd_pd(v, v, acc);
  }
  double s = hsum(acc);
  for (; i < m; ++i) s += p[i] * p[i];
  return s;
}

void matvec_avx2(std::size_t rows, std::size_t cols, const cdouble* a,
                 const cdouble* x, cdouble* y) {
  for (std::size_t r = 0; r < rows; ++r) {
    y[r] = dot_avx2(cols, a + r * cols, x);
  }
}

void axpy_avx2(std::size_t n, cdouble alpha, const cdouble* x, cdouble* y) {
  const double ar = alpha.real(), ai = alpha.imag();
  const double* px = reinterpret_cast<const double*>(x);
  double* py = reinterpret_cast<double*>(y);
  const __m256d var = _mm256_set1_pd(ar);
  // sign-alternated imaginary factor: even lanes take -ai, odd lanes +ai
  const __m256d vai = _mm256_set_pd(ai, -ai, ai, -ai);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const __m256d vx = _mm256_loadu_pd(px + 2 * i);
    const __m256d vxs = _mm256_permute_pd(vx, 0b0101);
    __m256d vy = _mm256_loadu_pd(py + 2 * i);
    vy = _mm256_fmadd_pd(vx, var, vy);
    vy = _mm256_fmadd_pd(vxs, vai, vy);
    _mm256_storeu_pd(py + 2 * i, vy);
  }
  for (; i < n; ++i) {
    const double xr = x[i].real(), xi = x[i].imag();
    y[i] += cdouble{ar * xr - ai * xi, ar * xi + ai * xr};
  }
}

void outer_acc_avx2(std::size_t n, double w, const cdouble* x, cdouble* a) {
  const double* px = reinterpret_cast<const double*>(x);
  for (std::size_t r = 0; r < n; ++r) {
    const double br = w * x[r].real(), bi = w * x[r].imag();
    // row[c] += b * conj(x[c]):
    //   even lanes  br*xr + bi*xi, odd lanes  bi*xr - br*xi
    const __m256d vbr = _mm256_set_pd(-br, br, -br, br);
    const __m256d vbi = _mm256_set1_pd(bi);
    double* row = reinterpret_cast<double*>(a + r * n);
    std::size_t c = 0;
    for (; c + 2 <= n; c += 2) {
      const __m256d vx = _mm256_loadu_pd(px + 2 * c);
      const __m256d vxs = _mm256_permute_pd(vx, 0b0101);
      __m256d va = _mm256_loadu_pd(row + 2 * c);
      va = _mm256_fmadd_pd(vx, vbr, va);
      va = _mm256_fmadd_pd(vxs, vbi, va);
      _mm256_storeu_pd(row + 2 * c, va);
    }
    for (; c < n; ++c) {
      const double xr = x[c].real(), xi = x[c].imag();
      a[r * n + c] += cdouble{br * xr + bi * xi, bi * xr - br * xi};
    }
  }
}

constexpr detail::KernelTable kAvx2Table = {
    dot_conj_avx2, dot_avx2,  norm_sq_avx2,
    matvec_avx2,   axpy_avx2, outer_acc_avx2,
};

}  // namespace

const detail::KernelTable* detail::avx2_table() {
  static const bool supported =
      __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  return supported ? &kAvx2Table : nullptr;
}

}  // namespace herald::kernels

#else

namespace herald::kernels {
const detail::KernelTable* detail::avx2_table() { return nullptr; }
}  // namespace herald::kernels

#endif
