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

#pragma once

#include <complex>
#include <cstddef>
#include <string_view>

namespace herald::kernels {

using cdouble = std::complex<double>;

// Low-level dense complex kernels behind the Fock-space engine. Every kernel
// has a scalar reference implementation and may have SIMD variants; the
// active variant is chosen at runtime from CPU capabilities and can be
// overridden (the equivalence tests exercise both paths on the same data).
enum class Backend { scalar, avx2 };

Backend active();
bool available(Backend b);
// Throws std::invalid_argument if the backend is not available on this CPU.
void select(Backend b);
std::string_view name(Backend b);

// sum_i conj(x[i]) * y[i]
cdouble dot_conj(std::size_t n, const cdouble* x, const cdouble* y);

// sum_i x[i] * y[i]
cdouble dot(std::size_t n, const cdouble* x, const cdouble* y);

// sum_i |x[i]|^2
double norm_sq(std::size_t n, const cdouble* x);

// y = A x, with A row-major of shape rows x cols
void matvec(std::size_t rows, std::size_t cols, const cdouble* a,
            const cdouble* x, cdouble* y);

// y += alpha * x
void axpy(std::size_t n, cdouble alpha, const cdouble* x, cdouble* y);

// a += w * x x^dagger, with a row-major n x n and w real
void outer_acc(std::size_t n, double w, const cdouble* x, cdouble* a);

namespace detail {
struct KernelTable {
  cdouble (*dot_conj)(std::size_t, const cdouble*, const cdouble*);
  cdouble (*dot)(std::size_t, const cdouble*, const cdouble*);
  double (*norm_sq)(std::size_t, const cdouble*);
  void (*matvec)(std::size_t, std::size_t, const cdouble*, const cdouble*,
                 cdouble*);
  void (*axpy)(std::size_t, cdouble, const cdouble*, cdouble*);
  void (*outer_acc)(std::size_t, double, const cdouble*, cdouble*);
};
// Returns nullptr when the AVX2 variants were not compiled in.
const KernelTable* avx2_table();
}  // namespace detail

}  // namespace herald::kernels
