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

#include "herald/kernels.hpp"

#include <stdexcept>

namespace herald::kernels {

namespace {

// Scalar reference implementations. These define the semantics; the SIMD
// variants must agree with them up to floating-point reassociation.

cdouble dot_conj_scalar(std::size_t n, const cdouble* x, const cdouble* y) {
  double re = 0.0, im = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double xr = x[i].real(), xi = x[i].imag();
    const double yr = y[i].real(), yi = y[i].imag();
    re += xr * yr + xi * yi;
    im += xr * yi - xi * yr;
  }
  return {re, im};
}

cdouble dot_scalar(std::size_t n, const cdouble* x, const cdouble* y) {
  double re = 0.0, im = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double xr = x[i].real(), xi = x[i].imag();
    const double yr = y[i].real(), yi = y[i].imag();
    re += xr * yr - xi * yi;
    im += xr * yi + xi * yr;
  }
  return {re, im};
}

double norm_sq_scalar(std::size_t n, const cdouble* x) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    acc += x[i].real() * x[i].real() + x[i].imag() * x[i].imag();
  }
  return acc;
}

void matvec_scalar(std::size_t rows, std::size_t cols, const cdouble* a,
                   const cdouble* x, cdouble* y) {
  for (std::size_t r = 0; r < rows; ++r) {
    y[r] = dot_scalar(cols, a + r * cols, x);
  }
}

void axpy_scalar(std::size_t n, cdouble alpha, const cdouble* x, cdouble* y) {
  const double ar = alpha.real(), ai = alpha.imag();
  for (std::size_t i = 0; i < n; ++i) {
    const double xr = x[i].real(), xi = x[i].imag();
    y[i] += cdouble{ar * xr - ai * xi, ar * xi + ai * xr};
  }
}

void outer_acc_scalar(std::size_t n, double w, const cdouble* x, cdouble* a) {
  for (std::size_t r = 0; r < n; ++r) {
    const double br = w * x[r].real(), bi = w * x[r].imag();
    cdouble* row = a + r * n;
    for (std::size_t c = 0; c < n; ++c) {
      const double xr = x[c].real(), xi = x[c].imag();
      row[c] += cdouble{br * xr + bi * xi, bi * xr - br * xi};
    }
  }
}

constexpr detail::KernelTable kScalarTable = {
    dot_conj_scalar, dot_scalar,  norm_sq_scalar,
    matvec_scalar,   axpy_scalar, outer_acc_scalar,
};

struct Dispatch {
  const detail::KernelTable* table;
  Backend backend;
  Dispatch() {
    if (const detail::KernelTable* t = detail::avx2_table()) {
      table = t;
      backend = Backend::avx2;
    } else {
      table = &kScalarTable;
      backend = Backend::scalar;
    }
  }
};

Dispatch& dispatch() {
  static Dispatch d;
  return d;
}

}  // namespace

Backend active() { return dispatch().backend; }

bool available(Backend b) {
  return b == Backend::scalar || detail::avx2_table() != nullptr;
}

void select(Backend b) {
  if (!available(b)) {
    throw std::invalid_argument("kernels: backend not available on this CPU");
  }
  Dispatch& d = dispatch();
  d.backend = b;
  d.table = (b == Backend::avx2) ? detail::avx2_table() : &kScalarTable;
}

std::string_view name(Backend b) {
  return b == Backend::avx2 ? "avx2" : "scalar";
}

cdouble dot_conj(std::size_t n, const cdouble* x, const cdouble* y) {
  return dispatch().table->dot_conj(n, x, y);
}

cdouble dot(std::size_t n, const cdouble* x, const cdouble* y) {
  return dispatch().table->dot(n, x, y);
}

double norm_sq(std::size_t n, const cdouble* x) {
  return dispatch().table->norm_sq(n, x);
}

void matvec(std::size_t rows, std::size_t cols, const cdouble* a,
            const cdouble* x, cdouble* y) {
  dispatch().table->matvec(rows, cols, a, x, y);
}

void axpy(std::size_t n, cdouble alpha, const cdouble* x, cdouble* y) {
  dispatch().table->axpy(n, alpha, x, y);
}

void outer_acc(std::size_t n, double w, const cdouble* x, cdouble* a) {
  dispatch().table->outer_acc(n, w, x, a);
}

}  // namespace herald::kernels
