// Copyright 2026 The mtmi Authors
// SPDX-License-Identifier: Apache-2.0

#include "mtmi/kernels.hpp"

namespace mtmi::kernels::scalar {
namespace {

double Dot(const double* a, const double* b, std::size_t n) {
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) sum += a[i] * b[i];
  return sum;
}

double SquaredDistance(const double* a, const double* b, std::size_t n) {
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = a[i] - b[i];
    sum += d * d;
  }
  return sum;
}

void Axpy(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void Gemv(const double* mat, std::size_t rows, std::size_t cols, const double* x,
          double* out) {
  for (std::size_t r = 0; r < rows; ++r) out[r] = Dot(mat + r * cols, x, cols);
}

}  // namespace

const KernelTable& table() {
  static const KernelTable t{&Dot, &SquaredDistance, &Axpy, &Gemv};
  return t;
}

}  // namespace mtmi::kernels::scalar
