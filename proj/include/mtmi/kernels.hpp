// Copyright 2026 The mtmi Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cassert>
#include <cstddef>
#include <span>
#include <string_view>

// Dense double-precision inner loops used by every module. Each kernel has a
// scalar reference implementation and, on x86-64, an AVX2/FMA variant that is
// selected once at runtime. Set MTMI_ISA=scalar in the environment to force
// the reference path.
namespace mtmi::kernels {

enum class Isa { Scalar, Avx2 };

struct KernelTable {
  double (*dot)(const double* a, const double* b, std::size_t n);
  double (*squared_distance)(const double* a, const double* b, std::size_t n);
  // y += alpha * x
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  // out[r] = dot(mat[r, :], x) for a row-major rows x cols matrix. Each
  // out[r] is bit-identical to dot(row r, x) under the same table.
  void (*gemv)(const double* mat, std::size_t rows, std::size_t cols,
               const double* x, double* out);
};

namespace scalar {
const KernelTable& table();
}
namespace avx2 {
const KernelTable& table();  // only valid when isa_supported(Isa::Avx2)
}

bool isa_supported(Isa isa);
const KernelTable& table(Isa isa);

Isa active_isa();
void set_active_isa(Isa isa);
std::string_view isa_name(Isa isa);

const KernelTable& active();

inline double dot(std::span<const double> a, std::span<const double> b) {
  assert(a.size() == b.size());
  return active().dot(a.data(), b.data(), a.size());
}

inline double squared_distance(std::span<const double> a, std::span<const double> b) {
  assert(a.size() == b.size());
  return active().squared_distance(a.data(), b.data(), a.size());
}

inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  assert(x.size() == y.size());
  active().axpy(alpha, x.data(), y.data(), x.size());
}

inline void gemv(std::span<const double> mat, std::size_t rows, std::size_t cols,
                 std::span<const double> x, std::span<double> out) {
  assert(mat.size() == rows * cols && x.size() == cols && out.size() == rows);
  active().gemv(mat.data(), rows, cols, x.data(), out.data());
}

}  // namespace mtmi::kernels
