// Copyright 2026 The mtmi Authors
// SPDX-License-Identifier: Apache-2.0

#include <atomic>
#include <cstdlib>
#include <string>

#include "mtmi/kernels.hpp"

namespace mtmi::kernels {
namespace {

Isa DetectIsa() {
  if (const char* forced = std::getenv("MTMI_ISA")) {
    if (std::string(forced) == "scalar") return Isa::Scalar;
  }
  return isa_supported(Isa::Avx2) ? Isa::Avx2 : Isa::Scalar;
}

std::atomic<const KernelTable*>& ActiveSlot() {
  static std::atomic<const KernelTable*> slot{&table(DetectIsa())};
  return slot;
}

std::atomic<Isa>& ActiveIsaSlot() {
  static std::atomic<Isa> isa{DetectIsa()};
  return isa;
}

}  // namespace

bool isa_supported(Isa isa) {
  switch (isa) {
    case Isa::Scalar:
      return true;
    case Isa::Avx2:
#if defined(MTMI_HAVE_AVX2)
      __builtin_cpu_init();
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
  }
  return false;
}

const KernelTable& table(Isa isa) {
#if defined(MTMI_HAVE_AVX2)
  if (isa == Isa::Avx2 && isa_supported(Isa::Avx2)) return avx2::table();
#endif
  (void)isa;
  return scalar::table();
}

Isa active_isa() { return ActiveIsaSlot().load(std::memory_order_relaxed); }

void set_active_isa(Isa isa) {
  if (!isa_supported(isa)) isa = Isa::Scalar;
  ActiveIsaSlot().store(isa, std::memory_order_relaxed);
  ActiveSlot().store(&table(isa), std::memory_order_release);
}

std::string_view isa_name(Isa isa) { return isa == Isa::Avx2 ? "avx2" : "scalar"; }

const KernelTable& active() { return *ActiveSlot().load(std::memory_order_acquire); }

}  // namespace mtmi::kernels
