#include <atomic>
#include <cstdlib>
#include <string_view>

#include "pekar/simd/kernels.hpp"

namespace pekar::simd {

const KernelTable* avx2_kernels_unchecked();

namespace {

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(__i386__)
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

const KernelTable* initial_table() {
  const KernelTable* vec = avx2_kernels();
  if (const char* env = std::getenv("PEKAR_SIMD")) {
    const std::string_view want(env);
    if (want == "scalar") return &scalar_kernels();
    if (want == "avx2" && vec != nullptr) return vec;
  }
  return vec != nullptr ? vec : &scalar_kernels();
}

std::atomic<const KernelTable*>& slot() {
  static std::atomic<const KernelTable*> table{initial_table()};
  return table;
}

}  // namespace

const KernelTable* avx2_kernels() {
  static const KernelTable* table = cpu_has_avx2() ? avx2_kernels_unchecked() : nullptr;
  return table;
}

const KernelTable& active() { return *slot().load(std::memory_order_acquire); }

Isa active_isa() { return &active() == &scalar_kernels() ? Isa::scalar : Isa::avx2; }

void select(Isa isa) {
  const KernelTable* t = &scalar_kernels();
  if (isa == Isa::avx2 && avx2_kernels() != nullptr) t = avx2_kernels();
  slot().store(t, std::memory_order_release);
}

}  // namespace pekar::simd
