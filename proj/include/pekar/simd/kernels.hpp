#pragma once
// Inner-loop kernels over contiguous field storage.
//
// Every kernel has a scalar reference implementation and, on x86-64, an AVX2
// variant. The active table is chosen once at first use from CPUID, and can be
// pinned with the environment variable PEKAR_SIMD=scalar|avx2.
//
// Elementwise kernels are bitwise identical across variants. Reductions keep a
// fixed lane layout per variant, so they are reproducible run to run but agree
// with the scalar reference only to rounding (~1e-15 relative).

#include <complex>
#include <cstddef>
#include <string_view>

namespace pekar::simd {

using cplx = std::complex<double>;

struct KernelTable {
  std::string_view name;

  // out[i] = v[i] * x[i]
  void (*real_times)(const double* v, const cplx* x, cplx* out, std::size_t n);
  // out[i] += v[i] * x[i]
  void (*real_times_acc)(const double* v, const cplx* x, cplx* out, std::size_t n);
  // out[i] = conj(a[i]) * b[i]
  void (*conj_times)(const cplx* a, const cplx* b, cplx* out, std::size_t n);
  // y[i] += s * x[i]
  void (*axpy)(cplx s, const cplx* x, cplx* y, std::size_t n);
  // rho[i] += |x[i]|^2
  void (*norm2_acc)(const cplx* x, double* rho, std::size_t n);
  // sum_i conj(a[i]) * b[i]
  cplx (*dot)(const cplx* a, const cplx* b, std::size_t n);
  // sum_i a[i] * b[i]
  double (*dot_real)(const double* a, const double* b, std::size_t n);
  // sum_i w[i] * |x[i]|^2
  double (*weighted_norm2)(const double* w, const cplx* x, std::size_t n);
};

enum class Isa { scalar, avx2 };

const KernelTable& scalar_kernels();
// nullptr when the binary was built without the AVX2 unit or the CPU lacks it.
const KernelTable* avx2_kernels();

const KernelTable& active();
Isa active_isa();
// Test hook; not thread-safe with concurrent kernel use.
void select(Isa isa);

}  // namespace pekar::simd
