// AVX2 variants. This translation unit alone is compiled with -mavx2; nothing
// here runs unless dispatch.cpp has confirmed CPU support. FMA is deliberately
// not enabled so elementwise results match the scalar kernels bit for bit.
#include "pekar/simd/kernels.hpp"

#if defined(__AVX2__)
#include <immintrin.h>

namespace pekar::simd {
namespace {

// Two complex numbers per register: [re0, im0, re1, im1].
inline __m256d load2(const cplx* p) { return _mm256_loadu_pd(reinterpret_cast<const double*>(p)); }
inline void store2(cplx* p, __m256d v) { _mm256_storeu_pd(reinterpret_cast<double*>(p), v); }

// (v0, v1) -> (v0, v0, v1, v1)
inline __m256d spread2(const double* v) {
  return _mm256_permute4x64_pd(_mm256_castpd128_pd256(_mm_loadu_pd(v)), 0x50);
}

inline double hsum(__m256d v) {
  alignas(32) double t[4];
  _mm256_store_pd(t, v);
  return (t[0] + t[1]) + (t[2] + t[3]);
}

void real_times(const double* v, const cplx* x, cplx* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) store2(out + i, _mm256_mul_pd(spread2(v + i), load2(x + i)));
  for (; i < n; ++i) out[i] = cplx(v[i] * x[i].real(), v[i] * x[i].imag());
}

void real_times_acc(const double* v, const cplx* x, cplx* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2)
    store2(out + i, _mm256_add_pd(load2(out + i), _mm256_mul_pd(spread2(v + i), load2(x + i))));
  for (; i < n; ++i)
    out[i] = cplx(out[i].real() + v[i] * x[i].real(), out[i].imag() + v[i] * x[i].imag());
}

void conj_times(const cplx* a, const cplx* b, cplx* out, std::size_t n) {
  const __m256d odd_sign = _mm256_set_pd(-0.0, 0.0, -0.0, 0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const __m256d va = load2(a + i), vb = load2(b + i);
    const __m256d p1 = _mm256_mul_pd(va, vb);
    const __m256d p2 = _mm256_xor_pd(_mm256_mul_pd(va, _mm256_permute_pd(vb, 0x5)), odd_sign);
    store2(out + i, _mm256_hadd_pd(p1, p2));
  }
  for (; i < n; ++i) {
    const double ar = a[i].real(), ai = a[i].imag();
    const double br = b[i].real(), bi = b[i].imag();
    out[i] = cplx(ar * br + ai * bi, ar * bi - ai * br);
  }
}

void axpy(cplx s, const cplx* x, cplx* y, std::size_t n) {
  const double sr = s.real(), si = s.imag();
  const __m256d vsr = _mm256_set1_pd(sr), vsi = _mm256_set1_pd(si);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const __m256d vx = load2(x + i);
    const __m256d t = _mm256_addsub_pd(_mm256_mul_pd(vsr, vx),
                                       _mm256_mul_pd(vsi, _mm256_permute_pd(vx, 0x5)));
    store2(y + i, _mm256_add_pd(load2(y + i), t));
  }
  for (; i < n; ++i) {
    const double xr = x[i].real(), xi = x[i].imag();
    y[i] = cplx(y[i].real() + (sr * xr - si * xi), y[i].imag() + (sr * xi + si * xr));
  }
}

void norm2_acc(const cplx* x, double* rho, std::size_t n) {
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const __m256d vx = load2(x + i);
    const __m256d sq = _mm256_mul_pd(vx, vx);
    const __m256d h = _mm256_hadd_pd(sq, sq);
    const __m128d both = _mm256_castpd256_pd128(_mm256_permute4x64_pd(h, 0x08));
    _mm_storeu_pd(rho + i, _mm_add_pd(_mm_loadu_pd(rho + i), both));
  }
  for (; i < n; ++i) {
    const double xr = x[i].real(), xi = x[i].imag();
    rho[i] += xr * xr + xi * xi;
  }
}

cplx dot(const cplx* a, const cplx* b, std::size_t n) {
  __m256d acc_re = _mm256_setzero_pd();
  __m256d acc_im = _mm256_setzero_pd();
  const __m256d odd_sign = _mm256_set_pd(-0.0, 0.0, -0.0, 0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const __m256d va = load2(a + i), vb = load2(b + i);
    acc_re = _mm256_add_pd(acc_re, _mm256_mul_pd(va, vb));
    acc_im = _mm256_add_pd(acc_im, _mm256_xor_pd(_mm256_mul_pd(va, _mm256_permute_pd(vb, 0x5)), odd_sign));
  }
  double re = hsum(acc_re), im = hsum(acc_im);
  for (; i < n; ++i) {
    const double ar = a[i].real(), ai = a[i].imag();
    const double br = b[i].real(), bi = b[i].imag();
    re += ar * br + ai * bi;
    im += ar * bi - ai * br;
  }
  return {re, im};
}

double dot_real(const double* a, const double* b, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  double s = hsum(acc);
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

double weighted_norm2(const double* w, const cplx* x, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const __m256d vx = load2(x + i);
    acc = _mm256_add_pd(acc, _mm256_mul_pd(spread2(w + i), _mm256_mul_pd(vx, vx)));
  }
  double s = hsum(acc);
  for (; i < n; ++i) {
    const double xr = x[i].real(), xi = x[i].imag();
    s += w[i] * (xr * xr + xi * xi);
  }
  return s;
}

constexpr KernelTable kTable{
    "avx2", real_times, real_times_acc, conj_times, axpy, norm2_acc, dot, dot_real, weighted_norm2,
};

}  // namespace

const KernelTable* avx2_kernels_unchecked() { return &kTable; }

}  // namespace pekar::simd

#else

namespace pekar::simd {
const KernelTable* avx2_kernels_unchecked() { return nullptr; }
}  // namespace pekar::simd

#endif
