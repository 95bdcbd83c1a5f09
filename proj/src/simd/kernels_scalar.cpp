#include "pekar/simd/kernels.hpp"

namespace pekar::simd {
namespace {

void real_times(const double* v, const cplx* x, cplx* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = cplx(v[i] * x[i].real(), v[i] * x[i].imag());
}

void real_times_acc(const double* v, const cplx* x, cplx* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i)
    out[i] = cplx(out[i].real() + v[i] * x[i].real(), out[i].imag() + v[i] * x[i].imag());
}

void conj_times(const cplx* a, const cplx* b, cplx* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double ar = a[i].real(), ai = a[i].imag();
    const double br = b[i].real(), bi = b[i].imag();
    out[i] = cplx(ar * br + ai * bi, ar * bi - ai * br);
  }
}

void axpy(cplx s, const cplx* x, cplx* y, std::size_t n) {
  const double sr = s.real(), si = s.imag();
  for (std::size_t i = 0; i < n; ++i) {
    const double xr = x[i].real(), xi = x[i].imag();
    y[i] = cplx(y[i].real() + (sr * xr - si * xi), y[i].imag() + (sr * xi + si * xr));
  }
}

void norm2_acc(const cplx* x, double* rho, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double xr = x[i].real(), xi = x[i].imag();
    rho[i] += xr * xr + xi * xi;
  }
}

cplx dot(const cplx* a, const cplx* b, std::size_t n) {
  double re = 0.0, im = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double ar = a[i].real(), ai = a[i].imag();
    const double br = b[i].real(), bi = b[i].imag();
    re += ar * br + ai * bi;
    im += ar * bi - ai * br;
  }
  return {re, im};
}

double dot_real(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

double weighted_norm2(const double* w, const cplx* x, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double xr = x[i].real(), xi = x[i].imag();
    s += w[i] * (xr * xr + xi * xi);
  }
  return s;
}

constexpr KernelTable kTable{
    "scalar", real_times, real_times_acc, conj_times, axpy, norm2_acc, dot, dot_real, weighted_norm2,
};

}  // namespace

const KernelTable& scalar_kernels() { return kTable; }

}  // namespace pekar::simd
