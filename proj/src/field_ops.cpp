#include "pekar/field_ops.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <utility>

#include "pekar/simd/kernels.hpp"

namespace pekar {

namespace {
constexpr double kPi = std::numbers::pi;
}

SpectralContext::SpectralContext(const Grid3& grid)
    : grid_(grid), fft_(&Fft3::for_dims(grid.dims())), truncation_radius_(0.5 * grid.min_box_length()) {
  std::array<std::vector<double>, 3> full_k;
  for (int a = 0; a < 3; ++a) {
    axis_k_[a].resize(grid.dim(a));
    full_k[a].resize(grid.dim(a));
    for (int i = 0; i < grid.dim(a); ++i) {
      axis_k_[a][i] = grid.derivative_wavenumber(a, i);
      full_k[a][i] = grid.wavenumber(a, i);
    }
  }
  laplacian_.resize(grid.size());
  coulomb_.resize(grid.size());
  const double rc = truncation_radius_;
  for (int i = 0; i < grid.dim(0); ++i)
    for (int j = 0; j < grid.dim(1); ++j)
      for (int k = 0; k < grid.dim(2); ++k) {
        const std::size_t idx = grid.flat(i, j, k);
        const double dx = axis_k_[0][i], dy = axis_k_[1][j], dz = axis_k_[2][k];
        laplacian_[idx] = dx * dx + dy * dy + dz * dz;
        const double fx = full_k[0][i], fy = full_k[1][j], fz = full_k[2][k];
        const double k2 = fx * fx + fy * fy + fz * fz;
        if (k2 == 0.0) {
          coulomb_[idx] = 2.0 * kPi * rc * rc;
        } else {
          const double s = std::sin(0.5 * std::sqrt(k2) * rc);
          coulomb_[idx] = 8.0 * kPi * s * s / k2;
        }
      }
}

std::shared_ptr<const SpectralContext> SpectralContext::get(const Grid3& grid) {
  static std::mutex m;
  static std::map<std::pair<Index3, double>, std::shared_ptr<const SpectralContext>> cache;
  std::lock_guard lock(m);
  auto key = std::make_pair(grid.dims(), grid.spacing());
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  // Large grids are only used a handful of times; keep the cache bounded.
  if (cache.size() >= 16) cache.clear();
  auto ctx = std::make_shared<const SpectralContext>(grid);
  cache.emplace(key, ctx);
  return ctx;
}

cplx inner(const ComplexField& f, const ComplexField& g) {
  require_same_grid(f.grid(), g.grid(), "inner");
  return simd::active().dot(f.data(), g.data(), f.size()) * f.grid().cell_volume();
}

double inner(const RealField& f, const RealField& g) {
  require_same_grid(f.grid(), g.grid(), "inner");
  return simd::active().dot_real(f.data(), g.data(), f.size()) * f.grid().cell_volume();
}

double norm2(const ComplexField& f) { return inner(f, f).real(); }

cplx spectral_inner(const ComplexField& f, const ComplexField& g) {
  require_same_grid(f.grid(), g.grid(), "spectral_inner");
  const Fft3& fft = Fft3::for_dims(f.grid().dims());
  std::vector<cplx> fh(f.size()), gh(g.size());
  fft.forward(f.data(), fh.data());
  fft.forward(g.data(), gh.data());
  const cplx s = simd::active().dot(fh.data(), gh.data(), fh.size());
  return s * (f.grid().cell_volume() / static_cast<double>(f.size()));
}

std::array<ComplexField, 3> gradient(const ComplexField& f) {
  const auto ctx = SpectralContext::get(f.grid());
  const Grid3& g = f.grid();
  std::vector<cplx> fh(f.size());
  ctx->fft().forward(f.data(), fh.data());
  std::array<ComplexField, 3> out{ComplexField(g), ComplexField(g), ComplexField(g)};
  for (int a = 0; a < 3; ++a) {
    const auto k = ctx->axis_wavenumbers(a);
    cplx* o = out[a].data();
    for (int i = 0; i < g.dim(0); ++i)
      for (int j = 0; j < g.dim(1); ++j)
        for (int l = 0; l < g.dim(2); ++l) {
          const std::size_t idx = g.flat(i, j, l);
          const double ka = a == 0 ? k[i] : (a == 1 ? k[j] : k[l]);
          o[idx] = cplx(0.0, ka) * fh[idx];
        }
    ctx->fft().inverse(o, o);
  }
  return out;
}

std::array<RealField, 3> gradient(const RealField& f) {
  auto c = gradient(to_complex(f));
  return {real_part(c[0]), real_part(c[1]), real_part(c[2])};
}

double mass_outside_ball(const RealField& rho, double radius) {
  const Grid3& g = rho.grid();
  double total = 0.0;
  Vec3 c{0.0, 0.0, 0.0};
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double w = std::abs(rho[i]);
    const Vec3 x = g.position(i);
    total += w;
    for (int a = 0; a < 3; ++a) c[a] += w * x[a];
  }
  if (total == 0.0) return 0.0;
  for (double& v : c) v /= total;
  double outside = 0.0;
  const double r2 = radius * radius;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const Vec3 x = g.position(i);
    const double d2 = (x[0] - c[0]) * (x[0] - c[0]) + (x[1] - c[1]) * (x[1] - c[1]) + (x[2] - c[2]) * (x[2] - c[2]);
    if (d2 > r2) outside += std::abs(rho[i]);
  }
  return outside / total;
}

ComplexField coulomb_convolve(const ComplexField& rho) {
  const auto ctx = SpectralContext::get(rho.grid());
  ComplexField out(rho.grid());
  ctx->fft().forward(rho.data(), out.data());
  const auto sym = ctx->coulomb_symbol();
  simd::active().real_times(sym.data(), out.data(), out.data(), out.size());
  ctx->fft().inverse(out.data(), out.data());
  return out;
}

RealField coulomb_convolve(const RealField& rho, const CoulombOptions& opts) {
  if (opts.check_support) {
    const double rc = 0.5 * rho.grid().min_box_length();
    const double leak = mass_outside_ball(rho, 0.5 * rc);
    if (leak > opts.leak_tolerance)
      throw Error(ErrorCode::support_overflow,
                  "fraction " + std::to_string(leak) + " of the density lies outside the isolation ball");
  }
  return real_part(coulomb_convolve(to_complex(rho)));
}

namespace {

double gradient_norm2(const std::array<ComplexField, 3>& grad) {
  return norm2(grad[0]) + norm2(grad[1]) + norm2(grad[2]);
}

}  // namespace

InequalityCheck hardy_check(const ComplexField& phi, double tol_scale) {
  const Grid3& g = phi.grid();
  double lhs = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const Vec3 x = g.position(i);
    const double r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
    if (r2 == 0.0) continue;
    lhs += std::norm(phi[i]) / r2;
  }
  lhs *= g.cell_volume();
  const double grad2 = gradient_norm2(gradient(phi));
  InequalityCheck out;
  out.lhs = lhs;
  out.rhs = 4.0 * grad2;
  out.tolerance = tol_scale * (norm2(phi) + grad2);
  return out;
}

InequalityCheck diamagnetic_check(const ComplexField& f, const VectorPotentialField& a, double tol_scale) {
  require_same_grid(f.grid(), a.grid(), "diamagnetic_check");
  RealField modulus(f.grid());
  for (std::size_t i = 0; i < f.size(); ++i) modulus[i] = std::abs(f[i]);
  const auto gm = gradient(modulus);
  const double lhs2 = inner(gm[0], gm[0]) + inner(gm[1], gm[1]) + inner(gm[2], gm[2]);

  const auto gf = gradient(f);
  double rhs2 = 0.0;
  ComplexField d(f.grid());
  for (int ax = 0; ax < 3; ++ax) {
    for (std::size_t i = 0; i < f.size(); ++i) d[i] = cplx(0.0, -1.0) * gf[ax][i] + a[ax][i] * f[i];
    rhs2 += norm2(d);
  }
  InequalityCheck out;
  out.lhs = std::sqrt(lhs2);
  out.rhs = std::sqrt(rhs2);
  out.tolerance = tol_scale * (norm2(f) + gradient_norm2(gf));
  return out;
}

}  // namespace pekar
