#pragma once
// Field arithmetic on Grid3: inner products, spectral derivatives and the
// free-space Coulomb convolution.
//
// Coulomb convolution uses a spherically truncated kernel 1/|x| * [|x| < Rc]
// with Rc = half the shortest box length. Its Fourier symbol is
//     4*pi * (1 - cos(|k| Rc)) / |k|^2,   with value 2*pi*Rc^2 at k = 0,
// which makes the periodic convolution equal to the free-space one as long as
// the density fits in a ball of diameter Rc.

#include <array>
#include <memory>
#include <span>
#include <vector>

#include "pekar/fft.hpp"
#include "pekar/grid.hpp"

namespace pekar {

// Per-grid spectral tables, cached and shared across threads.
class SpectralContext {
 public:
  static std::shared_ptr<const SpectralContext> get(const Grid3& grid);

  explicit SpectralContext(const Grid3& grid);

  const Grid3& grid() const noexcept { return grid_; }
  const Fft3& fft() const noexcept { return *fft_; }
  std::span<const double> axis_wavenumbers(int axis) const noexcept { return axis_k_[axis]; }
  // |k|^2 built from derivative wavenumbers, i.e. the symbol of sum_j (-i d_j)^2.
  std::span<const double> laplacian_symbol() const noexcept { return laplacian_; }
  std::span<const double> coulomb_symbol() const noexcept { return coulomb_; }
  double truncation_radius() const noexcept { return truncation_radius_; }

 private:
  Grid3 grid_;
  const Fft3* fft_;
  std::array<std::vector<double>, 3> axis_k_;
  std::vector<double> laplacian_;
  std::vector<double> coulomb_;
  double truncation_radius_;
};

// Riemann-sum inner product, conjugate-linear in the first argument.
cplx inner(const ComplexField& f, const ComplexField& g);
double inner(const RealField& f, const RealField& g);
double norm2(const ComplexField& f);

// Inner product evaluated from the DFT coefficients (Parseval route).
cplx spectral_inner(const ComplexField& f, const ComplexField& g);

std::array<ComplexField, 3> gradient(const ComplexField& f);
std::array<RealField, 3> gradient(const RealField& f);

struct CoulombOptions {
  bool check_support = true;
  // Largest admissible fraction of |rho| mass outside the ball of radius Rc/2
  // around the |rho|-weighted centroid.
  double leak_tolerance = 1e-4;
};

// (rho * 1/|x|) sampled on the grid. Throws support_overflow when the
// density does not fit the truncation geometry.
RealField coulomb_convolve(const RealField& rho, const CoulombOptions& opts = {});
// Unchecked complex variant used for exchange pair densities.
ComplexField coulomb_convolve(const ComplexField& rho);

// Fraction of sum|rho| lying farther than `radius` from the |rho| centroid.
double mass_outside_ball(const RealField& rho, double radius);

struct InequalityCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  double tolerance = 0.0;
  bool holds() const noexcept { return lhs <= rhs + tolerance; }
};

// Default tolerance: tol_scale * (|phi|^2 + |grad phi|^2).
inline constexpr double kDefaultToleranceScale = 1e-3;

// <phi, |x|^-2 phi>  <=  4 sum_j <d_j phi, d_j phi>. The origin sample is
// excluded from the left-hand side.
InequalityCheck hardy_check(const ComplexField& phi, double tol_scale = kDefaultToleranceScale);

// || grad |f| ||  <=  || (-i grad + a) f ||.
InequalityCheck diamagnetic_check(const ComplexField& f, const VectorPotentialField& a,
                                  double tol_scale = kDefaultToleranceScale);

}  // namespace pekar
