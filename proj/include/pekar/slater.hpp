#pragma once
// Slater determinants of 2-spinor orbitals on a Grid3.

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <vector>

#include "pekar/grid.hpp"

namespace pekar {

struct SpinOrbital {
  ComplexField up;
  ComplexField down;

  explicit SpinOrbital(const Grid3& g) : up(g), down(g) {}
  SpinOrbital(ComplexField u, ComplexField d);

  const Grid3& grid() const noexcept { return up.grid(); }
  const ComplexField& component(int s) const noexcept { return s == 0 ? up : down; }
  ComplexField& component(int s) noexcept { return s == 0 ? up : down; }
};

// Spinor inner product, summed over both components.
cplx inner(const SpinOrbital& a, const SpinOrbital& b);
double norm2(const SpinOrbital& a);
// y += s * x
void axpy(cplx s, const SpinOrbital& x, SpinOrbital& y);

Eigen::MatrixXcd gram_matrix(std::span<const SpinOrbital> orbitals);

inline constexpr double kGramTolerance = 1e-8;

// Immutable set of orthonormal spin orbitals.
class SlaterState {
 public:
  // Validates orthonormality (max-norm Gram deviation <= tol).
  explicit SlaterState(std::vector<SpinOrbital> orbitals, double tol = kGramTolerance);

  std::size_t size() const noexcept { return orbitals_.size(); }
  const Grid3& grid() const noexcept { return orbitals_.front().grid(); }
  std::span<const SpinOrbital> orbitals() const noexcept { return orbitals_; }
  const SpinOrbital& operator[](std::size_t i) const noexcept { return orbitals_[i]; }

 private:
  std::vector<SpinOrbital> orbitals_;
};

double gram_deviation(std::span<const SpinOrbital> orbitals);

// Symmetric (Loewdin) orthonormalization: phi -> phi * S^{-1/2}.
// Throws dependent_orbitals when the Gram condition number exceeds 1e12.
SlaterState orthonormalize(std::vector<SpinOrbital> orbitals);

// rho(x) = sum_i |phi_i,up(x)|^2 + |phi_i,down(x)|^2.
RealField density(const SlaterState& state);
// Same sum without the orthonormality requirement.
RealField orbital_density(std::span<const SpinOrbital> orbitals);

// Apply an N x N matrix to the orbital list: out_j = sum_i phi_i * m(i, j).
std::vector<SpinOrbital> mix(std::span<const SpinOrbital> orbitals, const Eigen::MatrixXcd& m);

inline constexpr std::size_t kOracleMaxElectrons = 6;

// Amplitudes det[phi_j^{s_i}(x_i)] / sqrt(N!) for every spin configuration.
// Configuration index: bit (N-1-i) holds s_i (0 = up, 1 = down) for electron i.
// Positions are grid point indices; the continuous overload uses trigonometric
// interpolation of the orbitals.
std::vector<cplx> evaluate_determinant(const SlaterState& state, std::span<const std::size_t> points);
std::vector<cplx> evaluate_determinant(const SlaterState& state, std::span<const Vec3> positions);

// Band-limited interpolant of a periodic grid field at an arbitrary point.
cplx interpolate(const ComplexField& f, const Vec3& x);

}  // namespace pekar
