#include "pekar/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace pekar {

Grid3::Grid3(Index3 dims, double spacing) : dims_(dims), spacing_(spacing), size_(1) {
  for (int d : dims_) {
    if (d < kMinDim)
      throw Error(ErrorCode::invalid_argument, "grid dims must be >= 8, got " + std::to_string(d));
    size_ *= static_cast<std::size_t>(d);
  }
  if (!(spacing > 0.0) || !std::isfinite(spacing))
    throw Error(ErrorCode::invalid_argument, "grid spacing must be positive");
}

double Grid3::min_box_length() const noexcept {
  return *std::min_element(dims_.begin(), dims_.end()) * spacing_;
}

Index3 Grid3::unflat(std::size_t idx) const noexcept {
  const int k = static_cast<int>(idx % dims_[2]);
  idx /= dims_[2];
  const int j = static_cast<int>(idx % dims_[1]);
  const int i = static_cast<int>(idx / dims_[1]);
  return {i, j, k};
}

Vec3 Grid3::position(std::size_t idx) const noexcept {
  const Index3 ijk = unflat(idx);
  return {coord(0, ijk[0]), coord(1, ijk[1]), coord(2, ijk[2])};
}

double Grid3::wavenumber(int axis, int i) const noexcept {
  const int n = dims_[axis];
  const int m = (i < (n + 1) / 2) ? i : i - n;
  return 2.0 * std::numbers::pi * m / box_length(axis);
}

double Grid3::derivative_wavenumber(int axis, int i) const noexcept {
  const int n = dims_[axis];
  if (n % 2 == 0 && i == n / 2) return 0.0;
  return wavenumber(axis, i);
}

Grid3 Grid3::dilated(double lambda) const {
  if (!(lambda > 0.0)) throw Error(ErrorCode::invalid_argument, "dilation factor must be positive");
  return Grid3(dims_, spacing_ / lambda);
}

void require_same_grid(const Grid3& a, const Grid3& b, const char* where) {
  if (!(a == b)) throw Error(ErrorCode::grid_mismatch, where);
}

RealField sample_real(const Grid3& grid, const std::function<double(const Vec3&)>& f) {
  RealField out(grid);
  for (std::size_t i = 0; i < grid.size(); ++i) out[i] = f(grid.position(i));
  return out;
}

ComplexField sample_complex(const Grid3& grid, const std::function<cplx(const Vec3&)>& f) {
  ComplexField out(grid);
  for (std::size_t i = 0; i < grid.size(); ++i) out[i] = f(grid.position(i));
  return out;
}

ComplexField to_complex(const RealField& f) {
  ComplexField out(f.grid());
  for (std::size_t i = 0; i < f.size(); ++i) out[i] = f[i];
  return out;
}

RealField real_part(const ComplexField& f) {
  RealField out(f.grid());
  for (std::size_t i = 0; i < f.size(); ++i) out[i] = f[i].real();
  return out;
}

VectorPotentialField::VectorPotentialField(const Grid3& grid)
    : components_{RealField(grid), RealField(grid), RealField(grid)} {}

VectorPotentialField::VectorPotentialField(RealField a1, RealField a2, RealField a3)
    : components_{std::move(a1), std::move(a2), std::move(a3)} {
  require_same_grid(components_[0].grid(), components_[1].grid(), "vector potential components");
  require_same_grid(components_[0].grid(), components_[2].grid(), "vector potential components");
}

}  // namespace pekar
