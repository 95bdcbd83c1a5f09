#pragma once
// Uniform periodic 3-D sampling box and the fields that live on it.
//
// Grid points sit at x_a = (i_a - n_a/2) * spacing, so the origin is a grid
// point and the box is [-L_a/2, L_a/2) along each axis. Storage is row-major
// with the last axis fastest, matching FFTW's 3-D layout.

#include <array>
#include <complex>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "pekar/error.hpp"

namespace pekar {

using cplx = std::complex<double>;
using Vec3 = std::array<double, 3>;
using Index3 = std::array<int, 3>;

class Grid3 {
 public:
  static constexpr int kMinDim = 8;

  Grid3(Index3 dims, double spacing);

  const Index3& dims() const noexcept { return dims_; }
  int dim(int axis) const noexcept { return dims_[axis]; }
  double spacing() const noexcept { return spacing_; }
  std::size_t size() const noexcept { return size_; }
  double box_length(int axis) const noexcept { return dims_[axis] * spacing_; }
  double min_box_length() const noexcept;
  double cell_volume() const noexcept { return spacing_ * spacing_ * spacing_; }

  double coord(int axis, int i) const noexcept { return (i - dims_[axis] / 2) * spacing_; }
  std::size_t flat(int i, int j, int k) const noexcept {
    return (static_cast<std::size_t>(i) * dims_[1] + j) * dims_[2] + k;
  }
  Index3 unflat(std::size_t idx) const noexcept;
  Vec3 position(std::size_t idx) const noexcept;

  // Angular wavenumber of FFT bin i along an axis; the Nyquist bin is negative.
  double wavenumber(int axis, int i) const noexcept;
  // Wavenumber used for first derivatives: identical except the Nyquist bin is
  // zeroed, so derivatives of real fields stay real and -i d/dx stays Hermitian.
  double derivative_wavenumber(int axis, int i) const noexcept;

  // Same dims, spacing divided by lambda.
  Grid3 dilated(double lambda) const;

  bool operator==(const Grid3& other) const noexcept {
    return dims_ == other.dims_ && spacing_ == other.spacing_;
  }

 private:
  Index3 dims_;
  double spacing_;
  std::size_t size_;
};

void require_same_grid(const Grid3& a, const Grid3& b, const char* where);

template <typename T>
class Field {
 public:
  using value_type = T;

  explicit Field(const Grid3& grid) : grid_(grid), values_(grid.size(), T{}) {}
  Field(const Grid3& grid, std::vector<T> values) : grid_(grid), values_(std::move(values)) {
    if (values_.size() != grid_.size())
      throw Error(ErrorCode::invalid_argument, "field value count does not match grid");
  }

  const Grid3& grid() const noexcept { return grid_; }
  std::size_t size() const noexcept { return values_.size(); }
  T* data() noexcept { return values_.data(); }
  const T* data() const noexcept { return values_.data(); }
  std::span<T> values() noexcept { return values_; }
  std::span<const T> values() const noexcept { return values_; }
  T& operator[](std::size_t i) noexcept { return values_[i]; }
  const T& operator[](std::size_t i) const noexcept { return values_[i]; }

  Field& operator+=(const Field& o) {
    require_same_grid(grid_, o.grid_, "field +=");
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += o.values_[i];
    return *this;
  }
  Field& operator-=(const Field& o) {
    require_same_grid(grid_, o.grid_, "field -=");
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= o.values_[i];
    return *this;
  }
  template <typename S>
  Field& operator*=(S s) {
    for (auto& v : values_) v *= s;
    return *this;
  }

  // Same samples reinterpreted on a grid with identical dims.
  Field with_grid(const Grid3& g) const {
    if (g.dims() != grid_.dims()) throw Error(ErrorCode::grid_mismatch, "with_grid needs equal dims");
    return Field(g, values_);
  }

 private:
  Grid3 grid_;
  std::vector<T> values_;
};

using RealField = Field<double>;
using ComplexField = Field<cplx>;

RealField sample_real(const Grid3& grid, const std::function<double(const Vec3&)>& f);
ComplexField sample_complex(const Grid3& grid, const std::function<cplx(const Vec3&)>& f);
ComplexField to_complex(const RealField& f);
RealField real_part(const ComplexField& f);

// A_1, A_2, A_3 on one grid.
class VectorPotentialField {
 public:
  explicit VectorPotentialField(const Grid3& grid);
  VectorPotentialField(RealField a1, RealField a2, RealField a3);

  const Grid3& grid() const noexcept { return components_[0].grid(); }
  const RealField& operator[](int axis) const noexcept { return components_[axis]; }
  RealField& operator[](int axis) noexcept { return components_[axis]; }

 private:
  std::array<RealField, 3> components_;
};

}  // namespace pekar
