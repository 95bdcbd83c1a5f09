#pragma once
// Thin RAII wrapper over FFTW's complex 3-D transforms.

#include <memory>

#include "pekar/grid.hpp"

namespace pekar {

class Fft3 {
 public:
  // Shared, thread-safe plan cache keyed by dims.
  static const Fft3& for_dims(const Index3& dims);

  explicit Fft3(const Index3& dims);
  ~Fft3();
  Fft3(const Fft3&) = delete;
  Fft3& operator=(const Fft3&) = delete;

  std::size_t size() const noexcept { return size_; }

  // Unnormalized forward (e^{-ikx}) and backward (e^{+ikx}) transforms.
  // In-place is allowed. Safe to call concurrently.
  void forward(const cplx* in, cplx* out) const;
  void backward(const cplx* in, cplx* out) const;
  // backward followed by division by size().
  void inverse(const cplx* in, cplx* out) const;

 private:
  struct Plans;
  std::unique_ptr<Plans> plans_;
  std::size_t size_;
};

}  // namespace pekar
