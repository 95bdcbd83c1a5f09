#include "pekar/fft.hpp"

#include <fftw3.h>

#include <algorithm>
#include <map>
#include <mutex>
#include <vector>

namespace pekar {
namespace {

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

struct Fft3::Plans {
  fftw_plan fwd = nullptr;
  fftw_plan bwd = nullptr;
};

Fft3::Fft3(const Index3& dims)
    : plans_(std::make_unique<Plans>()),
      size_(static_cast<std::size_t>(dims[0]) * dims[1] * dims[2]) {
  std::vector<cplx> scratch(size_);
  auto* buf = reinterpret_cast<fftw_complex*>(scratch.data());
  // FFTW_ESTIMATE keeps plans (and therefore rounding) identical run to run.
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  std::lock_guard lock(planner_mutex());
  plans_->fwd = fftw_plan_dft_3d(dims[0], dims[1], dims[2], buf, buf, FFTW_FORWARD, flags);
  plans_->bwd = fftw_plan_dft_3d(dims[0], dims[1], dims[2], buf, buf, FFTW_BACKWARD, flags);
  if (plans_->fwd == nullptr || plans_->bwd == nullptr)
    throw Error(ErrorCode::invalid_argument, "FFTW planning failed");
}

Fft3::~Fft3() {
  std::lock_guard lock(planner_mutex());
  if (plans_->fwd) fftw_destroy_plan(plans_->fwd);
  if (plans_->bwd) fftw_destroy_plan(plans_->bwd);
}

const Fft3& Fft3::for_dims(const Index3& dims) {
  static std::mutex cache_mutex;
  static std::map<Index3, std::unique_ptr<Fft3>> cache;
  std::lock_guard lock(cache_mutex);
  auto& slot = cache[dims];
  if (!slot) slot = std::make_unique<Fft3>(dims);
  return *slot;
}

void Fft3::forward(const cplx* in, cplx* out) const {
  if (in != out) std::copy(in, in + size_, out);
  fftw_execute_dft(plans_->fwd, reinterpret_cast<fftw_complex*>(out), reinterpret_cast<fftw_complex*>(out));
}

void Fft3::backward(const cplx* in, cplx* out) const {
  if (in != out) std::copy(in, in + size_, out);
  fftw_execute_dft(plans_->bwd, reinterpret_cast<fftw_complex*>(out), reinterpret_cast<fftw_complex*>(out));
}

void Fft3::inverse(const cplx* in, cplx* out) const {
  backward(in, out);
  const double s = 1.0 / static_cast<double>(size_);
  for (std::size_t i = 0; i < size_; ++i) out[i] *= s;
}

}  // namespace pekar
