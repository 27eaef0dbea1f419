#include "arraysep/fft.h"

#include <fftw3.h>

#include <algorithm>
#include <utility>

#include "arraysep/error.h"

namespace arraysep {

RealFft::RealFft(std::size_t size) : size_(size) {
  if (size < 2 || (size & (size - 1)) != 0)
    throw ConfigError("FFT size must be a power of two >= 2");
  const int n = static_cast<int>(size);
  real_ = fftw_alloc_real(size);
  auto* spec = fftw_alloc_complex(num_bins());
  spec_ = spec;
  forward_plan_ = fftw_plan_dft_r2c_1d(n, real_, spec, FFTW_ESTIMATE);
  inverse_plan_ = fftw_plan_dft_c2r_1d(n, spec, real_, FFTW_ESTIMATE);
}

RealFft::~RealFft() { release(); }

RealFft::RealFft(RealFft&& other) noexcept { *this = std::move(other); }

RealFft& RealFft::operator=(RealFft&& other) noexcept {
  if (this != &other) {
    release();
    size_ = std::exchange(other.size_, 0);
    real_ = std::exchange(other.real_, nullptr);
    spec_ = std::exchange(other.spec_, nullptr);
    forward_plan_ = std::exchange(other.forward_plan_, nullptr);
    inverse_plan_ = std::exchange(other.inverse_plan_, nullptr);
  }
  return *this;
}

void RealFft::release() {
  if (forward_plan_) fftw_destroy_plan(static_cast<fftw_plan>(forward_plan_));
  if (inverse_plan_) fftw_destroy_plan(static_cast<fftw_plan>(inverse_plan_));
  if (real_) fftw_free(real_);
  if (spec_) fftw_free(spec_);
  forward_plan_ = inverse_plan_ = nullptr;
  real_ = nullptr;
  spec_ = nullptr;
}

void RealFft::forward(std::span<const double> in, std::span<Complex> out) {
  if (in.size() != size_ || out.size() != num_bins())
    throw ConfigError("RealFft::forward: buffer size mismatch");
  std::copy(in.begin(), in.end(), real_);
  fftw_execute(static_cast<fftw_plan>(forward_plan_));
  const auto* spec = static_cast<const fftw_complex*>(spec_);
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = Complex(spec[k][0], spec[k][1]);
}

void RealFft::inverse(std::span<const Complex> in, std::span<double> out) {
  if (in.size() != num_bins() || out.size() != size_)
    throw ConfigError("RealFft::inverse: buffer size mismatch");
  auto* spec = static_cast<fftw_complex*>(spec_);
  for (std::size_t k = 0; k < in.size(); ++k) {
    spec[k][0] = in[k].real();
    spec[k][1] = in[k].imag();
  }
  // c2r ignores the imaginary parts of DC and Nyquist.
  fftw_execute(static_cast<fftw_plan>(inverse_plan_));
  const double scale = 1.0 / static_cast<double>(size_);
  for (std::size_t n = 0; n < size_; ++n) out[n] = real_[n] * scale;
}

}  // namespace arraysep
