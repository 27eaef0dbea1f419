#pragma once

#include <cstddef>
#include <span>

#include "arraysep/types.h"

namespace arraysep {

// Real-input FFT of a fixed power-of-two size, backed by FFTW.
// forward() is unnormalised; inverse() divides by size(), so
// inverse(forward(x)) == x.
class RealFft {
 public:
  explicit RealFft(std::size_t size);
  ~RealFft();

  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;
  RealFft(RealFft&& other) noexcept;
  RealFft& operator=(RealFft&& other) noexcept;

  std::size_t size() const { return size_; }
  std::size_t num_bins() const { return size_ / 2 + 1; }

  // in.size() == size(), out.size() == num_bins()
  void forward(std::span<const double> in, std::span<Complex> out);
  // in.size() == num_bins(), out.size() == size()
  void inverse(std::span<const Complex> in, std::span<double> out);

 private:
  void release();

  std::size_t size_ = 0;
  double* real_ = nullptr;
  void* spec_ = nullptr;
  void* forward_plan_ = nullptr;
  void* inverse_plan_ = nullptr;
};

}  // namespace arraysep
