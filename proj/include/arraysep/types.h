#pragma once

#include <complex>
#include <vector>

namespace arraysep {

using Complex = std::complex<double>;

// One channel of time-domain samples, nominally in [-1, 1].
using Signal = std::vector<double>;

// Channel-major multichannel buffer: channels[c][n].
using MultiSignal = std::vector<Signal>;

}  // namespace arraysep
