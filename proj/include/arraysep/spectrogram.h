#pragma once

#include <string>
#include <vector>

#include "arraysep/stft.h"
#include "arraysep/types.h"

namespace arraysep {

inline constexpr double kSpectrogramFloorDb = -120.0;

// Magnitudes in dB (10 log10 |X|^2, floored), frames x bins.
struct Spectrogram {
  double sample_rate = 0.0;
  std::size_t frame_size = 0;
  std::size_t hop_size = 0;
  std::vector<std::vector<double>> db;
};

Spectrogram compute_spectrogram(const Signal& signal, const StftConfig& cfg);

// Text format:
//   # arraysep spectrogram v1
//   # frames=<L> bins=<K> frame_size=<F> hop_size=<H> sample_rate=<fs> floor_db=-120
//   <K values of frame 0, space separated>
//   ...
// Values are written with round-trip precision.
void write_spectrogram(const std::string& path, const Spectrogram& spec);
Spectrogram read_spectrogram(const std::string& path);

void spectrogram_dump(const Signal& signal, const StftConfig& cfg, const std::string& path);

}  // namespace arraysep
