#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "arraysep/fft.h"
#include "arraysep/types.h"

namespace arraysep {

enum class WindowType {
  kSqrtHann,     // periodic sqrt-Hann for both analysis and synthesis
  kRectangular,  // boxcar analysis, scaled boxcar synthesis
};

struct StftConfig {
  std::size_t frame_size = 1024;
  std::size_t hop_size = 512;
  double sample_rate = 16000.0;
  WindowType window = WindowType::kSqrtHann;

  std::size_t num_bins() const { return frame_size / 2 + 1; }
  // Delay, in samples, between an input sample and its reconstruction.
  std::size_t latency() const { return frame_size - hop_size; }

  // Throws ConfigError unless frame_size is a power of two, hop_size divides
  // it and the window pair overlap-adds to a constant at this hop.
  void validate() const;
};

// Analysis/synthesis window pair. The synthesis window is scaled so that
// sum_r analysis[n + rH] * synthesis[n + rH] == 1 for every n.
struct WindowPair {
  std::vector<double> analysis;
  std::vector<double> synthesis;
};

WindowPair make_window_pair(const StftConfig& cfg);

// Spectra of all channels at one frame: bins(c, k), c < channels, k < F/2+1.
struct SpectralFrame {
  std::size_t frame_index = 0;
  Eigen::MatrixXcd bins;

  std::size_t channels() const { return static_cast<std::size_t>(bins.rows()); }
  std::size_t num_bins() const { return static_cast<std::size_t>(bins.cols()); }
};

// Streaming analysis. The history buffer starts as frame_size - hop_size
// zeros; each completed hop of new input yields one frame.
class StftAnalyzer {
 public:
  StftAnalyzer(const StftConfig& cfg, std::size_t channels);

  // block[c] must all have the same length (>= 1) and block.size() must equal
  // channels(); otherwise ConfigError.
  std::vector<SpectralFrame> analyze(const MultiSignal& block);

  std::size_t channels() const { return channels_; }
  const StftConfig& config() const { return cfg_; }

 private:
  StftConfig cfg_;
  std::size_t channels_;
  WindowPair windows_;
  RealFft fft_;
  std::vector<std::vector<double>> history_;  // [c][frame_size]
  std::size_t filled_;                        // valid samples in history_
  std::size_t next_index_ = 0;
  std::vector<double> scratch_;
  std::vector<Complex> spec_;
};

// Streaming overlap-add synthesis; each frame emits hop_size samples.
class StftSynthesizer {
 public:
  StftSynthesizer(const StftConfig& cfg, std::size_t channels);

  MultiSignal synthesize(std::span<const SpectralFrame> frames);
  MultiSignal synthesize(const SpectralFrame& frame);

  std::size_t channels() const { return channels_; }

 private:
  StftConfig cfg_;
  std::size_t channels_;
  WindowPair windows_;
  RealFft fft_;
  std::vector<std::vector<double>> accum_;  // [c][frame_size]
  std::vector<double> scratch_;
  std::vector<Complex> spec_;
};

// Whole-signal helpers on top of the streaming classes.
std::vector<SpectralFrame> analyze_signal(const MultiSignal& signal, const StftConfig& cfg);
MultiSignal synthesize_frames(std::span<const SpectralFrame> frames, const StftConfig& cfg,
                              std::size_t channels);

}  // namespace arraysep
