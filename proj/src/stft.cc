#include "arraysep/stft.h"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "arraysep/error.h"

namespace arraysep {

namespace {

bool is_power_of_two(std::size_t n) { return n >= 2 && (n & (n - 1)) == 0; }

// Sum of analysis*synthesis over all hop shifts, evaluated at n in [0, hop).
std::vector<double> overlap_sum(const std::vector<double>& a, const std::vector<double>& s,
                                std::size_t hop) {
  std::vector<double> sum(hop, 0.0);
  for (std::size_t n = 0; n < a.size(); ++n) sum[n % hop] += a[n] * s[n];
  return sum;
}

}  // namespace

void StftConfig::validate() const {
  if (!is_power_of_two(frame_size)) throw ConfigError("frame_size must be a power of two");
  if (hop_size == 0 || hop_size > frame_size || frame_size % hop_size != 0)
    throw ConfigError("hop_size must divide frame_size");
  if (!(sample_rate > 0.0)) throw ConfigError("sample_rate must be positive");
  make_window_pair(*this);
}

WindowPair make_window_pair(const StftConfig& cfg) {
  const std::size_t n_fft = cfg.frame_size;
  WindowPair w;
  w.analysis.resize(n_fft);
  w.synthesis.resize(n_fft);
  for (std::size_t n = 0; n < n_fft; ++n) {
    double v = 1.0;
    if (cfg.window == WindowType::kSqrtHann) {
      const double hann =
          0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(n) / static_cast<double>(n_fft));
      v = std::sqrt(hann);
    }
    w.analysis[n] = v;
    w.synthesis[n] = v;
  }
  const auto sum = overlap_sum(w.analysis, w.synthesis, cfg.hop_size);
  const double ref = sum[0];
  for (double v : sum) {
    if (!(ref > 0.0) || std::abs(v - ref) > 1e-12 * ref)
      throw ConfigError("window pair does not satisfy constant overlap-add at this hop");
  }
  for (double& v : w.synthesis) v /= ref;
  return w;
}

StftAnalyzer::StftAnalyzer(const StftConfig& cfg, std::size_t channels)
    : cfg_(cfg),
      channels_(channels),
      windows_(make_window_pair(cfg)),
      fft_(cfg.frame_size),
      history_(channels, std::vector<double>(cfg.frame_size, 0.0)),
      filled_(cfg.frame_size - cfg.hop_size),
      scratch_(cfg.frame_size),
      spec_(cfg.num_bins()) {
  cfg_.validate();
  if (channels == 0) throw ConfigError("StftAnalyzer needs at least one channel");
}

std::vector<SpectralFrame> StftAnalyzer::analyze(const MultiSignal& block) {
  if (block.size() != channels_)
    throw ConfigError("analyze: channel count does not match stream state");
  const std::size_t len = block.front().size();
  for (const auto& ch : block)
    if (ch.size() != len) throw ConfigError("analyze: channels have different lengths");

  const std::size_t n_fft = cfg_.frame_size;
  const std::size_t hop = cfg_.hop_size;
  std::vector<SpectralFrame> frames;
  std::size_t pos = 0;
  while (pos < len) {
    const std::size_t take = std::min(n_fft - filled_, len - pos);
    for (std::size_t c = 0; c < channels_; ++c)
      std::copy_n(block[c].begin() + static_cast<std::ptrdiff_t>(pos), take,
                  history_[c].begin() + static_cast<std::ptrdiff_t>(filled_));
    filled_ += take;
    pos += take;
    if (filled_ < n_fft) break;

    SpectralFrame frame;
    frame.frame_index = next_index_++;
    frame.bins.resize(static_cast<Eigen::Index>(channels_), static_cast<Eigen::Index>(cfg_.num_bins()));
    for (std::size_t c = 0; c < channels_; ++c) {
      for (std::size_t n = 0; n < n_fft; ++n) scratch_[n] = history_[c][n] * windows_.analysis[n];
      fft_.forward(scratch_, spec_);
      for (std::size_t k = 0; k < spec_.size(); ++k)
        frame.bins(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(k)) = spec_[k];
      std::copy(history_[c].begin() + static_cast<std::ptrdiff_t>(hop), history_[c].end(),
                history_[c].begin());
    }
    filled_ -= hop;
    frames.push_back(std::move(frame));
  }
  return frames;
}

StftSynthesizer::StftSynthesizer(const StftConfig& cfg, std::size_t channels)
    : cfg_(cfg),
      channels_(channels),
      windows_(make_window_pair(cfg)),
      fft_(cfg.frame_size),
      accum_(channels, std::vector<double>(cfg.frame_size, 0.0)),
      scratch_(cfg.frame_size),
      spec_(cfg.num_bins()) {
  cfg_.validate();
  if (channels == 0) throw ConfigError("StftSynthesizer needs at least one channel");
}

MultiSignal StftSynthesizer::synthesize(const SpectralFrame& frame) {
  return synthesize(std::span<const SpectralFrame>(&frame, 1));
}

MultiSignal StftSynthesizer::synthesize(std::span<const SpectralFrame> frames) {
  const std::size_t n_fft = cfg_.frame_size;
  const std::size_t hop = cfg_.hop_size;
  MultiSignal out(channels_);
  for (auto& ch : out) ch.reserve(frames.size() * hop);

  for (const auto& frame : frames) {
    if (frame.num_bins() != cfg_.num_bins())
      throw ConfigError("synthesize: bin count does not match configuration");
    if (frame.channels() != channels_)
      throw ConfigError("synthesize: channel count does not match stream state");
    for (std::size_t c = 0; c < channels_; ++c) {
      for (std::size_t k = 0; k < spec_.size(); ++k)
        spec_[k] = frame.bins(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(k));
      fft_.inverse(spec_, scratch_);
      auto& acc = accum_[c];
      for (std::size_t n = 0; n < n_fft; ++n) acc[n] += scratch_[n] * windows_.synthesis[n];
      out[c].insert(out[c].end(), acc.begin(), acc.begin() + static_cast<std::ptrdiff_t>(hop));
      std::copy(acc.begin() + static_cast<std::ptrdiff_t>(hop), acc.end(), acc.begin());
      std::fill(acc.end() - static_cast<std::ptrdiff_t>(hop), acc.end(), 0.0);
    }
  }
  return out;
}

std::vector<SpectralFrame> analyze_signal(const MultiSignal& signal, const StftConfig& cfg) {
  StftAnalyzer analyzer(cfg, signal.size());
  if (signal.empty() || signal.front().empty()) return {};
  return analyzer.analyze(signal);
}

MultiSignal synthesize_frames(std::span<const SpectralFrame> frames, const StftConfig& cfg,
                              std::size_t channels) {
  StftSynthesizer synth(cfg, channels);
  return synth.synthesize(frames);
}

}  // namespace arraysep
