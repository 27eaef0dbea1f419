#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "arraysep/geometry.h"
#include "arraysep/types.h"

namespace arraysep {

inline constexpr std::size_t kFractionalDelayTaps = 64;
inline constexpr double kFractionalDelayKaiserBeta = 8.0;

// Band-limited delay by a real number of samples (positive = later) using a
// 64-tap Kaiser-windowed sinc. Integer delays are exact shifts. Samples
// outside the input are taken as zero.
Signal fractional_delay(const Signal& signal, double delay);

struct SourceSpec {
  int id = 0;
  Eigen::Vector3d direction = Eigen::Vector3d::UnitX();
  Signal signal;
  double gain = 1.0;
  // Active interval; the source is silent outside it.
  double start_seconds = 0.0;
  double stop_seconds = std::numeric_limits<double>::infinity();
};

enum class NoiseType { kNone, kWhite, kFile };

struct NoiseSpec {
  NoiseType type = NoiseType::kWhite;
  // Per-mic ratio of summed source power to noise power, dB.
  double level_db = 0.0;
  // kFile: one channel per mic, or a single channel reused at random offsets.
  MultiSignal recording;
};

struct Scenario {
  std::vector<Eigen::Vector3d> mic_positions;
  double speed_of_sound = 343.0;
  double sample_rate = 16000.0;
  std::vector<SourceSpec> sources;
  NoiseSpec noise;
  double duration_seconds = 0.0;
  std::uint64_t seed = 1;
  // Optional exponentially decaying diffuse tail; 0 disables it.
  double rt60_seconds = 0.0;

  std::size_t num_samples() const;
  ArrayScene scene() const;
  // Throws ValidationError for an empty scenario or when the duration exceeds
  // any source's material.
  void validate() const;
};

struct Mixture {
  MultiSignal mics;        // N channels
  MultiSignal references;  // per source: gated, scaled signal at the array centroid
  MultiSignal noise;       // the noise actually added to each mic
  MultiSignal images;      // per mic: summed source contribution before noise
};

Mixture mix(const Scenario& scenario);

// Deterministic speech-like test signal: harmonic voiced syllables with a
// wandering pitch and per-syllable formant envelope, fricative noise bursts
// and pauses.
struct SurrogateVoice {
  double f0_hz = 140.0;
  double f0_jitter = 0.15;        // relative pitch excursion
  double syllable_rate_hz = 4.0;
  double pause_probability = 0.2;
  double rms = 0.1;
};

Signal speech_surrogate(const SurrogateVoice& voice, std::size_t samples, double sample_rate, std::uint64_t seed);

}  // namespace arraysep
