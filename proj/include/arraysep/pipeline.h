#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "arraysep/geometry.h"
#include "arraysep/metrics.h"
#include "arraysep/postfilter.h"
#include "arraysep/simulate.h"
#include "arraysep/stft.h"

namespace arraysep {

// The five processing chains compared in the evaluation tables.
enum class Variant {
  kMic,           // raw first microphone for every source slot
  kDelayAndSum,   // W held at its delay-and-sum initialisation
  kGss,           // adaptive separation only
  kGssSinglePf,   // + per-output MCRA/MMSE enhancer, no leakage term
  kGssMultiPf,    // + post-filter with inter-channel leakage
};

inline constexpr Variant kAllVariants[] = {Variant::kMic, Variant::kDelayAndSum, Variant::kGss,
                                           Variant::kGssSinglePf, Variant::kGssMultiPf};

std::string_view variant_name(Variant v);
// Accepts the names returned by variant_name(); nullopt otherwise.
std::optional<Variant> parse_variant(std::string_view name);

struct PipelineConfig {
  StftConfig stft;
  double mu = 0.01;
  PostfilterConfig postfilter;
};

enum class EventKind { kAdd, kRemove };

struct SourceEvent {
  double time_seconds = 0.0;
  EventKind kind = EventKind::kAdd;
  int id = 0;
};

// A source known to the separator: its id and far-field direction.
struct SourceTrack {
  int id = 0;
  Eigen::Vector3d direction = Eigen::Vector3d::UnitX();
};

struct PipelineResult {
  std::vector<int> source_ids;  // order of tracks passed in
  MultiSignal outputs;          // one per track, aligned with the input timeline
  double processing_seconds = 0.0;
  double audio_seconds = 0.0;

  double realtime_factor() const { return audio_seconds > 0.0 ? processing_seconds / audio_seconds : 0.0; }
};

// Frame-by-frame separation of a microphone recording. Tracks not named in
// an add event are active from the first frame; events take effect at the
// frame nearest to their time. Outputs are compensated for the STFT latency
// and are zero while their source is inactive.
PipelineResult run_pipeline(const MultiSignal& mics, const std::vector<Eigen::Vector3d>& mic_positions,
                            double speed_of_sound, const std::vector<SourceTrack>& tracks,
                            const std::vector<SourceEvent>& events, Variant variant,
                            const PipelineConfig& cfg);

// Add/remove events implied by the sources' active intervals.
std::vector<SourceEvent> events_from_scenario(const Scenario& scenario);
std::vector<SourceTrack> tracks_from_scenario(const Scenario& scenario);

PipelineResult run_scenario(const Scenario& scenario, const Mixture& mixture, Variant variant,
                            const PipelineConfig& cfg);

// SNR and LSD of every output against its clean reference.
MetricReport evaluate(const Mixture& mixture, const PipelineResult& result, Variant variant,
                      const StftConfig& stft);

}  // namespace arraysep
