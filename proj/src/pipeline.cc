#include "arraysep/pipeline.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <memory>

#include "arraysep/error.h"
#include "arraysep/gss.h"

namespace arraysep {

std::string_view variant_name(Variant v) {
  switch (v) {
    case Variant::kMic: return "mic";
    case Variant::kDelayAndSum: return "delay_and_sum";
    case Variant::kGss: return "gss";
    case Variant::kGssSinglePf: return "gss_single_pf";
    case Variant::kGssMultiPf: return "gss_multi_pf";
  }
  return "unknown";
}

std::optional<Variant> parse_variant(std::string_view name) {
  for (Variant v : kAllVariants)
    if (variant_name(v) == name) return v;
  return std::nullopt;
}

namespace {

struct ActiveOutput {
  int id;
  std::size_t track;
  std::vector<Eigen::VectorXcd> steering;
  std::unique_ptr<StftSynthesizer> synth;
};

std::vector<SpectralFrame> single_row_frames(const SpectralFrame& frame) {
  std::vector<SpectralFrame> rows;
  rows.reserve(frame.channels());
  for (Eigen::Index r = 0; r < frame.bins.rows(); ++r) {
    SpectralFrame f;
    f.frame_index = frame.frame_index;
    f.bins = frame.bins.row(r);
    rows.push_back(std::move(f));
  }
  return rows;
}

}  // namespace

PipelineResult run_pipeline(const MultiSignal& mics, const std::vector<Eigen::Vector3d>& mic_positions,
                            double speed_of_sound, const std::vector<SourceTrack>& tracks,
                            const std::vector<SourceEvent>& events, Variant variant,
                            const PipelineConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  const StftConfig& stft = cfg.stft;
  stft.validate();
  const std::size_t n_mics = mic_positions.size();
  if (mics.size() != n_mics) throw ConfigError("microphone signal count does not match array geometry");
  if (mics.empty() || mics.front().empty()) throw ValidationError("empty microphone recording");
  const std::size_t len = mics.front().size();
  for (const auto& ch : mics)
    if (ch.size() != len) throw ValidationError("microphone channels differ in length");

  PipelineResult result;
  result.audio_seconds = static_cast<double>(len) / stft.sample_rate;
  std::map<int, std::size_t> track_index;
  for (std::size_t t = 0; t < tracks.size(); ++t) {
    if (!track_index.emplace(tracks[t].id, t).second) throw ValidationError("duplicate track id");
    result.source_ids.push_back(tracks[t].id);
  }
  result.outputs.assign(tracks.size(), Signal(len, 0.0));

  const std::size_t hop = stft.hop_size;
  const std::size_t latency = stft.latency();
  // Frame at which each event applies.
  std::multimap<std::size_t, SourceEvent> schedule;
  std::vector<bool> starts_active(tracks.size(), true);
  for (const auto& ev : events) {
    const auto it = track_index.find(ev.id);
    if (it == track_index.end()) throw ValidationError("event names unknown source " + std::to_string(ev.id));
    if (ev.kind == EventKind::kAdd) starts_active[it->second] = false;
    const auto frame = static_cast<std::size_t>(std::max(0.0, std::round(ev.time_seconds * stft.sample_rate / static_cast<double>(hop))));
    schedule.emplace(frame, ev);
  }

  if (variant == Variant::kMic) {
    for (std::size_t t = 0; t < tracks.size(); ++t) result.outputs[t] = mics.front();
    for (const auto& [frame, ev] : schedule) {
      auto& out = result.outputs[track_index.at(ev.id)];
      const std::size_t at = std::min(len, frame * hop);
      if (ev.kind == EventKind::kAdd) std::fill(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(at), 0.0);
      else std::fill(out.begin() + static_cast<std::ptrdiff_t>(at), out.end(), 0.0);
    }
    result.processing_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return result;
  }

  ArrayScene scene;
  scene.mic_positions = mic_positions;
  scene.speed_of_sound = speed_of_sound;
  scene.sample_rate = stft.sample_rate;
  for (const auto& tr : tracks) scene.source_directions.push_back(tr.direction);
  const SteeringMatrix all_steering = steering_matrix(delays(scene), stft.frame_size);

  const std::size_t bins = stft.num_bins();
  SeparationState gss(bins, n_mics, variant == Variant::kDelayAndSum ? 0.0 : cfg.mu);
  const bool use_pf = variant == Variant::kGssSinglePf || variant == Variant::kGssMultiPf;
  PostfilterConfig pf_cfg = cfg.postfilter;
  pf_cfg.use_leakage = variant == Variant::kGssMultiPf;
  Postfilter postfilter(pf_cfg, stft);
  const std::size_t window = mcra_window_frames(pf_cfg.mcra, stft);
  std::vector<McraTracker> mic_noise;
  if (use_pf) mic_noise.assign(n_mics, McraTracker(bins, pf_cfg.mcra, window));

  std::vector<ActiveOutput> active;
  SteeringMatrix a;  // N x M for the active set
  auto rebuild_steering = [&] {
    a.assign(bins, Eigen::MatrixXcd(static_cast<Eigen::Index>(n_mics), static_cast<Eigen::Index>(active.size())));
    for (std::size_t k = 0; k < bins; ++k)
      for (std::size_t m = 0; m < active.size(); ++m) a[k].col(static_cast<Eigen::Index>(m)) = active[m].steering[k];
  };
  auto add = [&](std::size_t track, bool have_mic_noise) {
    ActiveOutput out{tracks[track].id, track, steering_column(all_steering, track),
                     std::make_unique<StftSynthesizer>(stft, 1)};
    add_source(gss, out.steering, out.id);
    if (use_pf) {
      std::vector<double> init;
      if (have_mic_noise) {
        std::vector<std::vector<double>> sigma;
        for (const auto& tr : mic_noise) sigma.push_back(tr.noise());
        init = init_noise(sigma);
      }
      postfilter.add_source(out.id, init);
    }
    active.push_back(std::move(out));
  };
  auto remove = [&](int id) {
    const auto it = std::find_if(active.begin(), active.end(), [id](const auto& o) { return o.id == id; });
    if (it == active.end()) throw ValidationError("remove event for inactive source " + std::to_string(id));
    remove_source(gss, id);
    if (use_pf) postfilter.remove_source(id);
    active.erase(it);
  };

  for (std::size_t t = 0; t < tracks.size(); ++t)
    if (starts_active[t]) add(t, false);
  rebuild_steering();

  StftAnalyzer analyzer(stft, n_mics);
  const std::size_t padded = len + latency;
  MultiSignal block(n_mics, Signal(hop, 0.0));
  std::vector<double> power(bins);
  for (std::size_t pos = 0; pos < padded; pos += hop) {
    for (std::size_t c = 0; c < n_mics; ++c)
      for (std::size_t i = 0; i < hop; ++i) block[c][i] = pos + i < len ? mics[c][pos + i] : 0.0;
    for (const SpectralFrame& x : analyzer.analyze(block)) {
      bool changed = false;
      for (auto [it, end] = schedule.equal_range(x.frame_index); it != end; ++it) {
        const SourceEvent& ev = it->second;
        if (ev.kind == EventKind::kAdd) add(track_index.at(ev.id), use_pf && x.frame_index > 0);
        else remove(ev.id);
        changed = true;
      }
      if (changed) rebuild_steering();

      if (use_pf) {
        for (std::size_t c = 0; c < n_mics; ++c) {
          for (std::size_t k = 0; k < bins; ++k)
            power[k] = std::norm(x.bins(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(k)));
          mic_noise[c].update(power);
        }
      }
      if (active.empty()) continue;

      SpectralFrame y = separate(gss, x);
      if (variant != Variant::kDelayAndSum) update(gss, x, y, a);
      if (use_pf) y = postfilter.process(y);

      const auto rows = single_row_frames(y);
      // Frame l reconstructs input samples [l H - latency, l H - latency + H).
      const long start = static_cast<long>(x.frame_index * hop) - static_cast<long>(latency);
      for (std::size_t m = 0; m < active.size(); ++m) {
        const MultiSignal chunk = active[m].synth->synthesize(rows[m]);
        auto& out = result.outputs[active[m].track];
        for (std::size_t i = 0; i < hop; ++i) {
          const long at = start + static_cast<long>(i);
          if (at >= 0 && at < static_cast<long>(len)) out[static_cast<std::size_t>(at)] = chunk[0][i];
        }
      }
    }
  }
  result.processing_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return result;
}

std::vector<SourceEvent> events_from_scenario(const Scenario& scenario) {
  std::vector<SourceEvent> events;
  for (const auto& src : scenario.sources) {
    if (src.start_seconds > 0.0) events.push_back({src.start_seconds, EventKind::kAdd, src.id});
    if (std::isfinite(src.stop_seconds) && src.stop_seconds < scenario.duration_seconds)
      events.push_back({src.stop_seconds, EventKind::kRemove, src.id});
  }
  return events;
}

std::vector<SourceTrack> tracks_from_scenario(const Scenario& scenario) {
  std::vector<SourceTrack> tracks;
  for (const auto& src : scenario.sources) tracks.push_back({src.id, src.direction});
  return tracks;
}

PipelineResult run_scenario(const Scenario& scenario, const Mixture& mixture, Variant variant,
                            const PipelineConfig& cfg) {
  PipelineConfig c = cfg;
  c.stft.sample_rate = scenario.sample_rate;
  return run_pipeline(mixture.mics, scenario.mic_positions, scenario.speed_of_sound, tracks_from_scenario(scenario),
                      events_from_scenario(scenario), variant, c);
}

MetricReport evaluate(const Mixture& mixture, const PipelineResult& result, Variant variant,
                      const StftConfig& stft) {
  if (mixture.references.size() != result.outputs.size())
    throw ConfigError("evaluate: reference and output counts differ");
  MetricReport report;
  report.variant = std::string(variant_name(variant));
  report.source_ids = result.source_ids;
  for (std::size_t m = 0; m < result.outputs.size(); ++m) {
    const Signal& ref = mixture.references[m];
    const Signal& est = result.outputs[m];
    report.snr_db.push_back(snr_db(ref, est, stft.frame_size));
    const long lag = best_lag(ref, est, stft.frame_size);
    report.lsd_db.push_back(lsd_db(ref, shift_signal(est, lag), stft, default_lsd_epsilon(ref, stft)));
  }
  return report;
}

}  // namespace arraysep
