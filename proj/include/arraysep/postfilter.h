#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "arraysep/stft.h"
#include "arraysep/types.h"

namespace arraysep {

// Minima-controlled recursive averaging parameters.
struct McraConfig {
  double power_smoothing = 0.95;  // S <- a S + (1 - a) |Y|^2
  double window_seconds = 1.5;    // minimum-search window
  double ratio_threshold = 5.0;   // speech judged present when S > threshold * S_min
  double noise_smoothing = 0.95;  // lambda <- a lambda + (1 - a) |Y|^2 where speech is absent
};

struct PostfilterConfig {
  double eta = 0.1;             // leakage factor (linear; 0.1 = -10 dB)
  double alpha_s = 0.7;         // spectral smoothing of Z
  double alpha_p = 0.98;        // decision-directed a priori SNR constant
  double g_min = 0.0;           // gain floor under speech absence
  double alpha_exponent = 0.5;  // amplitude-domain exponent (1/2: loudness)
  McraConfig mcra;

  // A priori speech-presence measurement.
  double zeta_smoothing = 0.7;
  std::size_t local_window = 3;
  std::size_t global_window = 15;
  double zeta_min_db = 1.0;
  double zeta_max_db = 10.0;
  double q_max = 1.0;  // upper clamp on the a priori absence probability

  // Relative floor applied to lambda before it divides |Y|^2.
  double lambda_floor = 1e-12;

  // false: leakage term disabled (single-channel enhancer on each output).
  bool use_leakage = true;

  void validate() const;
};

// Stationary-noise tracker for one channel.
class McraTracker {
 public:
  McraTracker(std::size_t num_bins, const McraConfig& cfg, std::size_t window_frames);

  // Seeds the noise estimate; used before the first update or when a new
  // source takes over a channel mid-stream.
  void set_noise(std::span<const double> lambda);

  // One frame of power spectrum |Y|^2.
  void update(std::span<const double> power);

  const std::vector<double>& noise() const { return lambda_; }
  const std::vector<double>& smoothed() const { return smoothed_; }
  const std::vector<double>& minimum() const { return min_; }
  std::size_t frames() const { return frames_; }

 private:
  McraConfig cfg_;
  std::size_t window_frames_;
  std::vector<double> lambda_;
  std::vector<double> smoothed_;
  std::vector<double> min_;
  std::vector<double> tmp_;
  std::size_t frames_ = 0;
  bool seeded_ = false;
};

// Frames covered by a minimum-search window of the given length.
std::size_t mcra_window_frames(const McraConfig& cfg, const StftConfig& stft);

struct SnrEstimates {
  std::vector<double> gamma;    // a posteriori SNR |Y|^2 / lambda
  std::vector<double> xi;       // decision-directed a priori SNR
  std::vector<double> upsilon;  // gamma xi / (xi + 1)
};

// Running quantities of one separated output.
struct SourceFilterState {
  int id = 0;
  McraTracker stationary;
  std::vector<double> lambda_leak;
  std::vector<double> smoothed;        // Z
  std::vector<double> prev_gain_h1;    // G_H1 of the previous frame
  std::vector<double> prev_gamma;      // gamma of the previous frame
  std::vector<double> zeta;            // recursively averaged xi for q
  double mean_power = 0.0;             // long-run mean of |Y|^2 over bins
  std::size_t frames = 0;

  SourceFilterState(int id, std::size_t num_bins, const McraConfig& mcra, std::size_t window_frames);
  std::size_t num_bins() const { return smoothed.size(); }
};

// Z <- alpha_s Z + (1 - alpha_s) |Y|^2
void smooth_spectrum(std::vector<double>& z, std::span<const double> power, double alpha_s);

// lambda_leak[m][k] = eta * sum_{i != m} z[i][k]
std::vector<std::vector<double>> leakage_estimate(const std::vector<std::vector<double>>& z, double eta);

// lambda = lambda_stat + lambda_leak
std::vector<double> noise_total(std::span<const double> lambda_stat, std::span<const double> lambda_leak);

// gamma = |Y|^2 / lambda (lambda floored at lambda_floor),
// xi = alpha_p G_prev^2 gamma_prev + (1 - alpha_p) max(gamma - 1, 0),
// upsilon = gamma xi / (xi + 1).
SnrEstimates snr_estimates(std::span<const double> power, std::span<const double> lambda,
                           std::span<const double> prev_gain_h1, std::span<const double> prev_gamma,
                           double alpha_p, double lambda_floor);

// Unclamped MMSE gain under speech presence for amplitude exponent alpha:
//   G = sqrt(upsilon) / gamma * [Gamma(1 + alpha/2) M(-alpha/2; 1; -upsilon)]^(1/alpha)
double mmse_gain_raw(double gamma, double upsilon, double alpha = 0.5);

// mmse_gain_raw clamped to [0, 1].
double gain_h1(double gamma, double upsilon, double alpha = 0.5);

// Linear-in-dB mapping of a smoothed SNR onto [0, 1].
double presence_measure(double zeta, double zeta_min_db, double zeta_max_db);

// q = 1 - P_local P_global P_frame computed from zeta (already updated for
// this frame).
std::vector<double> apriori_absence(std::span<const double> zeta, const PostfilterConfig& cfg);

// p = {1 + q / (1 - q) (1 + xi) exp(-upsilon)}^-1, with p = 0 at q = 1.
double speech_probability(double q, double xi, double upsilon);

// [p G_H1^alpha + (1 - p) G_min^alpha]^(1/alpha); p^2 G_H1 for G_min = 0, alpha = 1/2.
double combined_gain(double gain_h1, double p, double g_min, double alpha);

// lambda_stat(k) = (1 / N^2) sum_n sigma2[n][k]
std::vector<double> init_noise(const std::vector<std::vector<double>>& mic_noise);

// Multi-source post-filter over the rows of GSS output frames.
class Postfilter {
 public:
  Postfilter(const PostfilterConfig& cfg, const StftConfig& stft);

  // Adds an output channel. initial_noise, when non-empty, seeds the
  // stationary estimate (see init_noise).
  void add_source(int id, std::span<const double> initial_noise = {});
  void remove_source(int id);

  std::size_t num_sources() const { return sources_.size(); }
  const std::vector<SourceFilterState>& sources() const { return sources_; }
  const PostfilterConfig& config() const { return cfg_; }

  // Row m of y belongs to the m-th added source still present. Returns the
  // enhanced spectra, same shape as y.
  SpectralFrame process(const SpectralFrame& y);

  // Per-bin total gain applied to each source in the last process() call.
  const std::vector<std::vector<double>>& last_gains() const { return last_gains_; }
  const std::vector<std::vector<double>>& last_presence() const { return last_presence_; }
  const std::vector<std::vector<double>>& last_noise() const { return last_noise_; }

 private:
  PostfilterConfig cfg_;
  std::size_t num_bins_;
  std::size_t window_frames_;
  std::vector<SourceFilterState> sources_;
  std::vector<std::vector<double>> last_gains_;
  std::vector<std::vector<double>> last_presence_;
  std::vector<std::vector<double>> last_noise_;
};

}  // namespace arraysep
