#include "arraysep/postfilter.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "arraysep/error.h"
#include "arraysep/special.h"

namespace arraysep {

void PostfilterConfig::validate() const {
  if (!(alpha_s > 0.0 && alpha_s < 1.0)) throw ConfigError("alpha_s must lie in (0, 1)");
  if (!(alpha_p >= 0.0 && alpha_p < 1.0)) throw ConfigError("alpha_p must lie in [0, 1)");
  if (!(eta >= 0.0)) throw ConfigError("eta must be >= 0");
  if (!(g_min >= 0.0 && g_min <= 1.0)) throw ConfigError("g_min must lie in [0, 1]");
  if (!(alpha_exponent > 0.0 && alpha_exponent <= 2.0)) throw ConfigError("alpha_exponent must lie in (0, 2]");
  if (!(zeta_smoothing >= 0.0 && zeta_smoothing < 1.0)) throw ConfigError("zeta_smoothing must lie in [0, 1)");
  if (local_window == 0 || global_window == 0) throw ConfigError("presence windows must be non-empty");
  if (!(zeta_max_db > zeta_min_db)) throw ConfigError("zeta_max_db must exceed zeta_min_db");
  if (!(lambda_floor > 0.0)) throw ConfigError("lambda_floor must be positive");
  const auto& m = mcra;
  if (!(m.power_smoothing >= 0.0 && m.power_smoothing < 1.0)) throw ConfigError("MCRA power smoothing must lie in [0, 1)");
  if (!(m.noise_smoothing >= 0.0 && m.noise_smoothing < 1.0)) throw ConfigError("MCRA noise smoothing must lie in [0, 1)");
  if (!(m.window_seconds > 0.0)) throw ConfigError("MCRA window must be positive");
  if (!(m.ratio_threshold > 1.0)) throw ConfigError("MCRA ratio threshold must exceed 1");
}

std::size_t mcra_window_frames(const McraConfig& cfg, const StftConfig& stft) {
  const double frames = cfg.window_seconds * stft.sample_rate / static_cast<double>(stft.hop_size);
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(frames)));
}

McraTracker::McraTracker(std::size_t num_bins, const McraConfig& cfg, std::size_t window_frames)
    : cfg_(cfg),
      window_frames_(std::max<std::size_t>(1, window_frames)),
      lambda_(num_bins, 0.0),
      smoothed_(num_bins, 0.0),
      min_(num_bins, 0.0),
      tmp_(num_bins, 0.0) {}

void McraTracker::set_noise(std::span<const double> lambda) {
  if (lambda.size() != lambda_.size()) throw ConfigError("McraTracker::set_noise: bin count mismatch");
  for (double v : lambda)
    if (!(v >= 0.0) || !std::isfinite(v)) throw ValidationError("noise estimate must be finite and >= 0");
  std::copy(lambda.begin(), lambda.end(), lambda_.begin());
  seeded_ = true;
}

void McraTracker::update(std::span<const double> power) {
  if (power.size() != lambda_.size()) throw ConfigError("McraTracker::update: bin count mismatch");
  const std::size_t bins = lambda_.size();
  if (frames_ == 0) {
    std::copy(power.begin(), power.end(), smoothed_.begin());
    min_ = smoothed_;
    tmp_ = smoothed_;
    if (!seeded_) std::copy(power.begin(), power.end(), lambda_.begin());
    ++frames_;
    return;
  }
  ++frames_;
  const double as = cfg_.power_smoothing;
  const double ad = cfg_.noise_smoothing;
  const bool restart = frames_ % window_frames_ == 0;
  for (std::size_t k = 0; k < bins; ++k) {
    const double s = as * smoothed_[k] + (1.0 - as) * power[k];
    smoothed_[k] = s;
    min_[k] = std::min(min_[k], s);
    tmp_[k] = std::min(tmp_[k], s);
    if (restart) {
      min_[k] = std::min(tmp_[k], s);
      tmp_[k] = s;
    }
    const bool speech = s > cfg_.ratio_threshold * min_[k];
    if (!speech) lambda_[k] = ad * lambda_[k] + (1.0 - ad) * power[k];
  }
}

SourceFilterState::SourceFilterState(int id_, std::size_t num_bins, const McraConfig& mcra,
                                     std::size_t window_frames)
    : id(id_),
      stationary(num_bins, mcra, window_frames),
      lambda_leak(num_bins, 0.0),
      smoothed(num_bins, 0.0),
      prev_gain_h1(num_bins, 0.0),
      prev_gamma(num_bins, 0.0),
      zeta(num_bins, 0.0) {}

void smooth_spectrum(std::vector<double>& z, std::span<const double> power, double alpha_s) {
  if (z.size() != power.size()) throw ConfigError("smooth_spectrum: bin count mismatch");
  for (std::size_t k = 0; k < z.size(); ++k) z[k] = alpha_s * z[k] + (1.0 - alpha_s) * power[k];
}

std::vector<std::vector<double>> leakage_estimate(const std::vector<std::vector<double>>& z, double eta) {
  const std::size_t m_count = z.size();
  if (m_count == 0) return {};
  const std::size_t bins = z.front().size();
  std::vector<std::vector<double>> leak(m_count, std::vector<double>(bins, 0.0));
  for (std::size_t m = 0; m < m_count; ++m) {
    if (z[m].size() != bins) throw ConfigError("leakage_estimate: bin count mismatch");
    for (std::size_t k = 0; k < bins; ++k) {
      double sum = 0.0;
      for (std::size_t i = 0; i < m_count; ++i)
        if (i != m) sum += z[i][k];
      leak[m][k] = eta * sum;
    }
  }
  return leak;
}

std::vector<double> noise_total(std::span<const double> lambda_stat, std::span<const double> lambda_leak) {
  if (lambda_stat.size() != lambda_leak.size()) throw ConfigError("noise_total: bin count mismatch");
  std::vector<double> total(lambda_stat.size());
  for (std::size_t k = 0; k < total.size(); ++k) total[k] = lambda_stat[k] + lambda_leak[k];
  return total;
}

SnrEstimates snr_estimates(std::span<const double> power, std::span<const double> lambda,
                           std::span<const double> prev_gain_h1, std::span<const double> prev_gamma,
                           double alpha_p, double lambda_floor) {
  const std::size_t bins = power.size();
  if (lambda.size() != bins || prev_gain_h1.size() != bins || prev_gamma.size() != bins)
    throw ConfigError("snr_estimates: bin count mismatch");
  const double floor = std::max(lambda_floor, std::numeric_limits<double>::min());
  SnrEstimates out{std::vector<double>(bins), std::vector<double>(bins), std::vector<double>(bins)};
  for (std::size_t k = 0; k < bins; ++k) {
    const double gamma = power[k] / std::max(lambda[k], floor);
    const double g = prev_gain_h1[k];
    const double xi = alpha_p * g * g * prev_gamma[k] + (1.0 - alpha_p) * std::max(gamma - 1.0, 0.0);
    out.gamma[k] = gamma;
    out.xi[k] = xi;
    out.upsilon[k] = gamma * xi / (xi + 1.0);
  }
  return out;
}

double mmse_gain_raw(double gamma, double upsilon, double alpha) {
  if (!(gamma > 0.0) || !(upsilon > 0.0)) return 0.0;
  const double half = 0.5 * alpha;
  const double gamma_const = alpha == 0.5 ? kGammaFiveQuarters : std::tgamma(1.0 + half);
  const double moment = gamma_const * hyp1f1_negative_argument(-half, 1.0, upsilon);
  const double power = alpha == 0.5 ? moment * moment : std::pow(moment, 1.0 / alpha);
  return std::sqrt(upsilon) / gamma * power;
}

double gain_h1(double gamma, double upsilon, double alpha) {
  const double g = mmse_gain_raw(gamma, upsilon, alpha);
  if (!std::isfinite(g)) return 0.0;
  return std::clamp(g, 0.0, 1.0);
}

double presence_measure(double zeta, double zeta_min_db, double zeta_max_db) {
  const double zmin = std::pow(10.0, zeta_min_db / 10.0);
  const double zmax = std::pow(10.0, zeta_max_db / 10.0);
  if (!(zeta > zmin)) return 0.0;
  if (zeta >= zmax) return 1.0;
  return std::log(zeta / zmin) / std::log(zmax / zmin);
}

namespace {

// Centred moving average with the window truncated at the spectrum edges.
std::vector<double> moving_average(std::span<const double> v, std::size_t window) {
  const std::size_t n = v.size();
  std::vector<double> prefix(n + 1, 0.0);
  for (std::size_t k = 0; k < n; ++k) prefix[k + 1] = prefix[k] + v[k];
  const std::size_t half = window / 2;
  std::vector<double> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t lo = k >= half ? k - half : 0;
    const std::size_t hi = std::min(n, k + (window - half));
    out[k] = (prefix[hi] - prefix[lo]) / static_cast<double>(hi - lo);
  }
  return out;
}

}  // namespace

std::vector<double> apriori_absence(std::span<const double> zeta, const PostfilterConfig& cfg) {
  const std::size_t n = zeta.size();
  std::vector<double> q(n, 1.0);
  if (n == 0) return q;
  const auto local = moving_average(zeta, cfg.local_window);
  const auto global = moving_average(zeta, cfg.global_window);
  double frame_mean = 0.0;
  for (double z : zeta) frame_mean += z;
  frame_mean /= static_cast<double>(n);
  const double p_frame = presence_measure(frame_mean, cfg.zeta_min_db, cfg.zeta_max_db);
  for (std::size_t k = 0; k < n; ++k) {
    const double p_local = presence_measure(local[k], cfg.zeta_min_db, cfg.zeta_max_db);
    const double p_global = presence_measure(global[k], cfg.zeta_min_db, cfg.zeta_max_db);
    q[k] = std::min(cfg.q_max, 1.0 - p_local * p_global * p_frame);
  }
  return q;
}

double speech_probability(double q, double xi, double upsilon) {
  if (q >= 1.0) return 0.0;
  if (q <= 0.0) return 1.0;
  const double ratio = q / (1.0 - q) * (1.0 + xi) * std::exp(-upsilon);
  const double p = 1.0 / (1.0 + ratio);
  return std::isfinite(p) ? std::clamp(p, 0.0, 1.0) : 0.0;
}

double combined_gain(double gain_h1, double p, double g_min, double alpha) {
  if (g_min == 0.0 && alpha == 0.5) return p * p * gain_h1;
  const double mixed = p * std::pow(gain_h1, alpha) + (1.0 - p) * std::pow(g_min, alpha);
  return std::pow(mixed, 1.0 / alpha);
}

std::vector<double> init_noise(const std::vector<std::vector<double>>& mic_noise) {
  if (mic_noise.empty()) throw ValidationError("init_noise needs at least one microphone");
  const std::size_t bins = mic_noise.front().size();
  const double n = static_cast<double>(mic_noise.size());
  std::vector<double> lambda(bins, 0.0);
  for (const auto& mic : mic_noise) {
    if (mic.size() != bins) throw ConfigError("init_noise: bin count mismatch");
    for (std::size_t k = 0; k < bins; ++k) {
      if (!(mic[k] >= 0.0)) throw ValidationError("init_noise: negative noise variance");
      lambda[k] += mic[k];
    }
  }
  for (double& v : lambda) v /= n * n;
  return lambda;
}

Postfilter::Postfilter(const PostfilterConfig& cfg, const StftConfig& stft)
    : cfg_(cfg), num_bins_(stft.num_bins()), window_frames_(mcra_window_frames(cfg.mcra, stft)) {
  cfg_.validate();
}

void Postfilter::add_source(int id, std::span<const double> initial_noise) {
  for (const auto& s : sources_)
    if (s.id == id) throw ValidationError("post-filter already has source " + std::to_string(id));
  SourceFilterState state(id, num_bins_, cfg_.mcra, window_frames_);
  if (!initial_noise.empty()) state.stationary.set_noise(initial_noise);
  sources_.push_back(std::move(state));
}

void Postfilter::remove_source(int id) {
  const auto it = std::find_if(sources_.begin(), sources_.end(), [id](const auto& s) { return s.id == id; });
  if (it == sources_.end()) throw ValidationError("post-filter has no source " + std::to_string(id));
  sources_.erase(it);
}

SpectralFrame Postfilter::process(const SpectralFrame& y) {
  const std::size_t m_count = sources_.size();
  if (y.channels() != m_count) throw ConfigError("post-filter: channel count does not match active sources");
  if (y.num_bins() != num_bins_) throw ConfigError("post-filter: bin count mismatch");

  std::vector<std::vector<double>> power(m_count, std::vector<double>(num_bins_));
  for (std::size_t m = 0; m < m_count; ++m)
    for (std::size_t k = 0; k < num_bins_; ++k)
      power[m][k] = std::norm(y.bins(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(k)));

  // All Z tables are brought to frame l before any leakage is formed.
  std::vector<std::vector<double>> z(m_count);
  for (std::size_t m = 0; m < m_count; ++m) {
    smooth_spectrum(sources_[m].smoothed, power[m], cfg_.alpha_s);
    z[m] = sources_[m].smoothed;
  }
  auto leak = cfg_.use_leakage ? leakage_estimate(z, cfg_.eta)
                               : std::vector<std::vector<double>>(m_count, std::vector<double>(num_bins_, 0.0));

  SpectralFrame out;
  out.frame_index = y.frame_index;
  out.bins.resize(y.bins.rows(), y.bins.cols());
  last_gains_.assign(m_count, {});
  last_presence_.assign(m_count, {});
  last_noise_.assign(m_count, {});

  const double beta = cfg_.zeta_smoothing;
  const double alpha = cfg_.alpha_exponent;
  for (std::size_t m = 0; m < m_count; ++m) {
    auto& src = sources_[m];
    src.lambda_leak = std::move(leak[m]);
    src.stationary.update(power[m]);
    auto lambda = noise_total(src.stationary.noise(), src.lambda_leak);

    double frame_power = 0.0;
    for (double p : power[m]) frame_power += p;
    frame_power /= static_cast<double>(num_bins_);
    src.mean_power += (frame_power - src.mean_power) / static_cast<double>(src.frames + 1);
    ++src.frames;

    const auto snr = snr_estimates(power[m], lambda, src.prev_gain_h1, src.prev_gamma, cfg_.alpha_p,
                                   cfg_.lambda_floor * src.mean_power);
    for (std::size_t k = 0; k < num_bins_; ++k) src.zeta[k] = beta * src.zeta[k] + (1.0 - beta) * snr.xi[k];
    const auto q = apriori_absence(src.zeta, cfg_);

    std::vector<double> gains(num_bins_);
    std::vector<double> presence(num_bins_);
    for (std::size_t k = 0; k < num_bins_; ++k) {
      const double gh1 = gain_h1(snr.gamma[k], snr.upsilon[k], alpha);
      const double p = speech_probability(q[k], snr.xi[k], snr.upsilon[k]);
      const double g = combined_gain(gh1, p, cfg_.g_min, alpha);
      gains[k] = g;
      presence[k] = p;
      const auto row = static_cast<Eigen::Index>(m);
      const auto col = static_cast<Eigen::Index>(k);
      out.bins(row, col) = g * y.bins(row, col);
      src.prev_gain_h1[k] = gh1;
      src.prev_gamma[k] = snr.gamma[k];
    }
    last_gains_[m] = std::move(gains);
    last_presence_[m] = std::move(presence);
    last_noise_[m] = std::move(lambda);
  }
  return out;
}

}  // namespace arraysep
