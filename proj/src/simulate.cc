#include "arraysep/simulate.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "arraysep/error.h"
#include "arraysep/fft.h"

namespace arraysep {

namespace {

constexpr double kPi = std::numbers::pi;

double kaiser(double t, double half_width, double beta) {
  const double r = t / half_width;
  if (std::abs(r) > 1.0) return 0.0;
  return std::cyl_bessel_i(0.0, beta * std::sqrt(1.0 - r * r)) / std::cyl_bessel_i(0.0, beta);
}

double sinc(double x) {
  if (x == 0.0) return 1.0;
  return std::sin(kPi * x) / (kPi * x);
}

double mean_square(const Signal& s) {
  if (s.empty()) return 0.0;
  double acc = 0.0;
  for (double v : s) acc += v * v;
  return acc / static_cast<double>(s.size());
}

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 2;
  while (p < n) p <<= 1;
  return p;
}

// Linear convolution truncated to x.size() samples.
Signal convolve(const Signal& x, const Signal& h) {
  const std::size_t n_fft = next_pow2(x.size() + h.size());
  RealFft fft(n_fft);
  std::vector<double> buf(n_fft, 0.0);
  std::vector<Complex> xs(fft.num_bins());
  std::vector<Complex> hs(fft.num_bins());
  std::copy(x.begin(), x.end(), buf.begin());
  fft.forward(buf, xs);
  std::fill(buf.begin(), buf.end(), 0.0);
  std::copy(h.begin(), h.end(), buf.begin());
  fft.forward(buf, hs);
  for (std::size_t k = 0; k < xs.size(); ++k) xs[k] *= hs[k];
  fft.inverse(xs, buf);
  return Signal(buf.begin(), buf.begin() + static_cast<std::ptrdiff_t>(x.size()));
}

// RBJ constant-peak bandpass, applied in place.
void bandpass(Signal& s, double centre_hz, double q, double fs) {
  const double w0 = 2.0 * kPi * centre_hz / fs;
  const double alpha = std::sin(w0) / (2.0 * q);
  const double a0 = 1.0 + alpha;
  const double b0 = alpha / a0, b2 = -alpha / a0;
  const double a1 = -2.0 * std::cos(w0) / a0, a2 = (1.0 - alpha) / a0;
  double x1 = 0, x2 = 0, y1 = 0, y2 = 0;
  for (double& v : s) {
    const double y = b0 * v + b2 * x2 - a1 * y1 - a2 * y2;
    x2 = x1;
    x1 = v;
    y2 = y1;
    y1 = y;
    v = y;
  }
}

}  // namespace

Signal fractional_delay(const Signal& signal, double delay) {
  const long len = static_cast<long>(signal.size());
  if (!std::isfinite(delay) || std::abs(delay) >= static_cast<double>(std::max<long>(len, 1)))
    throw ValidationError("fractional_delay: |delay| must be smaller than the signal length");
  Signal out(signal.size(), 0.0);
  const double whole = std::floor(delay);
  const long shift = static_cast<long>(whole);
  const double frac = delay - whole;

  if (frac == 0.0) {
    for (long n = 0; n < len; ++n) {
      const long src = n - shift;
      if (src >= 0 && src < len) out[static_cast<std::size_t>(n)] = signal[static_cast<std::size_t>(src)];
    }
    return out;
  }

  // out[n] = sum_j h[j] x[n - shift - j], j in [-half + 1, half]
  const long half = static_cast<long>(kFractionalDelayTaps / 2);
  std::vector<double> taps;
  taps.reserve(kFractionalDelayTaps);
  for (long j = -half + 1; j <= half; ++j) {
    const double t = static_cast<double>(j) - frac;
    taps.push_back(sinc(t) * kaiser(t, static_cast<double>(half), kFractionalDelayKaiserBeta));
  }
  for (long n = 0; n < len; ++n) {
    double acc = 0.0;
    for (long j = -half + 1; j <= half; ++j) {
      const long src = n - shift - j;
      if (src >= 0 && src < len) acc += taps[static_cast<std::size_t>(j + half - 1)] * signal[static_cast<std::size_t>(src)];
    }
    out[static_cast<std::size_t>(n)] = acc;
  }
  return out;
}

std::size_t Scenario::num_samples() const {
  return static_cast<std::size_t>(std::llround(duration_seconds * sample_rate));
}

ArrayScene Scenario::scene() const {
  ArrayScene s;
  s.mic_positions = mic_positions;
  s.speed_of_sound = speed_of_sound;
  s.sample_rate = sample_rate;
  for (const auto& src : sources) s.source_directions.push_back(src.direction);
  return s;
}

void Scenario::validate() const {
  if (sources.empty()) throw ValidationError("scenario has no sources");
  scene().validate();
  if (!(duration_seconds > 0.0)) throw ValidationError("scenario duration must be positive");
  if (!(rt60_seconds >= 0.0)) throw ValidationError("rt60 must be >= 0");
  const std::size_t n = num_samples();
  for (std::size_t i = 0; i < sources.size(); ++i) {
    if (sources[i].signal.size() < n) throw ValidationError("scenario duration exceeds source material");
    for (std::size_t j = 0; j < i; ++j)
      if (sources[j].id == sources[i].id) throw ValidationError("duplicate source id in scenario");
    if (!(sources[i].stop_seconds > sources[i].start_seconds))
      throw ValidationError("source stop time must follow its start time");
  }
  if (noise.type == NoiseType::kFile) {
    if (noise.recording.empty() || noise.recording.front().empty())
      throw ValidationError("noise recording is empty");
    if (noise.recording.size() != 1 && noise.recording.size() != mic_positions.size())
      throw ValidationError("noise recording must have one channel or one per microphone");
  }
}

Mixture mix(const Scenario& scenario) {
  scenario.validate();
  const std::size_t n = scenario.num_samples();
  const std::size_t n_mics = scenario.mic_positions.size();
  const double fs = scenario.sample_rate;
  const Eigen::MatrixXd delay = delays(scenario.scene());

  Mixture out;
  out.references.reserve(scenario.sources.size());
  for (const auto& src : scenario.sources) {
    Signal ref(n, 0.0);
    const double start = std::max(0.0, src.start_seconds * fs);
    const double stop = std::min(static_cast<double>(n), src.stop_seconds * fs);
    for (std::size_t t = 0; t < n; ++t) {
      const double tt = static_cast<double>(t);
      if (tt >= start && tt < stop) ref[t] = src.gain * src.signal[t];
    }
    out.references.push_back(std::move(ref));
  }

  std::mt19937_64 rng(scenario.seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  out.images.assign(n_mics, Signal(n, 0.0));
  for (std::size_t i = 0; i < n_mics; ++i) {
    for (std::size_t j = 0; j < scenario.sources.size(); ++j) {
      Signal direct = fractional_delay(out.references[j], delay(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
      if (scenario.rt60_seconds > 0.0) {
        const auto tail_len = static_cast<std::size_t>(scenario.rt60_seconds * fs);
        const auto pre = static_cast<std::size_t>(0.002 * fs);
        Signal h(pre + tail_len, 0.0);
        double energy = 0.0;
        for (std::size_t t = 0; t < tail_len; ++t) {
          const double decay = std::exp(-3.0 * std::log(10.0) * static_cast<double>(t) / static_cast<double>(tail_len));
          h[pre + t] = normal(rng) * decay;
          energy += h[pre + t] * h[pre + t];
        }
        // Tail carries a quarter of the direct-path energy.
        const double scale = energy > 0.0 ? std::sqrt(0.25 / energy) : 0.0;
        for (double& v : h) v *= scale;
        const Signal tail = convolve(direct, h);
        for (std::size_t t = 0; t < n; ++t) direct[t] += tail[t];
      }
      auto& img = out.images[i];
      for (std::size_t t = 0; t < n; ++t) img[t] += direct[t];
    }
  }

  out.noise.assign(n_mics, Signal(n, 0.0));
  if (scenario.noise.type != NoiseType::kNone) {
    double mean_image_power = 0.0;
    for (const auto& img : out.images) mean_image_power += mean_square(img);
    mean_image_power /= static_cast<double>(n_mics);

    for (std::size_t i = 0; i < n_mics; ++i) {
      Signal& noise = out.noise[i];
      if (scenario.noise.type == NoiseType::kWhite) {
        for (double& v : noise) v = normal(rng);
      } else {
        const auto& rec = scenario.noise.recording;
        const Signal& ch = rec.size() == 1 ? rec.front() : rec[i];
        std::size_t offset = 0;
        if (rec.size() == 1) offset = static_cast<std::size_t>(rng() % ch.size());
        for (std::size_t t = 0; t < n; ++t) noise[t] = ch[(offset + t) % ch.size()];
      }
      double image_power = mean_square(out.images[i]);
      if (!(image_power > 0.0)) image_power = mean_image_power;
      const double raw = mean_square(noise);
      const double target = image_power / std::pow(10.0, scenario.noise.level_db / 10.0);
      const double scale = raw > 0.0 && target > 0.0 ? std::sqrt(target / raw) : 0.0;
      for (double& v : noise) v *= scale;
    }
  }

  out.mics.resize(n_mics);
  for (std::size_t i = 0; i < n_mics; ++i) {
    out.mics[i] = out.images[i];
    for (std::size_t t = 0; t < n; ++t) out.mics[i][t] += out.noise[i][t];
  }
  return out;
}

Signal speech_surrogate(const SurrogateVoice& voice, std::size_t samples, double sample_rate,
                        std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * uni(rng); };

  Signal out(samples, 0.0);
  const double fs = sample_rate;
  const double nyquist_guard = 0.45 * fs;
  double phase = 0.0;
  std::size_t pos = static_cast<std::size_t>(uniform(0.0, 0.2) * fs);

  while (pos < samples) {
    if (uni(rng) < voice.pause_probability) {
      pos += static_cast<std::size_t>(uniform(0.25, 0.7) * fs);
      continue;
    }
    const auto len = static_cast<std::size_t>(uniform(0.6, 1.2) / voice.syllable_rate_hz * fs);
    const std::size_t end = std::min(samples, pos + len);
    const auto ramp = static_cast<std::size_t>(0.03 * fs);

    const double formants[3] = {uniform(300.0, 850.0), uniform(900.0, 2400.0), uniform(2400.0, 3400.0)};
    const double bandwidths[3] = {90.0, 130.0, 200.0};
    const double weights[3] = {1.0, 0.6, 0.3};
    const double f0a = voice.f0_hz * (1.0 + voice.f0_jitter * uniform(-1.0, 1.0));
    const double f0b = voice.f0_hz * (1.0 + voice.f0_jitter * uniform(-1.0, 1.0));
    const double f0_mid = 0.5 * (f0a + f0b);
    const auto harmonics = static_cast<std::size_t>(nyquist_guard / std::max(f0a, f0b));
    std::vector<double> amp(harmonics + 1, 0.0);
    for (std::size_t h = 1; h <= harmonics; ++h) {
      const double f = static_cast<double>(h) * f0_mid;
      double env = 0.02;
      for (int i = 0; i < 3; ++i) {
        const double d = (f - formants[i]) / bandwidths[i];
        env += weights[i] * std::exp(-0.5 * d * d);
      }
      amp[h] = env / std::sqrt(static_cast<double>(h));
    }

    // Optional fricative onset.
    std::size_t voiced_start = pos;
    if (uni(rng) < 0.3) {
      const auto fric = std::min(end - pos, static_cast<std::size_t>(uniform(0.04, 0.12) * fs));
      Signal burst(fric);
      for (double& v : burst) v = normal(rng);
      bandpass(burst, uniform(3000.0, 0.4 * fs), 1.5, fs);
      for (std::size_t t = 0; t < fric; ++t) {
        const double w = std::sin(kPi * static_cast<double>(t) / static_cast<double>(fric));
        out[pos + t] += 0.6 * w * burst[t];
      }
      voiced_start = pos + fric / 2;
    }

    const std::size_t vlen = end - voiced_start;
    for (std::size_t t = voiced_start; t < end; ++t) {
      const double u = vlen > 1 ? static_cast<double>(t - voiced_start) / static_cast<double>(vlen - 1) : 0.0;
      const double f0 = f0a + (f0b - f0a) * u;
      phase += 2.0 * kPi * f0 / fs;
      if (phase > 2.0 * kPi) phase -= 2.0 * kPi;
      double v = 0.0;
      for (std::size_t h = 1; h <= harmonics; ++h) v += amp[h] * std::sin(static_cast<double>(h) * phase);
      double env = 1.0;
      const std::size_t rel = t - voiced_start;
      if (rel < ramp) env = 0.5 - 0.5 * std::cos(kPi * static_cast<double>(rel) / static_cast<double>(ramp));
      if (end - t < ramp) env *= 0.5 - 0.5 * std::cos(kPi * static_cast<double>(end - t) / static_cast<double>(ramp));
      out[t] += env * v;
    }
    pos = end + static_cast<std::size_t>(uniform(0.02, 0.12) * fs);
  }

  const double rms = std::sqrt(mean_square(out));
  if (rms > 0.0)
    for (double& v : out) v *= voice.rms / rms;
  return out;
}

}  // namespace arraysep
