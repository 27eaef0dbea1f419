#include "arraysep/metrics.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "arraysep/error.h"
#include "arraysep/fft.h"

namespace arraysep {

namespace {

void check_lengths(const Signal& ref, const Signal& est) {
  if (ref.size() != est.size()) throw ValidationError("reference and estimate lengths differ");
  if (ref.empty()) throw ValidationError("empty signals");
}

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 2;
  while (p < n) p <<= 1;
  return p;
}

}  // namespace

long best_lag(const Signal& ref, const Signal& est, std::size_t max_lag) {
  check_lengths(ref, est);
  const std::size_t len = ref.size();
  const std::size_t n_fft = next_pow2(2 * len);
  RealFft fft(n_fft);
  std::vector<double> buf(n_fft, 0.0);
  std::vector<Complex> r(fft.num_bins());
  std::vector<Complex> e(fft.num_bins());
  std::copy(ref.begin(), ref.end(), buf.begin());
  fft.forward(buf, r);
  std::fill(buf.begin(), buf.end(), 0.0);
  std::copy(est.begin(), est.end(), buf.begin());
  fft.forward(buf, e);
  for (std::size_t k = 0; k < r.size(); ++k) r[k] = std::conj(r[k]) * e[k];
  fft.inverse(r, buf);

  const long limit = static_cast<long>(std::min(max_lag, len - 1));
  auto at = [&](long lag) {
    return buf[lag >= 0 ? static_cast<std::size_t>(lag) : n_fft - static_cast<std::size_t>(-lag)];
  };
  double peak = -std::numeric_limits<double>::infinity();
  for (long lag = -limit; lag <= limit; ++lag) peak = std::max(peak, at(lag));

  // FFT round-off makes exact ties unequal; anything within this of the
  // peak counts as tied and the smallest |lag| wins (positive first).
  double ref_energy = 0.0, est_energy = 0.0;
  for (std::size_t n = 0; n < len; ++n) {
    ref_energy += ref[n] * ref[n];
    est_energy += est[n] * est[n];
  }
  const double tol = 1e-9 * std::sqrt(ref_energy * est_energy);
  for (long step = 0; step <= limit; ++step) {
    if (at(step) >= peak - tol) return step;
    if (at(-step) >= peak - tol) return -step;
  }
  return 0;
}

Signal shift_signal(const Signal& est, long lag) {
  const long len = static_cast<long>(est.size());
  Signal out(est.size(), 0.0);
  for (long n = 0; n < len; ++n) {
    const long src = n + lag;
    if (src >= 0 && src < len) out[static_cast<std::size_t>(n)] = est[static_cast<std::size_t>(src)];
  }
  return out;
}

Alignment align(const Signal& ref, const Signal& est, std::size_t max_lag) {
  Alignment a;
  a.lag = best_lag(ref, est, max_lag);
  const Signal shifted = shift_signal(est, a.lag);
  double cross = 0.0;
  double energy = 0.0;
  for (std::size_t n = 0; n < ref.size(); ++n) {
    cross += ref[n] * shifted[n];
    energy += shifted[n] * shifted[n];
  }
  a.gain = energy > 0.0 ? cross / energy : 0.0;
  return a;
}

double snr_db(const Signal& ref, const Signal& est, std::size_t max_lag) {
  check_lengths(ref, est);
  double signal = 0.0;
  for (double v : ref) signal += v * v;
  if (!(signal > 0.0)) throw ValidationError("reference signal is identically zero");

  const Alignment a = align(ref, est, max_lag);
  const Signal shifted = shift_signal(est, a.lag);
  double error = 0.0;
  for (std::size_t n = 0; n < ref.size(); ++n) {
    const double d = ref[n] - a.gain * shifted[n];
    error += d * d;
  }
  if (!(error > 0.0)) return kSnrCapDb;
  return std::min(kSnrCapDb, 10.0 * std::log10(signal / error));
}

double lsd_db(const Signal& ref, const Signal& est, const StftConfig& cfg, double epsilon) {
  check_lengths(ref, est);
  if (!(epsilon > 0.0)) throw ValidationError("LSD epsilon must be positive");
  const auto s = analyze_signal(MultiSignal{ref}, cfg);
  const auto e = analyze_signal(MultiSignal{est}, cfg);
  if (s.empty()) throw ValidationError("signals shorter than one hop");
  double total = 0.0;
  for (std::size_t l = 0; l < s.size(); ++l) {
    const auto& sb = s[l].bins;
    const auto& eb = e[l].bins;
    double acc = 0.0;
    for (Eigen::Index k = 0; k < sb.cols(); ++k) {
      const double d = 10.0 * std::log10((std::norm(sb(0, k)) + epsilon) / (std::norm(eb(0, k)) + epsilon));
      acc += d * d;
    }
    total += std::sqrt(acc / static_cast<double>(sb.cols()));
  }
  return total / static_cast<double>(s.size());
}

double default_lsd_epsilon(const Signal& ref, const StftConfig& cfg) {
  const auto frames = analyze_signal(MultiSignal{ref}, cfg);
  double sum = 0.0;
  std::size_t count = 0;
  for (const auto& f : frames) {
    sum += f.bins.cwiseAbs2().sum();
    count += f.num_bins();
  }
  const double mean = count ? sum / static_cast<double>(count) : 0.0;
  return mean > 0.0 ? 1e-4 * mean : std::numeric_limits<double>::min();
}

}  // namespace arraysep
