#include <algorithm>
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "arraysep/error.h"
#include "arraysep/metrics.h"
#include "oracles.h"

using namespace arraysep;

namespace {

Signal sine(std::size_t n, double freq, double fs = 16000.0) {
  Signal s(n);
  for (std::size_t t = 0; t < n; ++t) s[t] = std::sin(2.0 * std::numbers::pi * freq * t / fs);
  return s;
}

Signal add(const Signal& a, const Signal& b, double scale = 1.0) {
  Signal out(a.size());
  for (std::size_t t = 0; t < a.size(); ++t) out[t] = a[t] + scale * b[t];
  return out;
}

double energy(const Signal& s) {
  double e = 0.0;
  for (double v : s) e += v * v;
  return e;
}

}  // namespace

TEST_CASE("SNR reference values") {
  const Signal s = sine(16000, 440.0);
  CHECK(snr_db(s, s) == kSnrCapDb);
  CHECK(snr_db(s, Signal(s.size(), 0.0)) == doctest::Approx(0.0).epsilon(1e-12));

  Signal noise = oracle::white_noise(s.size(), 1);
  const double scale = std::sqrt(0.01 * energy(s) / energy(noise));
  const double got = snr_db(s, add(s, noise, scale));
  CHECK(got == doctest::Approx(20.0).epsilon(0.005));
}

TEST_CASE("SNR is invariant to a global delay and gain") {
  Signal s = oracle::white_noise(8000, 2);
  // Silence the tail so that the delayed copy loses nothing off the end.
  std::fill(s.end() - 37, s.end(), 0.0);
  const Signal delayed = shift_signal(s, -37);  // delayed[n] = s[n - 37]
  Signal scaled(delayed.size());
  for (std::size_t t = 0; t < s.size(); ++t) scaled[t] = 0.3 * delayed[t];
  CHECK(best_lag(s, scaled, 100) == 37);
  CHECK(snr_db(s, scaled, 100) > 90.0);
  const auto al = align(s, scaled, 100);
  CHECK(al.lag == 37);
  CHECK(al.gain == doctest::Approx(1.0 / 0.3).epsilon(1e-2));
}

TEST_CASE("SNR falls as independent noise grows") {
  const Signal s = oracle::white_noise(16000, 3);
  const Signal n = oracle::white_noise(16000, 4);
  double prev = kSnrCapDb + 1.0;
  for (double level : {0.01, 0.03, 0.1, 0.3, 1.0, 3.0}) {
    const double v = snr_db(s, add(s, n, level));
    CHECK(v < prev);
    CHECK(v >= 0.0);
    prev = v;
  }
}

TEST_CASE("best lag prefers the smallest shift on ties") {
  Signal pulse(64, 0.0);
  pulse[10] = 1.0;
  CHECK(best_lag(pulse, pulse, 5) == 0);
  Signal periodic(64, 0.0);
  for (std::size_t t = 0; t < 64; t += 4) periodic[t] = 1.0;
  // Lags -1 and 3 overlap the same number of pulses.
  CHECK(best_lag(periodic, shift_signal(periodic, 1), 8) == -1);
}

TEST_CASE("SNR input checks") {
  CHECK_THROWS_AS(snr_db(Signal(10, 1.0), Signal(11, 1.0)), ValidationError);
  CHECK_THROWS_AS(snr_db(Signal(10, 0.0), Signal(10, 1.0)), ValidationError);
}

TEST_CASE("LSD reference values and properties") {
  const StftConfig cfg;
  const Signal s = oracle::white_noise(16000, 5);
  const double eps = default_lsd_epsilon(s, cfg);
  CHECK(lsd_db(s, s, cfg, eps) == 0.0);

  Signal louder = s;
  for (double& v : louder) v *= std::sqrt(10.0);
  CHECK(lsd_db(s, louder, cfg, 1e-30) == doctest::Approx(10.0).epsilon(1e-9));

  const Signal e = oracle::white_noise(16000, 6);
  CHECK(lsd_db(s, e, cfg, eps) == doctest::Approx(lsd_db(e, s, cfg, eps)).epsilon(1e-14));
  CHECK(lsd_db(s, e, cfg, eps) > 0.0);

  double prev = 1e9;
  for (double f : {1e-6, 1e-3, 1e-1, 1.0, 10.0, 1e3}) {
    const double v = lsd_db(s, e, cfg, f * eps);
    CHECK(v <= prev);
    prev = v;
  }
  CHECK_THROWS_AS(lsd_db(s, e, cfg, 0.0), ValidationError);
}

TEST_CASE("LSD matches a straight-line implementation") {
  StftConfig cfg;
  cfg.frame_size = 256;
  cfg.hop_size = 128;
  for (unsigned seed = 0; seed < 5; ++seed) {
    const Signal r = oracle::white_noise(2000 + 97 * seed, 10 + seed);
    const Signal e = add(oracle::white_noise(r.size(), 20 + seed), r, 0.5 * seed);
    const double eps = default_lsd_epsilon(r, cfg);
    const double want = oracle::lsd(r, e, cfg.frame_size, cfg.hop_size, eps, cfg.latency());
    CHECK(std::abs(lsd_db(r, e, cfg, eps) - want) < 1e-9);
  }
}

TEST_CASE("default epsilon is 1e-4 of the mean per-bin reference power") {
  StftConfig cfg;
  cfg.frame_size = 64;
  cfg.hop_size = 32;
  const Signal r = oracle::white_noise(640, 7);
  std::vector<double> padded(cfg.latency(), 0.0);
  padded.insert(padded.end(), r.begin(), r.end());
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t start = 0; start + 64 <= padded.size(); start += 32) {
    std::vector<double> f(64);
    for (std::size_t t = 0; t < 64; ++t)
      f[t] = std::sqrt(0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * t / 64.0)) * padded[start + t];
    for (const auto& v : oracle::dft(f)) {
      sum += std::norm(v);
      ++count;
    }
  }
  CHECK(default_lsd_epsilon(r, cfg) == doctest::Approx(1e-4 * sum / count).epsilon(1e-12));
}
