#include <doctest.h>

#include <cmath>
#include <numbers>

#include "arraysep/error.h"
#include "arraysep/stft.h"
#include "oracles.h"

using namespace arraysep;

namespace {

StftConfig small_config(std::size_t n, std::size_t hop, WindowType w = WindowType::kSqrtHann) {
  StftConfig cfg;
  cfg.frame_size = n;
  cfg.hop_size = hop;
  cfg.window = w;
  return cfg;
}

// Input sample index at which frame `l` starts (the stream history begins
// with frame_size - hop_size zeros).
long frame_start(const StftConfig& cfg, std::size_t l) {
  return static_cast<long>((l + 1) * cfg.hop_size) - static_cast<long>(cfg.frame_size);
}

}  // namespace

TEST_CASE("zero input gives zero spectra and zero output") {
  const StftConfig cfg;
  const auto frames = analyze_signal({Signal(4096, 0.0)}, cfg);
  REQUIRE(frames.size() == 4096 / cfg.hop_size);
  for (const auto& f : frames) CHECK(f.bins.cwiseAbs().maxCoeff() == 0.0);
  const auto out = synthesize_frames(frames, cfg, 1);
  for (double v : out[0]) CHECK(v == 0.0);
}

TEST_CASE("bin-centred sinusoid under a rectangular window matches the direct DFT") {
  const auto cfg = small_config(64, 64, WindowType::kRectangular);
  const std::size_t bin = 5;
  Signal x(64);
  for (std::size_t n = 0; n < x.size(); ++n) x[n] = std::cos(2.0 * std::numbers::pi * bin * n / 64.0);
  const auto frames = analyze_signal({x}, cfg);
  REQUIRE(frames.size() == 1);
  const auto ref = oracle::dft(x);
  for (std::size_t k = 0; k < ref.size(); ++k) CHECK(std::abs(frames[0].bins(0, k) - ref[k]) < 1e-10);
  CHECK(std::abs(frames[0].bins(0, bin)) == doctest::Approx(32.0).epsilon(1e-12));
  double others = 0.0;
  for (std::size_t k = 0; k < ref.size(); ++k)
    if (k != bin) others += std::norm(frames[0].bins(0, k));
  CHECK(others < 1e-20);
}

TEST_CASE("impulse at frame start gives the window's transform") {
  const auto cfg = small_config(128, 64);
  const auto win = make_window_pair(cfg).analysis;
  // Frame 1 starts at input sample 0; put the impulse a few samples in so the
  // window value is not zero.
  const std::size_t at = 3;
  Signal x(256, 0.0);
  x[at] = 1.0;
  const auto frames = analyze_signal({x}, cfg);
  REQUIRE(frame_start(cfg, 1) == 0);
  std::vector<double> windowed(128, 0.0);
  windowed[at] = win[at];
  const auto ref = oracle::dft(windowed);
  for (std::size_t k = 0; k < ref.size(); ++k) {
    CHECK(std::abs(frames[1].bins(0, k) - ref[k]) < 1e-12);
    CHECK(std::abs(frames[1].bins(0, k)) == doctest::Approx(win[at]).epsilon(1e-12));
  }
}

TEST_CASE("arbitrary frames match the brute-force DFT of the windowed input") {
  const auto cfg = small_config(256, 128);
  const auto win = make_window_pair(cfg).analysis;
  const auto x = oracle::white_noise(2048, 11);
  const auto frames = analyze_signal({x}, cfg);
  for (std::size_t l : {0u, 1u, 7u, 15u}) {
    std::vector<double> seg(256, 0.0);
    const long start = frame_start(cfg, l);
    for (long t = 0; t < 256; ++t)
      if (start + t >= 0) seg[t] = win[t] * x[start + t];
    const auto ref = oracle::dft(seg);
    double err = 0.0, norm = 0.0;
    for (std::size_t k = 0; k < ref.size(); ++k) {
      err += std::norm(frames[l].bins(0, k) - ref[k]);
      norm += std::norm(ref[k]);
    }
    CHECK(std::sqrt(err / norm) < 1e-12);
  }
}

TEST_CASE("white noise round trip is the delayed input") {
  const StftConfig cfg;
  const auto x = oracle::white_noise(16000 * 2, 3);
  const auto y = synthesize_frames(analyze_signal({x}, cfg), cfg, 1)[0];
  // Output covers whole hops of input.
  REQUIRE(y.size() == x.size() / cfg.hop_size * cfg.hop_size);
  const std::size_t d = cfg.latency();
  double err = 0.0, ref = 0.0;
  for (std::size_t n = d; n < y.size(); ++n) {
    err += (y[n] - x[n - d]) * (y[n] - x[n - d]);
    ref += x[n - d] * x[n - d];
  }
  CHECK(err / ref < 1e-20);  // well below -80 dB and the 1e-10 relative target
  for (std::size_t n = 0; n < d; ++n) CHECK(std::abs(y[n]) < 1e-12);
}

TEST_CASE("synthesising a DC-only frame reproduces the synthesis window") {
  // A frame whose only content is DC = frame_size inverse-transforms to a
  // frame of ones, so the overlap-add output is the synthesis window itself.
  const auto cfg = small_config(64, 32);
  const auto win = make_window_pair(cfg).synthesis;
  SpectralFrame f;
  f.bins = Eigen::MatrixXcd::Zero(1, cfg.num_bins());
  f.bins(0, 0) = 64.0;
  SpectralFrame zero = f;
  zero.bins.setZero();
  StftSynthesizer synth(cfg, 1);
  auto first = synth.synthesize(f)[0];
  const auto second = synth.synthesize(zero)[0];
  first.insert(first.end(), second.begin(), second.end());
  REQUIRE(first.size() == 64);
  for (std::size_t n = 0; n < 64; ++n) {
    const double closed_form = std::sqrt(0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * n / 64.0));
    CHECK(first[n] == doctest::Approx(win[n]).epsilon(1e-12));
    // Periodic sqrt-Hann scaled by 1 / sum(w^2 over hops) = 1 at 50% overlap.
    CHECK(first[n] == doctest::Approx(closed_form).epsilon(1e-12));
  }
}

TEST_CASE("Parseval: windowed frame energy equals spectral energy") {
  const auto cfg = small_config(512, 256);
  const auto win = make_window_pair(cfg).analysis;
  const auto x = oracle::white_noise(4096, 5);
  const auto frames = analyze_signal({x}, cfg);
  for (std::size_t l = 1; l < frames.size(); ++l) {
    const long start = frame_start(cfg, l);
    double time_energy = 0.0;
    for (long t = 0; t < 512; ++t) time_energy += std::pow(win[t] * x[start + t], 2);
    // One-sided spectrum: DC and Nyquist count once, the others twice.
    double spec_energy = 0.0;
    const auto& b = frames[l].bins;
    for (Eigen::Index k = 0; k < b.cols(); ++k)
      spec_energy += (k == 0 || k == b.cols() - 1 ? 1.0 : 2.0) * std::norm(b(0, k));
    spec_energy /= 512.0;
    CHECK(std::abs(spec_energy - time_energy) <= 1e-9 * time_energy);
  }
}

TEST_CASE("frames do not depend on how the input stream is blocked") {
  const StftConfig cfg;
  const auto x = oracle::white_noise(8192, 9);
  auto run = [&](std::size_t block) {
    StftAnalyzer a(cfg, 1);
    std::vector<SpectralFrame> out;
    for (std::size_t i = 0; i < x.size(); i += block) {
      const std::size_t n = std::min(block, x.size() - i);
      auto f = a.analyze({Signal(x.begin() + i, x.begin() + i + n)});
      out.insert(out.end(), f.begin(), f.end());
    }
    return out;
  };
  const auto ones = run(1);
  const auto big = run(4096);
  const auto odd = run(333);
  REQUIRE(ones.size() == big.size());
  REQUIRE(odd.size() == big.size());
  for (std::size_t l = 0; l < big.size(); ++l) {
    CHECK(ones[l].frame_index == big[l].frame_index);
    CHECK(ones[l].bins == big[l].bins);
    CHECK(odd[l].bins == big[l].bins);
  }
}

TEST_CASE("multichannel frames carry each channel independently") {
  const StftConfig cfg;
  const auto a = oracle::white_noise(4096, 1);
  const auto b = oracle::white_noise(4096, 2);
  const auto both = analyze_signal({a, b}, cfg);
  const auto only_b = analyze_signal({b}, cfg);
  for (std::size_t l = 0; l < both.size(); ++l) CHECK(both[l].bins.row(1) == only_b[l].bins.row(0));
}

TEST_CASE("invalid configurations and inputs are rejected") {
  CHECK_THROWS_AS(small_config(1000, 500).validate(), ConfigError);
  CHECK_THROWS_AS(small_config(1024, 300).validate(), ConfigError);
  CHECK_THROWS_AS(small_config(1024, 1024).validate(), ConfigError);  // sqrt-Hann needs overlap
  CHECK_NOTHROW(small_config(1024, 1024, WindowType::kRectangular).validate());
  CHECK_NOTHROW(small_config(1024, 256).validate());
  StftAnalyzer a(StftConfig{}, 2);
  CHECK_THROWS_AS(a.analyze({Signal(10)}), ConfigError);
  CHECK_THROWS_AS(a.analyze({Signal(10), Signal(11)}), ConfigError);
  StftSynthesizer s(StftConfig{}, 1);
  SpectralFrame bad;
  bad.bins = Eigen::MatrixXcd::Zero(1, 10);
  CHECK_THROWS_AS(s.synthesize(bad), ConfigError);
}
