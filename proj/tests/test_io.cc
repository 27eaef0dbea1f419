#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <unistd.h>

#include "arraysep/config.h"
#include "arraysep/error.h"
#include "arraysep/spectrogram.h"
#include "arraysep/wav.h"
#include "oracles.h"

using namespace arraysep;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("arraysep_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter()++));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
  static int& counter() {
    static int c = 0;
    return c;
  }
};

void write_text(const std::string& path, const std::string& text) {
  std::ofstream(path) << text;
}

}  // namespace

TEST_CASE("WAV round trips") {
  TempDir tmp;
  const MultiSignal ch{oracle::white_noise(1000, 1, 0.2), oracle::white_noise(1000, 2, 0.2), Signal(1000, -1.0)};

  write_wav(tmp.file("f.wav"), {44100.0, ch}, WavFormat::kFloat32);
  const auto f = read_wav(tmp.file("f.wav"));
  CHECK(f.sample_rate == 44100.0);
  REQUIRE(f.channels.size() == 3);
  for (std::size_t c = 0; c < 3; ++c)
    for (std::size_t t = 0; t < 1000; ++t) CHECK(f.channels[c][t] == static_cast<float>(ch[c][t]));

  write_wav(tmp.file("p.wav"), {16000.0, ch}, WavFormat::kPcm16);
  const auto p = read_wav(tmp.file("p.wav"));
  CHECK(p.sample_rate == 16000.0);
  for (std::size_t c = 0; c < 3; ++c)
    for (std::size_t t = 0; t < 1000; ++t) CHECK(std::abs(p.channels[c][t] - ch[c][t]) <= 0.5 / 32768.0 + 1e-12);
  CHECK(p.channels[2][0] == -1.0);

  // Out-of-range samples saturate rather than wrap.
  write_wav(tmp.file("clip.wav"), {16000.0, {Signal{2.0, -2.0}}}, WavFormat::kPcm16);
  const auto clip = read_wav(tmp.file("clip.wav"));
  CHECK(clip.channels[0][0] == 32767.0 / 32768.0);
  CHECK(clip.channels[0][1] == -1.0);
}

TEST_CASE("WAV layout and errors") {
  TempDir tmp;
  write_wav(tmp.file("a.wav"), {16000.0, {Signal{0.5, -0.5}}}, WavFormat::kPcm16);
  std::ifstream in(tmp.file("a.wav"), std::ios::binary);
  std::vector<char> bytes((std::istreambuf_iterator<char>(in)), {});
  REQUIRE(bytes.size() == 44 + 4);
  CHECK(std::string(bytes.begin(), bytes.begin() + 4) == "RIFF");
  CHECK(std::string(bytes.begin() + 8, bytes.begin() + 12) == "WAVE");

  CHECK_THROWS_AS(read_wav(tmp.file("missing.wav")), IoError);
  write_text(tmp.file("junk.wav"), "definitely not audio");
  CHECK_THROWS_AS(read_wav(tmp.file("junk.wav")), IoError);
  CHECK_THROWS_AS(write_wav((tmp.path / "no" / "dir.wav").string(), {16000.0, {Signal{0.0}}}), IoError);
}

TEST_CASE("spectrogram of silence sits at the floor") {
  const auto s = compute_spectrogram(Signal(4096, 0.0), StftConfig{});
  REQUIRE(!s.db.empty());
  for (const auto& row : s.db)
    for (double v : row) CHECK(v == kSpectrogramFloorDb);
}

TEST_CASE("spectrogram of a bin-centred sinusoid peaks in that bin") {
  const StftConfig cfg;
  const std::size_t bin = 64;  // 1 kHz
  Signal x(8192);
  for (std::size_t t = 0; t < x.size(); ++t) x[t] = std::sin(2.0 * std::numbers::pi * bin * t / 1024.0);
  const auto s = compute_spectrogram(x, cfg);
  const auto win = make_window_pair(cfg).analysis;
  for (std::size_t l = 2; l < s.db.size(); ++l) {
    const auto& row = s.db[l];
    const auto peak = std::max_element(row.begin(), row.end()) - row.begin();
    CHECK(peak == static_cast<long>(bin));
    // Compare the peak with the direct DFT of the windowed frame.
    const long start = static_cast<long>((l + 1) * cfg.hop_size) - 1024;
    std::vector<double> frame(1024);
    for (long t = 0; t < 1024; ++t) frame[t] = win[t] * x[start + t];
    const double want = 10.0 * std::log10(std::norm(oracle::dft(frame)[bin]));
    CHECK(row[bin] == doctest::Approx(want).epsilon(1e-9));
  }
}

TEST_CASE("spectrogram files round trip exactly") {
  TempDir tmp;
  const auto s = compute_spectrogram(oracle::white_noise(5000, 3), StftConfig{});
  write_spectrogram(tmp.file("s.txt"), s);
  const auto r = read_spectrogram(tmp.file("s.txt"));
  CHECK(r.db == s.db);
  CHECK(r.frame_size == s.frame_size);
  CHECK(r.hop_size == s.hop_size);
  CHECK(r.sample_rate == s.sample_rate);

  std::ifstream in(tmp.file("s.txt"));
  std::string first;
  std::getline(in, first);
  CHECK(first == "# arraysep spectrogram v1");

  write_text(tmp.file("bad.txt"), "# arraysep spectrogram v1\n# frames=2 bins=3\n1 2 3\n");
  CHECK_THROWS(read_spectrogram(tmp.file("bad.txt")));
  CHECK_THROWS_AS(read_spectrogram(tmp.file("none.txt")), IoError);
}

TEST_CASE("event lines") {
  auto e = parse_event("at 3.0s add source 2");
  CHECK(e.time_seconds == 3.0);
  CHECK(e.kind == EventKind::kAdd);
  CHECK(e.id == 2);
  e = parse_event("  at 6s remove source 10 ");
  CHECK(e.kind == EventKind::kRemove);
  CHECK(e.id == 10);
  CHECK(e.time_seconds == 6.0);
  CHECK_THROWS_AS(parse_event("at 3.0 add source 2"), ConfigError);
  CHECK_THROWS_AS(parse_event("at 3.0s move source 2"), ConfigError);
}

TEST_CASE("run configuration parsing") {
  const std::string text = R"(
# comment
[scene]
array = circle
mic_count = 4
array_radius = 0.1

[run]
duration = 1.5
seed = 9
variant = gss

[noise]
type = white
level_db = 3   # trailing comment

[gss]
mu = 0.002

[postfilter]
eta = 0.2
q_max = 0.7

[source]
id = 4
azimuth = 90

[source]
id = 5
direction = 0 0 2

[events]
at 0.5s add source 5
at 1.0s remove source 4
)";
  const auto rc = parse_run_config(text, "");
  const auto& sc = rc.scenario;
  CHECK(sc.mic_positions.size() == 4);
  CHECK(sc.num_samples() == 24000);
  CHECK(sc.seed == 9);
  CHECK(rc.variant == Variant::kGss);
  CHECK(sc.noise.type == NoiseType::kWhite);
  CHECK(sc.noise.level_db == 3.0);
  CHECK(rc.pipeline.mu == 0.002);
  CHECK(rc.pipeline.postfilter.eta == 0.2);
  CHECK(rc.pipeline.postfilter.q_max == 0.7);
  REQUIRE(sc.sources.size() == 2);
  CHECK((sc.sources[0].direction - Eigen::Vector3d::UnitY()).norm() < 1e-12);
  CHECK((sc.sources[1].direction - Eigen::Vector3d::UnitZ()).norm() < 1e-12);
  CHECK(sc.sources[1].start_seconds == 0.5);
  CHECK(sc.sources[0].stop_seconds == 1.0);
  CHECK(sc.sources[0].signal.size() == 24000);
  CHECK(rc.events.size() == 2);
}

TEST_CASE("explicit microphone layout and file sources") {
  TempDir tmp;
  write_wav(tmp.file("voice.wav"), {16000.0, {oracle::white_noise(16000, 4, 0.1)}});
  write_text(tmp.file("run.ini"), R"([scene]
array = explicit
mic = 0 0 0
mic = 0.1 0 0
mic = 0 0.1 0
[run]
duration = 0.5
[source]
file = voice.wav
)");
  const auto rc = load_run_config(tmp.file("run.ini"));
  REQUIRE(rc.scenario.mic_positions.size() == 3);
  CHECK(rc.scenario.mic_positions[1].x() == 0.1);
  CHECK(rc.scenario.mic_positions[2].y() == 0.1);
  CHECK(rc.scenario.sources[0].signal.size() == 16000);
}

TEST_CASE("configuration errors") {
  const std::string scene = "[scene]\nmic_count = 2\n[run]\nduration = 1\n[source]\nid = 0\n";
  CHECK_NOTHROW(parse_run_config(scene, ""));
  CHECK_THROWS_AS(parse_run_config("[run]\nduration = 1\n", ""), ConfigError);
  CHECK_THROWS_AS(parse_run_config(scene + "[bogus]\n", ""), ConfigError);
  CHECK_THROWS_AS(parse_run_config(scene + "[gss]\nmu = fast\n", ""), ConfigError);
  CHECK_THROWS_AS(parse_run_config(scene + "[gss]\nspeed = 1\n", ""), ConfigError);
  CHECK_THROWS_AS(parse_run_config(scene + "[gss]\nmu\n", ""), ConfigError);
  CHECK_THROWS_AS(parse_run_config(scene + "[events]\nat 1s add source 7\n", ""), ConfigError);
  CHECK_THROWS_AS(parse_run_config("[scene]\nmic_count = 2\n[run]\nduration = 0\n[source]\n", ""), ConfigError);
  CHECK_THROWS_AS(parse_run_config(scene + "[stft]\nframe_size = 1000\n", ""), ConfigError);
  CHECK_THROWS_AS(parse_run_config(scene + "[postfilter]\nalpha_s = 2\n", ""), ConfigError);
  CHECK_THROWS_AS(parse_run_config(scene + "[run]\nvariant = magic\n", ""), ConfigError);
  CHECK_THROWS_AS(parse_run_config(scene + "[source]\nfile = nowhere.wav\n", "/nonexistent"), IoError);
  CHECK_THROWS_AS(load_run_config("/nonexistent/run.ini"), IoError);
}
