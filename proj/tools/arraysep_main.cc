// Command-line front end: `separate` runs a scenario file through one or all
// processing chains; `evaluate` scores a single estimate against a reference.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "arraysep/config.h"
#include "arraysep/error.h"
#include "arraysep/metrics.h"
#include "arraysep/pipeline.h"
#include "arraysep/spectrogram.h"
#include "arraysep/wav.h"

namespace fs = std::filesystem;
using namespace arraysep;

namespace {

constexpr int kExitConfig = 1;
constexpr int kExitIo = 2;

struct SeparateOptions {
  std::string config;
  std::string variant;
  std::string out_dir = "out";
  std::optional<std::uint64_t> seed;
  bool dump_spectrograms = false;
};

struct EvaluateOptions {
  std::string reference;
  std::string estimate;
  std::size_t frame_size = 1024;
  std::size_t hop_size = 512;
};

void make_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
}

std::string source_file(int id, const char* suffix) { return "source_" + std::to_string(id) + suffix; }

void print_table(const std::vector<MetricReport>& reports) {
  std::printf("%-16s %8s %10s %10s\n", "variant", "source", "snr_db", "lsd_db");
  for (const auto& r : reports)
    for (std::size_t m = 0; m < r.source_ids.size(); ++m)
      std::printf("%-16s %8d %10.2f %10.2f\n", r.variant.c_str(), r.source_ids[m], r.snr_db[m], r.lsd_db[m]);
}

void write_csv(const fs::path& path, const std::vector<MetricReport>& reports) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "variant,source,snr_db,lsd_db\n";
  char line[128];
  for (const auto& r : reports)
    for (std::size_t m = 0; m < r.source_ids.size(); ++m) {
      std::snprintf(line, sizeof line, "%s,%d,%.4f,%.4f\n", r.variant.c_str(), r.source_ids[m], r.snr_db[m],
                    r.lsd_db[m]);
      out << line;
    }
  if (!out) throw IoError("write failed: " + path.string());
}

int run_separate(const SeparateOptions& opt) {
  RunConfig rc = load_run_config(opt.config);
  if (opt.seed) rc.scenario.seed = *opt.seed;

  std::vector<Variant> variants;
  if (opt.variant == "all") {
    variants.assign(std::begin(kAllVariants), std::end(kAllVariants));
  } else if (!opt.variant.empty()) {
    const auto v = parse_variant(opt.variant);
    if (!v) throw ConfigError("unknown variant '" + opt.variant + "'");
    variants.push_back(*v);
  } else {
    variants.push_back(rc.variant);
  }

  const Mixture mixture = mix(rc.scenario);
  const fs::path out_dir(opt.out_dir);
  make_dir(out_dir);
  const double fs_hz = rc.scenario.sample_rate;
  write_wav((out_dir / "mixture.wav").string(), {fs_hz, mixture.mics}, WavFormat::kFloat32);

  std::vector<int> ids;
  for (const auto& s : rc.scenario.sources) ids.push_back(s.id);
  for (std::size_t m = 0; m < ids.size(); ++m) {
    const std::string name = "reference_" + std::to_string(ids[m]);
    write_wav((out_dir / (name + ".wav")).string(), {fs_hz, {mixture.references[m]}}, WavFormat::kFloat32);
    if (opt.dump_spectrograms)
      spectrogram_dump(mixture.references[m], rc.pipeline.stft, (out_dir / (name + ".spec.txt")).string());
  }

  std::vector<MetricReport> reports;
  for (Variant v : variants) {
    const PipelineResult result = run_scenario(rc.scenario, mixture, v, rc.pipeline);
    const fs::path dir = out_dir / std::string(variant_name(v));
    make_dir(dir);
    for (std::size_t m = 0; m < result.outputs.size(); ++m) {
      const int id = result.source_ids[m];
      write_wav((dir / source_file(id, ".wav")).string(), {fs_hz, {result.outputs[m]}}, WavFormat::kFloat32);
      if (opt.dump_spectrograms)
        spectrogram_dump(result.outputs[m], rc.pipeline.stft, (dir / source_file(id, ".spec.txt")).string());
    }
    reports.push_back(evaluate(mixture, result, v, rc.pipeline.stft));
    std::fprintf(stderr, "%s: %.1f s of audio in %.2f s (real-time factor %.3f)\n",
                 std::string(variant_name(v)).c_str(), result.audio_seconds, result.processing_seconds,
                 result.realtime_factor());
  }

  write_csv(out_dir / "metrics.csv", reports);
  print_table(reports);
  return 0;
}

int run_evaluate(const EvaluateOptions& opt) {
  const WavData ref = read_wav(opt.reference);
  const WavData est = read_wav(opt.estimate);
  if (ref.sample_rate != est.sample_rate) throw ConfigError("sample rates differ");
  const Signal& r = ref.channels.front();
  Signal e = est.channels.front();
  e.resize(r.size(), 0.0);

  StftConfig cfg;
  cfg.frame_size = opt.frame_size;
  cfg.hop_size = opt.hop_size;
  cfg.sample_rate = ref.sample_rate;
  try {
    cfg.validate();
  } catch (const ValidationError& err) {
    throw ConfigError(err.what());
  }
  const double snr = snr_db(r, e, cfg.frame_size);
  const long lag = best_lag(r, e, cfg.frame_size);
  const double lsd = lsd_db(r, shift_signal(e, lag), cfg, default_lsd_epsilon(r, cfg));
  std::printf("snr_db %.4f\nlsd_db %.4f\nlag %ld\n", snr, lsd, lag);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Microphone-array source separation with a multichannel post-filter"};
  app.require_subcommand(1);

  SeparateOptions sep;
  auto* separate = app.add_subcommand("separate", "Simulate the scenario in a config file and separate it");
  separate->add_option("config", sep.config, "Scenario/config file")->required();
  separate->add_option("--variant", sep.variant, "mic, delay_and_sum, gss, gss_single_pf, gss_multi_pf or all");
  separate->add_option("--out", sep.out_dir, "Output directory")->capture_default_str();
  separate->add_option("--seed", sep.seed, "Override the scenario seed");
  separate->add_flag("--dump-spectrograms", sep.dump_spectrograms, "Write dB spectrogram text files");

  EvaluateOptions ev;
  auto* evaluate_cmd = app.add_subcommand("evaluate", "SNR and LSD of an estimate against a reference");
  evaluate_cmd->add_option("reference", ev.reference, "Reference WAV (first channel used)")->required();
  evaluate_cmd->add_option("estimate", ev.estimate, "Estimate WAV (first channel used)")->required();
  evaluate_cmd->add_option("--frame-size", ev.frame_size, "STFT frame size for LSD")->capture_default_str();
  evaluate_cmd->add_option("--hop-size", ev.hop_size, "STFT hop size for LSD")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (separate->parsed()) return run_separate(sep);
    return run_evaluate(ev);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const ValidationError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const IoError& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return kExitIo;
  }
}
