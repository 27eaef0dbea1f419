#include "arraysep/spectrogram.h"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "arraysep/error.h"

namespace arraysep {

Spectrogram compute_spectrogram(const Signal& signal, const StftConfig& cfg) {
  Spectrogram spec;
  spec.sample_rate = cfg.sample_rate;
  spec.frame_size = cfg.frame_size;
  spec.hop_size = cfg.hop_size;
  for (const auto& frame : analyze_signal(MultiSignal{signal}, cfg)) {
    std::vector<double> row(frame.num_bins());
    for (std::size_t k = 0; k < row.size(); ++k) {
      const double p = std::norm(frame.bins(0, static_cast<Eigen::Index>(k)));
      row[k] = p > 0.0 ? std::max(kSpectrogramFloorDb, 10.0 * std::log10(p)) : kSpectrogramFloorDb;
    }
    spec.db.push_back(std::move(row));
  }
  return spec;
}

void write_spectrogram(const std::string& path, const Spectrogram& spec) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot create " + path);
  const std::size_t bins = spec.db.empty() ? spec.frame_size / 2 + 1 : spec.db.front().size();
  out << "# arraysep spectrogram v1\n";
  out << "# frames=" << spec.db.size() << " bins=" << bins << " frame_size=" << spec.frame_size
      << " hop_size=" << spec.hop_size << " sample_rate=" << spec.sample_rate
      << " floor_db=" << kSpectrogramFloorDb << "\n";
  char buf[32];
  for (const auto& row : spec.db) {
    for (std::size_t k = 0; k < row.size(); ++k) {
      const auto res = std::to_chars(buf, buf + sizeof buf, row[k]);
      if (k) out << ' ';
      out.write(buf, res.ptr - buf);
    }
    out << '\n';
  }
  if (!out) throw IoError("write failed: " + path);
}

Spectrogram read_spectrogram(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  Spectrogram spec;
  std::size_t frames = 0, bins = 0;
  std::string line;
  bool have_header = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream fields(line.substr(1));
      std::string kv;
      while (fields >> kv) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) continue;
        const std::string key = kv.substr(0, eq);
        const std::string value = kv.substr(eq + 1);
        if (key == "frames") frames = std::stoul(value);
        else if (key == "bins") bins = std::stoul(value);
        else if (key == "frame_size") spec.frame_size = std::stoul(value);
        else if (key == "hop_size") spec.hop_size = std::stoul(value);
        else if (key == "sample_rate") spec.sample_rate = std::stod(value);
        have_header = true;
      }
      continue;
    }
    std::vector<double> row;
    row.reserve(bins);
    const char* p = line.data();
    const char* end = p + line.size();
    while (p < end) {
      while (p < end && *p == ' ') ++p;
      if (p == end) break;
      double v;
      const auto res = std::from_chars(p, end, v);
      if (res.ec != std::errc()) throw IoError(path + ": malformed value");
      row.push_back(v);
      p = res.ptr;
    }
    if (row.size() != bins) throw IoError(path + ": row length does not match header");
    spec.db.push_back(std::move(row));
  }
  if (!have_header) throw IoError(path + ": missing header");
  if (spec.db.size() != frames) throw IoError(path + ": frame count does not match header");
  return spec;
}

void spectrogram_dump(const Signal& signal, const StftConfig& cfg, const std::string& path) {
  write_spectrogram(path, compute_spectrogram(signal, cfg));
}

}  // namespace arraysep
