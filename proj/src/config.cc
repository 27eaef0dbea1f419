#include "arraysep/config.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <regex>
#include <set>
#include <sstream>

#include "arraysep/error.h"
#include "arraysep/wav.h"

namespace arraysep {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string where(const IniSection& s, const std::string& key) {
  return "[" + s.name + "] " + key + " (section at line " + std::to_string(s.line_number) + ")";
}

double get_double(const IniSection& s, const std::string& key, double fallback) {
  const auto it = s.values.find(key);
  if (it == s.values.end()) return fallback;
  try {
    std::size_t used = 0;
    const double v = std::stod(it->second, &used);
    if (used != it->second.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw ConfigError(where(s, key) + ": expected a number, got '" + it->second + "'");
  }
}

long get_long(const IniSection& s, const std::string& key, long fallback) {
  const double v = get_double(s, key, static_cast<double>(fallback));
  if (v != std::floor(v)) throw ConfigError(where(s, key) + ": expected an integer");
  return static_cast<long>(v);
}

std::string get_string(const IniSection& s, const std::string& key, const std::string& fallback) {
  const auto it = s.values.find(key);
  return it == s.values.end() ? fallback : it->second;
}

void check_keys(const IniSection& s, const std::set<std::string>& allowed) {
  for (const auto& [key, value] : s.values)
    if (!allowed.count(key)) throw ConfigError("unknown key " + where(s, key));
}

std::string resolve(const std::string& base_dir, const std::string& path) {
  const std::filesystem::path p(path);
  return p.is_absolute() || base_dir.empty() ? path : (std::filesystem::path(base_dir) / p).string();
}

Eigen::Vector3d parse_vector(const IniSection& s, const std::string& key, const std::string& text) {
  std::istringstream in(text);
  Eigen::Vector3d v;
  if (!(in >> v.x() >> v.y() >> v.z())) throw ConfigError(where(s, key) + ": expected three numbers");
  std::string rest;
  if (in >> rest) throw ConfigError(where(s, key) + ": expected three numbers");
  return v;
}

}  // namespace

std::vector<IniSection> parse_ini(const std::string& text) {
  std::vector<IniSection> sections;
  sections.push_back({"", {}, {}, 0});
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("line " + std::to_string(line_no) + ": malformed section header");
      sections.push_back({trim(line.substr(1, line.size() - 2)), {}, {}, line_no});
      continue;
    }
    IniSection& cur = sections.back();
    if (cur.name == "events") {
      cur.lines.push_back(line);
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("line " + std::to_string(line_no) + ": empty key");
    if (cur.name == "scene" && key == "mic") {
      // Repeated: collected as mic, mic#1, mic#2, ...
      std::string k = key;
      for (int i = 1; cur.values.count(k); ++i) k = key + "#" + std::to_string(i);
      cur.values[k] = value;
      continue;
    }
    if (!cur.values.emplace(key, value).second)
      throw ConfigError("line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
  }
  if (sections.front().values.empty()) sections.erase(sections.begin());
  return sections;
}

SourceEvent parse_event(const std::string& line) {
  static const std::regex pattern(R"(^\s*at\s+([0-9]*\.?[0-9]+(?:[eE][-+]?[0-9]+)?)\s*s\s+(add|remove)\s+source\s+(-?[0-9]+)\s*$)");
  std::smatch m;
  if (!std::regex_match(line, m, pattern)) throw ConfigError("malformed event: '" + line + "'");
  SourceEvent ev;
  ev.time_seconds = std::stod(m[1].str());
  ev.kind = m[2].str() == "add" ? EventKind::kAdd : EventKind::kRemove;
  ev.id = std::stoi(m[3].str());
  return ev;
}

RunConfig parse_run_config(const std::string& text, const std::string& base_dir) {
  RunConfig rc;
  Scenario& sc = rc.scenario;
  const auto sections = parse_ini(text);

  std::vector<IniSection> source_sections;
  bool have_scene = false;

  for (const auto& s : sections) {
    if (s.name == "scene") {
      have_scene = true;
      std::set<std::string> allowed{"sample_rate", "speed_of_sound", "array", "mic_count", "array_radius"};
      for (const auto& [k, v] : s.values)
        if (k == "mic" || k.rfind("mic#", 0) == 0) allowed.insert(k);
      check_keys(s, allowed);
      sc.sample_rate = get_double(s, "sample_rate", 16000.0);
      sc.speed_of_sound = get_double(s, "speed_of_sound", 343.0);
      const std::string array = get_string(s, "array", "circle");
      if (array == "circle") {
        const long count = get_long(s, "mic_count", 8);
        if (count < 1) throw ConfigError(where(s, "mic_count") + ": must be >= 1");
        sc.mic_positions = circular_array(static_cast<std::size_t>(count), get_double(s, "array_radius", 0.25));
      } else if (array == "explicit") {
        // keep declaration order: mic, mic#1, mic#2, ...
        if (s.values.count("mic")) sc.mic_positions.push_back(parse_vector(s, "mic", s.values.at("mic")));
        for (int i = 1; s.values.count("mic#" + std::to_string(i)); ++i)
          sc.mic_positions.push_back(parse_vector(s, "mic", s.values.at("mic#" + std::to_string(i))));
        if (sc.mic_positions.empty()) throw ConfigError("[scene] array = explicit needs mic = x y z lines");
      } else {
        throw ConfigError(where(s, "array") + ": expected 'circle' or 'explicit'");
      }
    } else if (s.name == "source") {
      source_sections.push_back(s);
    } else if (s.name == "noise") {
      check_keys(s, {"type", "level_db", "file"});
      const std::string type = get_string(s, "type", "white");
      sc.noise.level_db = get_double(s, "level_db", 0.0);
      if (type == "none") {
        sc.noise.type = NoiseType::kNone;
      } else if (type == "white") {
        sc.noise.type = NoiseType::kWhite;
      } else if (type == "file") {
        sc.noise.type = NoiseType::kFile;
        const auto it = s.values.find("file");
        if (it == s.values.end()) throw ConfigError("[noise] type = file needs file = <path>");
        sc.noise.recording = read_wav(resolve(base_dir, it->second)).channels;
      } else {
        throw ConfigError(where(s, "type") + ": expected none, white or file");
      }
    } else if (s.name == "run") {
      check_keys(s, {"duration", "seed", "variant", "rt60"});
      sc.duration_seconds = get_double(s, "duration", 0.0);
      sc.seed = static_cast<std::uint64_t>(get_long(s, "seed", 1));
      sc.rt60_seconds = get_double(s, "rt60", 0.0);
      const std::string v = get_string(s, "variant", "gss_multi_pf");
      const auto parsed = parse_variant(v);
      if (!parsed) throw ConfigError(where(s, "variant") + ": unknown variant '" + v + "'");
      rc.variant = *parsed;
    } else if (s.name == "stft") {
      check_keys(s, {"frame_size", "hop_size"});
      rc.pipeline.stft.frame_size = static_cast<std::size_t>(get_long(s, "frame_size", 1024));
      rc.pipeline.stft.hop_size = static_cast<std::size_t>(get_long(s, "hop_size", 512));
    } else if (s.name == "gss") {
      check_keys(s, {"mu"});
      rc.pipeline.mu = get_double(s, "mu", rc.pipeline.mu);
    } else if (s.name == "postfilter") {
      check_keys(s, {"eta", "alpha_s", "alpha_p", "g_min", "alpha_exponent", "mcra_power_smoothing",
                     "mcra_window", "mcra_ratio_threshold", "mcra_noise_smoothing", "zeta_smoothing",
                     "local_window", "global_window", "zeta_min_db", "zeta_max_db", "q_max"});
      auto& pf = rc.pipeline.postfilter;
      pf.eta = get_double(s, "eta", pf.eta);
      pf.alpha_s = get_double(s, "alpha_s", pf.alpha_s);
      pf.alpha_p = get_double(s, "alpha_p", pf.alpha_p);
      pf.g_min = get_double(s, "g_min", pf.g_min);
      pf.alpha_exponent = get_double(s, "alpha_exponent", pf.alpha_exponent);
      pf.mcra.power_smoothing = get_double(s, "mcra_power_smoothing", pf.mcra.power_smoothing);
      pf.mcra.window_seconds = get_double(s, "mcra_window", pf.mcra.window_seconds);
      pf.mcra.ratio_threshold = get_double(s, "mcra_ratio_threshold", pf.mcra.ratio_threshold);
      pf.mcra.noise_smoothing = get_double(s, "mcra_noise_smoothing", pf.mcra.noise_smoothing);
      pf.zeta_smoothing = get_double(s, "zeta_smoothing", pf.zeta_smoothing);
      pf.local_window = static_cast<std::size_t>(get_long(s, "local_window", static_cast<long>(pf.local_window)));
      pf.global_window = static_cast<std::size_t>(get_long(s, "global_window", static_cast<long>(pf.global_window)));
      pf.zeta_min_db = get_double(s, "zeta_min_db", pf.zeta_min_db);
      pf.zeta_max_db = get_double(s, "zeta_max_db", pf.zeta_max_db);
      pf.q_max = get_double(s, "q_max", pf.q_max);
    } else if (s.name == "events") {
      for (const auto& line : s.lines) rc.events.push_back(parse_event(line));
    } else {
      throw ConfigError("unknown section [" + s.name + "] at line " + std::to_string(s.line_number));
    }
  }
  if (!have_scene) throw ConfigError("missing [scene] section");
  rc.pipeline.stft.sample_rate = sc.sample_rate;

  const std::size_t n = sc.num_samples();
  for (const auto& s : source_sections) {
    check_keys(s, {"id", "azimuth", "elevation", "direction", "file", "surrogate_f0", "surrogate_seed", "gain"});
    SourceSpec src;
    src.id = static_cast<int>(get_long(s, "id", static_cast<long>(sc.sources.size())));
    if (s.values.count("direction")) {
      src.direction = parse_vector(s, "direction", s.values.at("direction"));
      if (src.direction.norm() == 0.0) throw ConfigError(where(s, "direction") + ": zero vector");
      src.direction.normalize();
    } else {
      src.direction = direction_from_azimuth(get_double(s, "azimuth", 0.0), get_double(s, "elevation", 0.0));
    }
    src.gain = get_double(s, "gain", 1.0);
    if (s.values.count("file")) {
      const WavData wav = read_wav(resolve(base_dir, s.values.at("file")));
      if (std::abs(wav.sample_rate - sc.sample_rate) > 0.5)
        throw ConfigError(where(s, "file") + ": sample rate does not match [scene] sample_rate");
      src.signal = wav.channels.front();
    } else {
      SurrogateVoice voice;
      voice.f0_hz = get_double(s, "surrogate_f0", voice.f0_hz);
      const auto seed = static_cast<std::uint64_t>(get_long(s, "surrogate_seed", 100 + src.id));
      src.signal = speech_surrogate(voice, n, sc.sample_rate, seed);
    }
    sc.sources.push_back(std::move(src));
  }

  // Apply explicit events to the sources' active intervals.
  for (const auto& ev : rc.events) {
    auto it = std::find_if(sc.sources.begin(), sc.sources.end(), [&](const auto& s) { return s.id == ev.id; });
    if (it == sc.sources.end()) throw ConfigError("event refers to unknown source " + std::to_string(ev.id));
    if (ev.kind == EventKind::kAdd) it->start_seconds = ev.time_seconds;
    else it->stop_seconds = ev.time_seconds;
  }

  try {
    sc.validate();
    rc.pipeline.stft.validate();
    rc.pipeline.postfilter.validate();
  } catch (const ValidationError& e) {
    throw ConfigError(e.what());
  }
  return rc;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_run_config(buf.str(), std::filesystem::path(path).parent_path().string());
}

}  // namespace arraysep
