#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "arraysep/pipeline.h"
#include "arraysep/simulate.h"

namespace arraysep {

// Parsed `key = value` text with `[section]` headers. Repeated sections
// (e.g. several [source] blocks) keep their order. Lines in [events] are kept
// verbatim. '#' starts a comment.
struct IniSection {
  std::string name;
  std::map<std::string, std::string> values;
  std::vector<std::string> lines;  // raw lines of free-form sections
  int line_number = 0;
};

std::vector<IniSection> parse_ini(const std::string& text);

// "at 3.0s add source 2" / "at 6.0s remove source 1"
SourceEvent parse_event(const std::string& line);

struct RunConfig {
  Scenario scenario;
  PipelineConfig pipeline;
  Variant variant = Variant::kGssMultiPf;
  std::vector<SourceEvent> events;  // explicit events from [events]
};

// Builds a RunConfig from config text. base_dir resolves relative file paths.
// Malformed content throws ConfigError; unreadable referenced files IoError.
RunConfig parse_run_config(const std::string& text, const std::string& base_dir);
RunConfig load_run_config(const std::string& path);

}  // namespace arraysep
