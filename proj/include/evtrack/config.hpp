#pragma once

// JSON run configuration shared by the command-line subcommands.
//
//   {
//     "sensor": {"width": 640, "height": 480},      optional, for CSV events
//     "framer": {...}, "eot": {...}, "ceot": {...},
//     "eval":   {"thresholds": [...], "include_tracking": false, "frame_period_us": null},
//     "paths":  {"events": null, "tracks": null, "ground_truth": null, "report": null}
//   }
//
// Every section and key is optional; missing keys keep the module defaults.
// Unknown keys and wrongly typed values are rejected with Error(invalid_config).

#include <filesystem>
#include <optional>
#include <string>

#include "json.hpp"

#include "evtrack/ceot.hpp"
#include "evtrack/eot.hpp"
#include "evtrack/evaluation.hpp"
#include "evtrack/framer.hpp"
#include "evtrack/types.hpp"

namespace evtrack {

struct RunPaths {
  std::optional<std::string> events;
  std::optional<std::string> tracks;
  std::optional<std::string> ground_truth;
  std::optional<std::string> report;
};

struct RunConfig {
  std::optional<SensorGeometry> sensor;
  FramerConfig framer;
  EotConfig eot;
  CeotConfig ceot;
  EvalOptions eval;
  RunPaths paths;

  // Validates every section.
  void validate() const;
};

nlohmann::json to_json(const RunConfig& cfg);
RunConfig run_config_from_json(const nlohmann::json& j);

RunConfig load_run_config(const std::filesystem::path& path);

/// Pretty-printed default configuration, newline-terminated.
std::string default_config_text();

}  // namespace evtrack
