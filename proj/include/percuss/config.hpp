#pragma once

#include "percuss/frame_io.hpp"
#include "percuss/silhouette.hpp"
#include "percuss/spine_viz.hpp"
#include "percuss/strike_detect.hpp"
#include "percuss/tracking.hpp"
#include "percuss/transport.hpp"

#include <json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace percuss {

struct SegmentationConfig {
  int threshold = 100;
  Polarity polarity = Polarity::dark_foreground;
  int open_iterations = 0;
  Connectivity connectivity = Connectivity::eight;
  long min_blob_area = 20;
};

/// Everything the per-frame pipeline needs.
struct PipelineConfig {
  SegmentationConfig segmentation;
  std::optional<int> split_x;  // nullopt = frame centre
  KinematicsConfig kinematics;
  DetectorConfig left_detector;
  DetectorConfig right_detector;
  bool spines = false;
  SpineConfig spine;
};

/// Full configuration of a `run`: pipeline plus input and sinks.
struct RunConfig {
  PipelineConfig pipeline;
  StreamSpec input{"-", StreamFormat::y4m, 60.0, 0, 0};
  std::string scenes_path;         // empty = built-in default scene
  std::vector<Endpoint> osc;       // OSC/UDP destinations
  std::string events_out = "-";    // JSONL path, "-" = stdout, "" = none
  std::string spines_out;          // JSONL path, "" = none
  std::size_t queue_capacity = 256;
};

/// Applies the keys of a flat JSON object onto `cfg`, validating each value.
/// Unknown keys and invalid values throw Errc::config_invalid whose message
/// starts with the offending key. Per-side detector overrides go in nested
/// "left"/"right" objects.
void apply_config(RunConfig& cfg, const nlohmann::json& doc);

/// Cross-key checks (e.g. refractory >= one frame period). Throws
/// Errc::config_invalid naming the key.
void validate(const RunConfig& cfg);

RunConfig load_run_config(const std::string& path);

/// Key names accepted by apply_config, for flag generation.
const std::vector<std::string>& config_keys();

}  // namespace percuss
