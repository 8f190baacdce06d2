#include "percuss/config.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace percuss {

using nlohmann::json;

namespace {

[[noreturn]] void invalid(const std::string& key, const std::string& why) {
  throw Error(Errc::config_invalid, key + ": " + why);
}

double as_number(const std::string& key, const json& v) {
  if (!v.is_number()) invalid(key, "expected a number");
  return v.get<double>();
}

long as_int(const std::string& key, const json& v, long lo, long hi) {
  if (!v.is_number_integer()) invalid(key, "expected an integer");
  const long x = v.get<long>();
  if (x < lo || x > hi) invalid(key, "must be in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
  return x;
}

std::string as_string(const std::string& key, const json& v) {
  if (!v.is_string()) invalid(key, "expected a string");
  return v.get<std::string>();
}

bool as_bool(const std::string& key, const json& v) {
  if (v.is_boolean()) return v.get<bool>();
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s == "true" || s == "on" || s == "1") return true;
    if (s == "false" || s == "off" || s == "0") return false;
  }
  if (v.is_number_integer()) return v.get<long>() != 0;
  invalid(key, "expected a boolean");
}

using DetectorSetter = std::function<void(DetectorConfig&, const std::string&, const json&)>;

const std::map<std::string, DetectorSetter>& detector_keys() {
  static const std::map<std::string, DetectorSetter> keys = {
      {"acc_threshold",
       [](DetectorConfig& d, const std::string& k, const json& v) {
         d.acc_threshold = as_number(k, v);
         if (!(d.acc_threshold > 0)) invalid(k, "must be > 0");
       }},
      {"refractory_ms",
       [](DetectorConfig& d, const std::string& k, const json& v) {
         const double ms = as_number(k, v);
         if (!(ms >= 0)) invalid(k, "must be >= 0");
         d.refractory = static_cast<Micros>(std::llround(ms * 1000.0));
       }},
      {"direction_gate",
       [](DetectorConfig& d, const std::string& k, const json& v) {
         const auto g = parse_direction_gate(as_string(k, v));
         if (!g) invalid(k, "must be \"none\" or \"rebound\"");
         d.direction_gate = *g;
       }},
      {"k_sat",
       [](DetectorConfig& d, const std::string& k, const json& v) {
         d.k_sat = as_number(k, v);
         if (!(d.k_sat >= 1)) invalid(k, "must be >= 1");
       }},
      {"peak_window",
       [](DetectorConfig& d, const std::string& k, const json& v) {
         d.peak_window = static_cast<int>(as_int(k, v, 1, 64));
       }},
  };
  return keys;
}

using Setter = std::function<void(RunConfig&, const std::string&, const json&)>;

const std::map<std::string, Setter>& run_keys() {
  static const std::map<std::string, Setter> keys = {
      // segmentation
      {"threshold", [](RunConfig& c, const std::string& k,
                       const json& v) { c.pipeline.segmentation.threshold = static_cast<int>(as_int(k, v, 0, 255)); }},
      {"polarity",
       [](RunConfig& c, const std::string& k, const json& v) {
         const auto p = parse_polarity(as_string(k, v));
         if (!p) invalid(k, "must be \"dark-foreground\" or \"bright-foreground\"");
         c.pipeline.segmentation.polarity = *p;
       }},
      {"open_iterations",
       [](RunConfig& c, const std::string& k, const json& v) {
         c.pipeline.segmentation.open_iterations = static_cast<int>(as_int(k, v, 0, 16));
       }},
      {"connectivity",
       [](RunConfig& c, const std::string& k, const json& v) {
         const long n = as_int(k, v, 4, 8);
         if (n != 4 && n != 8) invalid(k, "must be 4 or 8");
         c.pipeline.segmentation.connectivity = n == 4 ? Connectivity::four : Connectivity::eight;
       }},
      {"min_blob_area", [](RunConfig& c, const std::string& k,
                           const json& v) { c.pipeline.segmentation.min_blob_area = as_int(k, v, 0, 1L << 30); }},
      // tracking
      {"split_x",
       [](RunConfig& c, const std::string& k, const json& v) {
         if (v.is_string() && v.get<std::string>() == "center") {
           c.pipeline.split_x.reset();
           return;
         }
         c.pipeline.split_x = static_cast<int>(as_int(k, v, 1, 1 << 20));
       }},
      {"ema_alpha",
       [](RunConfig& c, const std::string& k, const json& v) {
         const double a = as_number(k, v);
         if (!(a > 0 && a <= 1)) invalid(k, "must be in (0, 1]");
         c.pipeline.kinematics.ema_alpha = a;
       }},
      {"dropout_hold", [](RunConfig& c, const std::string& k,
                          const json& v) { c.pipeline.kinematics.dropout_hold = static_cast<int>(as_int(k, v, 0, 1000)); }},
      {"dropout_reset",
       [](RunConfig& c, const std::string& k, const json& v) {
         c.pipeline.kinematics.dropout_reset = static_cast<int>(as_int(k, v, 0, 100000));
       }},
      // spines
      {"spines", [](RunConfig& c, const std::string& k, const json& v) { c.pipeline.spines = as_bool(k, v); }},
      {"spine_gain",
       [](RunConfig& c, const std::string& k, const json& v) {
         c.pipeline.spine.gain = as_number(k, v);
         if (!(c.pipeline.spine.gain >= 0)) invalid(k, "must be >= 0");
       }},
      {"spine_max_len",
       [](RunConfig& c, const std::string& k, const json& v) {
         c.pipeline.spine.max_len = as_number(k, v);
         if (!(c.pipeline.spine.max_len >= 0)) invalid(k, "must be >= 0");
       }},
      {"spine_stride", [](RunConfig& c, const std::string& k,
                          const json& v) { c.pipeline.spine.stride = static_cast<int>(as_int(k, v, 1, 100000)); }},
      {"match_radius",
       [](RunConfig& c, const std::string& k, const json& v) {
         c.pipeline.spine.match_radius = as_number(k, v);
         if (!(c.pipeline.spine.match_radius > 0)) invalid(k, "must be > 0");
       }},
      {"broadcast_tip_accel", [](RunConfig& c, const std::string& k,
                                 const json& v) { c.pipeline.spine.broadcast_tip_accel = as_bool(k, v); }},
      // input
      {"input", [](RunConfig& c, const std::string& k, const json& v) { c.input.path = as_string(k, v); }},
      {"format",
       [](RunConfig& c, const std::string& k, const json& v) {
         const auto f = parse_stream_format(as_string(k, v));
         if (!f) invalid(k, "must be pgm-sequence, raw-y8 or y4m");
         c.input.format = *f;
       }},
      {"fps",
       [](RunConfig& c, const std::string& k, const json& v) {
         c.input.nominal_fps = as_number(k, v);
         if (!(c.input.nominal_fps > 0)) invalid(k, "must be > 0");
       }},
      {"width", [](RunConfig& c, const std::string& k,
                   const json& v) { c.input.width = static_cast<int>(as_int(k, v, 1, 1 << 16)); }},
      {"height", [](RunConfig& c, const std::string& k,
                    const json& v) { c.input.height = static_cast<int>(as_int(k, v, 1, 1 << 16)); }},
      // sinks
      {"scenes", [](RunConfig& c, const std::string& k, const json& v) { c.scenes_path = as_string(k, v); }},
      {"osc",
       [](RunConfig& c, const std::string& k, const json& v) {
         c.osc.clear();
         const json list = v.is_array() ? v : json::array({v});
         for (const json& e : list) {
           try {
             c.osc.push_back(parse_endpoint(as_string(k, e)));
           } catch (const Error& err) {
             invalid(k, err.what());
           }
         }
       }},
      {"events_out", [](RunConfig& c, const std::string& k, const json& v) { c.events_out = as_string(k, v); }},
      {"spines_out",
       [](RunConfig& c, const std::string& k, const json& v) {
         c.spines_out = as_string(k, v);
         if (!c.spines_out.empty()) c.pipeline.spines = true;
       }},
      {"queue_capacity", [](RunConfig& c, const std::string& k,
                            const json& v) { c.queue_capacity = static_cast<std::size_t>(as_int(k, v, 1, 1 << 20)); }},
  };
  return keys;
}

void apply_detector(DetectorConfig& d, const std::string& prefix, const json& obj) {
  if (!obj.is_object()) invalid(prefix, "expected an object of detector keys");
  for (const auto& [key, value] : obj.items()) {
    const auto it = detector_keys().find(key);
    if (it == detector_keys().end()) invalid(prefix + "." + key, "not a detector key");
    it->second(d, prefix + "." + key, value);
  }
}

}  // namespace

void apply_config(RunConfig& cfg, const json& doc) {
  if (!doc.is_object()) invalid("config", "expected a JSON object");
  // top-level detector keys set both sides before per-side overrides
  for (const auto& [key, value] : doc.items()) {
    if (const auto d = detector_keys().find(key); d != detector_keys().end()) {
      d->second(cfg.pipeline.left_detector, key, value);
      d->second(cfg.pipeline.right_detector, key, value);
    } else if (const auto r = run_keys().find(key); r != run_keys().end()) {
      r->second(cfg, key, value);
    } else if (key != "left" && key != "right") {
      invalid(key, "unknown configuration key");
    }
  }
  if (doc.contains("left")) apply_detector(cfg.pipeline.left_detector, "left", doc["left"]);
  if (doc.contains("right")) apply_detector(cfg.pipeline.right_detector, "right", doc["right"]);
}

void validate(const RunConfig& cfg) {
  const double frame_us = 1e6 / cfg.input.nominal_fps;
  for (const auto* d : {&cfg.pipeline.left_detector, &cfg.pipeline.right_detector}) {
    const char* key = d == &cfg.pipeline.left_detector ? "left.refractory_ms" : "right.refractory_ms";
    if (static_cast<double>(d->refractory) + 0.5 < frame_us)
      invalid(key, "must be at least one frame period (" + std::to_string(frame_us / 1000.0) + " ms)");
  }
  if (cfg.pipeline.kinematics.dropout_reset < cfg.pipeline.kinematics.dropout_hold)
    invalid("dropout_reset", "must be >= dropout_hold");
  if (cfg.input.format == StreamFormat::raw_y8 && (cfg.input.width <= 0 || cfg.input.height <= 0))
    invalid("width", "raw-y8 input needs width and height");
  if (cfg.input.format == StreamFormat::pgm_sequence && cfg.input.path == "-")
    invalid("input", "pgm-sequence input needs a directory");
  if (cfg.pipeline.split_x && cfg.input.width > 0 && *cfg.pipeline.split_x >= cfg.input.width)
    invalid("split_x", "must be inside the frame");
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) invalid("config", "cannot read " + path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    invalid("config", std::string(path) + ": " + e.what());
  }
  RunConfig cfg;
  apply_config(cfg, doc);
  return cfg;
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    for (const auto& [name, _] : detector_keys()) k.push_back(name);
    for (const auto& [name, _] : run_keys()) k.push_back(name);
    return k;
  }();
  return keys;
}

}  // namespace percuss
