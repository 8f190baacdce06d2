#pragma once

#include "percuss/osc.hpp"
#include "percuss/strike_detect.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace percuss {

enum class EventField { side, intensity, t, x, y };

/// A rule argument: either an event field or a literal value.
using ArgTemplate = std::variant<EventField, osc::Arg>;

struct SceneRule {
  std::optional<Side> side;  // nullopt matches both
  double min_intensity = 0.0;
  std::string address;  // "{side}" expands to L or R
  std::vector<ArgTemplate> args;
};

struct SceneConfig {
  std::string name;
  std::vector<SceneRule> rules;
  bool spine_output = true;
};

/// One message per matching rule, in rule order. side -> int32 (0=L, 1=R),
/// intensity/x/y -> float32, t -> float32 seconds.
std::vector<osc::Message> map_event(const StrikeEvent& event, const SceneConfig& scene);

/// The loaded set of scenes with exactly one active.
class SceneSet {
 public:
  explicit SceneSet(std::vector<SceneConfig> scenes, const std::string& initial = {});

  /// Throws Errc::unknown_scene and leaves the active scene unchanged.
  const SceneConfig& switch_scene(const std::string& name);

  const SceneConfig& active() const { return scenes_[active_]; }
  const std::vector<SceneConfig>& scenes() const { return scenes_; }

 private:
  std::vector<SceneConfig> scenes_;
  std::size_t active_ = 0;
};

/// Built-in scene: every strike goes to /sos/strike [side, intensity, t, x, y].
SceneConfig default_scene();

/// Parses and validates a scene document; throws Errc::config_invalid.
SceneSet parse_scenes(const std::string& json_text);
SceneSet load_scenes(const std::filesystem::path& path);

}  // namespace percuss
