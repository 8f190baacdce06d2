#include "percuss/scene.hpp"

#include <json.hpp>

#include <fstream>
#include <set>
#include <sstream>

namespace percuss {

using nlohmann::json;

namespace {

std::string expand_address(const std::string& tmpl, Side side) {
  static const std::string kSide = "{side}";
  std::string out = tmpl;
  for (auto pos = out.find(kSide); pos != std::string::npos; pos = out.find(kSide, pos))
    out.replace(pos, kSide.size(), side_code(side));
  return out;
}

osc::Arg instantiate(const ArgTemplate& tmpl, const StrikeEvent& e) {
  if (const auto* lit = std::get_if<osc::Arg>(&tmpl)) return *lit;
  switch (std::get<EventField>(tmpl)) {
    case EventField::side: return std::int32_t{side_index(e.side)};
    case EventField::intensity: return static_cast<float>(e.intensity);
    case EventField::t: return static_cast<float>(static_cast<double>(e.t) * 1e-6);
    case EventField::x: return static_cast<float>(e.pos.x());
    case EventField::y: return static_cast<float>(e.pos.y());
  }
  return std::int32_t{0};
}

}  // namespace

std::vector<osc::Message> map_event(const StrikeEvent& event, const SceneConfig& scene) {
  std::vector<osc::Message> out;
  for (const SceneRule& rule : scene.rules) {
    if (rule.side && *rule.side != event.side) continue;
    if (event.intensity < rule.min_intensity) continue;
    osc::Message m{expand_address(rule.address, event.side), {}};
    m.args.reserve(rule.args.size());
    for (const ArgTemplate& a : rule.args) m.args.push_back(instantiate(a, event));
    out.push_back(std::move(m));
  }
  return out;
}

SceneSet::SceneSet(std::vector<SceneConfig> scenes, const std::string& initial) : scenes_(std::move(scenes)) {
  if (scenes_.empty()) throw Error(Errc::config_invalid, "scene set is empty");
  if (!initial.empty()) switch_scene(initial);
}

const SceneConfig& SceneSet::switch_scene(const std::string& name) {
  for (std::size_t i = 0; i < scenes_.size(); ++i) {
    if (scenes_[i].name == name) {
      active_ = i;
      return scenes_[i];
    }
  }
  throw Error(Errc::unknown_scene, "no scene named \"" + name + "\"");
}

SceneConfig default_scene() {
  SceneRule rule;
  rule.address = "/sos/strike";
  rule.args = {EventField::side, EventField::intensity, EventField::t, EventField::x, EventField::y};
  return SceneConfig{"default", {rule}, true};
}

namespace {

[[noreturn]] void invalid(const std::string& where, const std::string& why) {
  throw Error(Errc::config_invalid, where + ": " + why);
}

ArgTemplate parse_arg(const json& j, const std::string& where) {
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "side") return EventField::side;
    if (s == "intensity") return EventField::intensity;
    if (s == "t") return EventField::t;
    if (s == "x") return EventField::x;
    if (s == "y") return EventField::y;
    invalid(where, "unknown template field \"" + s + "\" (use {\"string\": ...} for literals)");
  }
  if (j.is_number_integer()) return osc::Arg{j.get<std::int32_t>()};
  if (j.is_number_float()) return osc::Arg{j.get<float>()};
  if (j.is_object() && j.size() == 1) {
    if (j.contains("int") && j["int"].is_number_integer()) return osc::Arg{j["int"].get<std::int32_t>()};
    if (j.contains("float") && j["float"].is_number()) return osc::Arg{j["float"].get<float>()};
    if (j.contains("string") && j["string"].is_string()) return osc::Arg{j["string"].get<std::string>()};
  }
  invalid(where, "argument must be a field name, a number, or {int|float|string: value}");
}

SceneRule parse_rule(const json& j, const std::string& where) {
  if (!j.is_object()) invalid(where, "rule must be an object");
  SceneRule rule;
  if (!j.contains("address") || !j["address"].is_string()) invalid(where + ".address", "missing string");
  rule.address = j["address"].get<std::string>();
  if (rule.address.empty() || rule.address.front() != '/') invalid(where + ".address", "must start with '/'");
  if (rule.address.find('\0') != std::string::npos) invalid(where + ".address", "contains NUL");
  if (j.contains("match")) {
    const json& m = j["match"];
    if (!m.is_object()) invalid(where + ".match", "must be an object");
    if (m.contains("side")) {
      const auto s = m["side"].is_string() ? m["side"].get<std::string>() : std::string{};
      if (s == "L") rule.side = Side::Left;
      else if (s == "R") rule.side = Side::Right;
      else if (s != "any") invalid(where + ".match.side", "must be \"L\", \"R\" or \"any\"");
    }
    if (m.contains("min_intensity")) {
      if (!m["min_intensity"].is_number()) invalid(where + ".match.min_intensity", "must be a number");
      rule.min_intensity = m["min_intensity"].get<double>();
    }
  }
  if (j.contains("args")) {
    if (!j["args"].is_array()) invalid(where + ".args", "must be an array");
    for (std::size_t i = 0; i < j["args"].size(); ++i)
      rule.args.push_back(parse_arg(j["args"][i], where + ".args[" + std::to_string(i) + "]"));
  }
  return rule;
}

}  // namespace

SceneSet parse_scenes(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    invalid("scenes", e.what());
  }
  if (!doc.is_object() || !doc.contains("scenes") || !doc["scenes"].is_array())
    invalid("scenes", "document must be an object with a \"scenes\" array");

  std::vector<SceneConfig> scenes;
  std::set<std::string> names;
  for (std::size_t i = 0; i < doc["scenes"].size(); ++i) {
    const json& s = doc["scenes"][i];
    const std::string where = "scenes[" + std::to_string(i) + "]";
    if (!s.is_object() || !s.contains("name") || !s["name"].is_string()) invalid(where + ".name", "missing string");
    SceneConfig scene;
    scene.name = s["name"].get<std::string>();
    if (!names.insert(scene.name).second) invalid(where + ".name", "duplicate scene \"" + scene.name + "\"");
    if (s.contains("spine_output")) {
      if (!s["spine_output"].is_boolean()) invalid(where + ".spine_output", "must be a boolean");
      scene.spine_output = s["spine_output"].get<bool>();
    }
    if (s.contains("rules")) {
      if (!s["rules"].is_array()) invalid(where + ".rules", "must be an array");
      for (std::size_t r = 0; r < s["rules"].size(); ++r)
        scene.rules.push_back(parse_rule(s["rules"][r], where + ".rules[" + std::to_string(r) + "]"));
    }
    scenes.push_back(std::move(scene));
  }
  if (scenes.empty()) invalid("scenes", "at least one scene is required");

  std::string initial;
  if (doc.contains("initial")) {
    if (!doc["initial"].is_string()) invalid("initial", "must be a string");
    initial = doc["initial"].get<std::string>();
    if (!names.count(initial)) invalid("initial", "no scene named \"" + initial + "\"");
  }
  return SceneSet(std::move(scenes), initial);
}

SceneSet load_scenes(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::config_invalid, "scenes: cannot read " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_scenes(buf.str());
}

}  // namespace percuss
