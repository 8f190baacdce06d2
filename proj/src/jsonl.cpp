#include "percuss/jsonl.hpp"

#include <json.hpp>

namespace percuss::jsonl {

using nlohmann::ordered_json;

std::string event_line(const StrikeEvent& e) {
  ordered_json j;
  j["t"] = e.t;
  j["side"] = side_code(e.side);
  j["x"] = e.pos.x();
  j["y"] = e.pos.y();
  j["peak_acc"] = e.peak_acc;
  j["intensity"] = e.intensity;
  return j.dump();
}

std::string truth_line(const TruthStrike& s) {
  ordered_json j;
  j["t"] = s.t;
  j["side"] = side_code(s.side);
  j["x"] = s.pos.x();
  j["y"] = s.pos.y();
  return j.dump();
}

std::string spine_line(const SpineField& field) {
  ordered_json j;
  j["t"] = field.frame_t;
  j["side"] = side_code(field.side);
  ordered_json spines = ordered_json::array();
  for (const Spine& s : field.spines)
    spines.push_back({s.origin.x(), s.origin.y(), s.dir.x(), s.dir.y(), s.len});
  j["spines"] = std::move(spines);
  return j.dump();
}

namespace {

[[noreturn]] void bad_line(std::size_t line, const std::string& why) {
  throw Error(Errc::parse_error, "line " + std::to_string(line) + ": " + why);
}

template <typename Fn>
void for_each_record(std::istream& in, Fn&& fn) {
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    ordered_json j;
    try {
      j = ordered_json::parse(text);
    } catch (const ordered_json::parse_error&) {
      bad_line(line, "not valid JSON");
    }
    if (!j.is_object()) bad_line(line, "expected a JSON object");
    fn(j, line);
  }
  if (in.bad()) throw Error(Errc::io_failure, "read failed after line " + std::to_string(line));
}

Side side_field(const ordered_json& j, std::size_t line) {
  if (!j.contains("side") || !j["side"].is_string()) bad_line(line, "missing \"side\"");
  const auto s = j["side"].get<std::string>();
  if (s == "L") return Side::Left;
  if (s == "R") return Side::Right;
  bad_line(line, "side must be \"L\" or \"R\"");
}

Micros time_field(const ordered_json& j, std::size_t line) {
  if (!j.contains("t") || !j["t"].is_number()) bad_line(line, "missing numeric \"t\"");
  return j["t"].is_number_integer() ? j["t"].get<Micros>() : static_cast<Micros>(j["t"].get<double>());
}

double number_field(const ordered_json& j, const char* key, std::size_t line, double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_number()) bad_line(line, std::string("\"") + key + "\" must be a number");
  return j[key].get<double>();
}

}  // namespace

std::vector<StrikeEvent> read_events(std::istream& in) {
  std::vector<StrikeEvent> out;
  for_each_record(in, [&out](const ordered_json& j, std::size_t line) {
    StrikeEvent e;
    e.t = time_field(j, line);
    e.side = side_field(j, line);
    e.pos = Vec2(number_field(j, "x", line, 0.0), number_field(j, "y", line, 0.0));
    e.peak_acc = number_field(j, "peak_acc", line, 0.0);
    e.intensity = number_field(j, "intensity", line, 0.0);
    out.push_back(e);
  });
  return out;
}

std::vector<TruthStrike> read_truth(std::istream& in) {
  std::vector<TruthStrike> out;
  for_each_record(in, [&out](const ordered_json& j, std::size_t line) {
    TruthStrike s;
    s.t = time_field(j, line);
    s.side = side_field(j, line);
    s.pos = Vec2(number_field(j, "x", line, 0.0), number_field(j, "y", line, 0.0));
    out.push_back(s);
  });
  std::stable_sort(out.begin(), out.end(), [](const TruthStrike& a, const TruthStrike& b) { return a.t < b.t; });
  return out;
}

}  // namespace percuss::jsonl
