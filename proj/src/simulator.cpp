#include "percuss/simulator.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

namespace percuss {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kUpperArmDrop = kPi / 3.0;  // upper arm hangs 60 degrees below horizontal, forward
constexpr double kDefaultPose = 0.3;

[[noreturn]] void bad_script(const std::string& why) { throw Error(Errc::config_invalid, "script: " + why); }

}  // namespace

Performer::Performer(PerformerScript script) : script_(std::move(script)) {
  const auto& m = script_.motion;
  if (!(script_.arm_len > 0) || !(script_.stick_len > 0) || !(script_.stick_width > 0) || !(script_.arm_width > 0))
    bad_script("limb lengths and widths must be positive");
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (!(m[i].duration > 0) || m[i].start_t < 0) bad_script("segment " + std::to_string(i) + " has no duration");
    if (i > 0 && m[i].start_t < m[i - 1].start_t + m[i - 1].duration - 1e-9)
      bad_script("segments overlap or are unsorted at index " + std::to_string(i));
    if (m[i].kind == SegmentKind::bounce && (!(m[i].period > 0) || !(m[i].max_angle >= 0)))
      bad_script("bounce segment " + std::to_string(i) + " needs period > 0 and max_angle >= 0");
    if (m[i].kind == SegmentKind::sweep && !m[i].to_angle)
      bad_script("sweep segment " + std::to_string(i) + " needs to_angle");
  }

  // forward pass: fixed poses and continuation from the previous segment
  std::vector<std::optional<double>> start(m.size()), end(m.size());
  std::optional<double> prev_end;
  for (std::size_t i = 0; i < m.size(); ++i) {
    const MotionSegment& s = m[i];
    switch (s.kind) {
      case SegmentKind::bounce: {
        const double contact = contact_angle(s.drum_y);
        start[i] = contact - s.max_angle;
        end[i] = contact - s.max_angle * std::abs(std::cos(kPi * s.duration / s.period));
        break;
      }
      case SegmentKind::sweep:
        start[i] = s.from_angle ? s.from_angle : prev_end;
        end[i] = *s.to_angle;
        break;
      case SegmentKind::rest:
        start[i] = end[i] = s.angle ? s.angle : prev_end;
        break;
    }
    prev_end = end[i];
  }
  // backward pass: leading rests take the next segment's starting pose
  std::optional<double> next_start;
  for (std::size_t i = m.size(); i-- > 0;) {
    if (!start[i]) start[i] = next_start;
    if (!end[i]) end[i] = m[i].kind == SegmentKind::rest ? start[i] : end[i];
    if (start[i]) next_start = start[i];
  }
  for (std::size_t i = 0; i < m.size(); ++i)
    resolved_.push_back({start[i].value_or(kDefaultPose), end[i].value_or(start[i].value_or(kDefaultPose))});
}

Vec2 Performer::elbow() const {
  const double half = script_.arm_len / 2.0;
  return script_.shoulder + half * Vec2(std::cos(kUpperArmDrop) * direction_sign(), std::sin(kUpperArmDrop));
}

double Performer::contact_angle(double drum_y) const {
  const double s = (drum_y - elbow().y()) / reach();
  if (s < -1.0 || s > 1.0)
    throw Error(Errc::geometry_out_of_bounds, "drum_y " + std::to_string(drum_y) + " is out of the stick's reach");
  return std::asin(s);
}

double Performer::angle_at(double t) const {
  const auto& m = script_.motion;
  if (m.empty()) return kDefaultPose;
  if (t < m.front().start_t) return resolved_.front().start_angle;
  for (std::size_t i = 0; i < m.size(); ++i) {
    const MotionSegment& s = m[i];
    const double tau = t - s.start_t;
    if (tau >= s.duration) continue;
    if (tau < 0) return resolved_[i - 1].end_angle;  // gap before segment i
    switch (s.kind) {
      case SegmentKind::bounce:
        return contact_angle(s.drum_y) - s.max_angle * std::abs(std::cos(kPi * tau / s.period));
      case SegmentKind::sweep: {
        const double w = 0.5 * (1.0 - std::cos(kPi * tau / s.duration));
        return resolved_[i].start_angle + (resolved_[i].end_angle - resolved_[i].start_angle) * w;
      }
      case SegmentKind::rest:
        return resolved_[i].start_angle;
    }
  }
  return resolved_.back().end_angle;
}

Pose Performer::pose_at(double t) const {
  Pose p;
  p.angle = angle_at(t);
  p.shoulder = script_.shoulder;
  p.elbow = elbow();
  const Vec2 dir(std::cos(p.angle) * direction_sign(), std::sin(p.angle));
  p.wrist = p.elbow + (script_.arm_len / 2.0) * dir;
  p.tip = p.elbow + reach() * dir;
  return p;
}

std::vector<TruthStrike> Performer::contacts() const {
  std::vector<TruthStrike> out;
  for (const MotionSegment& s : script_.motion) {
    if (s.kind != SegmentKind::bounce || s.max_angle <= 0) continue;
    const double contact = contact_angle(s.drum_y);
    const Vec2 pos = elbow() + reach() * Vec2(std::cos(contact) * direction_sign(), std::sin(contact));
    for (int k = 0;; ++k) {
      const double tau = (k + 0.5) * s.period;
      if (tau >= s.duration) break;
      out.push_back({script_.side, static_cast<Micros>(std::llround((s.start_t + tau) * 1e6)), pos});
    }
  }
  return out;
}

namespace {

struct Extent {
  double min_x = 1e300, min_y = 1e300, max_x = -1e300, max_y = -1e300;
  void add(const Vec2& p, double r) {
    min_x = std::min(min_x, p.x() - r);
    min_y = std::min(min_y, p.y() - r);
    max_x = std::max(max_x, p.x() + r);
    max_y = std::max(max_y, p.y() + r);
  }
};

Extent pose_extent(const Pose& p, const PerformerScript& s) {
  Extent e;
  const double ra = s.arm_width / 2.0;
  e.add(p.shoulder, ra);
  e.add(p.elbow, ra);
  e.add(p.wrist, ra);
  const double rs = s.stick_width / 2.0;
  e.add(p.tip, rs);
  return e;
}

}  // namespace

void Performer::check_bounds(int width, int height) const {
  double last = 0.0;
  for (const MotionSegment& s : script_.motion) last = std::max(last, s.start_t + s.duration);
  for (double t = 0.0; t <= last + 1e-3; t += 1e-3) {
    const Extent e = pose_extent(pose_at(t), script_);
    if (e.min_x < 0 || e.min_y < 0 || e.max_x > width - 1 || e.max_y > height - 1) {
      std::ostringstream msg;
      msg << "side " << side_code(script_.side) << " leaves the " << width << "x" << height << " frame at t=" << t
          << " s";
      throw Error(Errc::geometry_out_of_bounds, msg.str());
    }
  }
}

namespace {

double segment_distance2(const Vec2& p, const Vec2& a, const Vec2& b) {
  const Vec2 ab = b - a;
  const double len2 = ab.squaredNorm();
  const double u = len2 > 0 ? std::clamp((p - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
  return (a + u * ab - p).squaredNorm();
}

void fill_capsule(Luma& img, const Vec2& a, const Vec2& b, double radius) {
  const int x0 = std::max(0, static_cast<int>(std::floor(std::min(a.x(), b.x()) - radius)));
  const int x1 = std::min<int>(img.cols() - 1, static_cast<int>(std::ceil(std::max(a.x(), b.x()) + radius)));
  const int y0 = std::max(0, static_cast<int>(std::floor(std::min(a.y(), b.y()) - radius)));
  const int y1 = std::min<int>(img.rows() - 1, static_cast<int>(std::ceil(std::max(a.y(), b.y()) + radius)));
  const double r2 = radius * radius;
  for (int y = y0; y <= y1; ++y)
    for (int x = x0; x <= x1; ++x)
      if (segment_distance2(Vec2(x, y), a, b) <= r2) img(y, x) = kSilhouetteLuma;
}

void fill_bar(Luma& img, const Vec2& a, const Vec2& b, double half_width) {
  const Vec2 axis = b - a;
  const double len = axis.norm();
  if (len <= 0) return;
  const Vec2 u = axis / len;
  const int x0 = std::max(0, static_cast<int>(std::floor(std::min(a.x(), b.x()) - half_width)));
  const int x1 = std::min<int>(img.cols() - 1, static_cast<int>(std::ceil(std::max(a.x(), b.x()) + half_width)));
  const int y0 = std::max(0, static_cast<int>(std::floor(std::min(a.y(), b.y()) - half_width)));
  const int y1 = std::min<int>(img.rows() - 1, static_cast<int>(std::ceil(std::max(a.y(), b.y()) + half_width)));
  for (int y = y0; y <= y1; ++y) {
    for (int x = x0; x <= x1; ++x) {
      const Vec2 d = Vec2(x, y) - a;
      const double along = d.dot(u);
      const double across = d.x() * u.y() - d.y() * u.x();
      if (along >= 0 && along <= len && std::abs(across) <= half_width) img(y, x) = kSilhouetteLuma;
    }
  }
}

}  // namespace

Frame render_frame(const std::vector<Performer>& performers, int width, int height, double t, double noise,
                   std::uint64_t seed, std::int64_t frame_index) {
  Frame f(width, height, 0, kBackgroundLuma);
  for (const Performer& p : performers) {
    const Pose pose = p.pose_at(t);
    const auto& s = p.script();
    fill_capsule(f.luma, pose.shoulder, pose.elbow, s.arm_width / 2.0);
    fill_capsule(f.luma, pose.elbow, pose.wrist, s.arm_width / 2.0);
    fill_bar(f.luma, pose.wrist, pose.tip, s.stick_width / 2.0);
  }
  if (noise > 0) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(frame_index), static_cast<std::uint32_t>(frame_index >> 32)};
    std::mt19937_64 rng(seq);
    std::normal_distribution<double> gauss(0.0, noise);
    for (Eigen::Index i = 0; i < f.luma.size(); ++i) {
      const double v = std::round(f.luma.data()[i] + gauss(rng));
      f.luma.data()[i] = static_cast<std::uint8_t>(std::clamp(v, 0.0, 255.0));
    }
  }
  return f;
}

Simulation simulate(const SimulationSpec& spec) {
  if (spec.width <= 0 || spec.height <= 0 || !(spec.fps > 0) || !(spec.duration >= 0) || !(spec.noise >= 0))
    throw Error(Errc::config_invalid, "simulation: width, height, fps must be positive; duration, noise >= 0");
  std::vector<Performer> performers;
  for (const PerformerScript& s : spec.scripts) {
    performers.emplace_back(s);
    performers.back().check_bounds(spec.width, spec.height);
  }

  Simulation sim;
  sim.frame_count = std::llround(spec.duration * spec.fps);
  const Micros end = static_cast<Micros>(std::llround(spec.duration * 1e6));
  for (const Performer& p : performers)
    for (const TruthStrike& s : p.contacts())
      if (s.t < end) sim.truth.strikes.push_back(s);
  std::stable_sort(sim.truth.strikes.begin(), sim.truth.strikes.end(), [](const TruthStrike& a, const TruthStrike& b) {
    return a.t != b.t ? a.t < b.t : side_index(a.side) < side_index(b.side);
  });

  const std::int64_t count = sim.frame_count;
  sim.frames = std::make_unique<GeneratedSource>(
      spec.width, spec.height, spec.fps,
      [performers = std::move(performers), spec, count](std::int64_t i) -> std::optional<Frame> {
        if (i >= count) return std::nullopt;
        Frame f = render_frame(performers, spec.width, spec.height, static_cast<double>(i) / spec.fps, spec.noise,
                               spec.seed, i);
        f.timestamp = synthesized_timestamp(i, spec.fps);
        return f;
      });
  return sim;
}

namespace {

MotionSegment segment_of(SegmentKind kind, double start, double duration) {
  MotionSegment s;
  s.kind = kind;
  s.start_t = start;
  s.duration = duration;
  return s;
}

MotionSegment rest(double start, double duration) { return segment_of(SegmentKind::rest, start, duration); }

MotionSegment bounce(double start, double duration, double drum_y, double period, double max_angle) {
  MotionSegment s = segment_of(SegmentKind::bounce, start, duration);
  s.drum_y = drum_y;
  s.period = period;
  s.max_angle = max_angle;
  return s;
}

MotionSegment sweep(double start, double duration, double to_angle) {
  MotionSegment s = segment_of(SegmentKind::sweep, start, duration);
  s.to_angle = to_angle;
  return s;
}

PerformerScript performer(Side side, std::vector<MotionSegment> motion) {
  PerformerScript p;
  p.side = side;
  p.shoulder = side == Side::Left ? Vec2(40, 90) : Vec2(279, 90);
  p.motion = std::move(motion);
  return p;
}

}  // namespace

SimulationSpec default_bounce_spec() {
  SimulationSpec spec;
  spec.duration = 5.0;
  PerformerScript left = performer(Side::Left, {});
  PerformerScript right = performer(Side::Right, {});
  // sweeps end where the following bounce starts so the pose never jumps
  auto bounce_entry = [](const PerformerScript& p, double drum_y, double max_angle) {
    return Performer(p).contact_angle(drum_y) - max_angle;
  };
  left.motion = {rest(0.0, 0.5), bounce(0.5, 2.0, 165, 0.25, 0.45), sweep(2.5, 0.8, bounce_entry(left, 160, 0.4)),
                 bounce(3.3, 1.2, 160, 0.3, 0.4), rest(4.5, 0.5)};
  right.motion = {rest(0.0, 1.0), bounce(1.0, 2.4, 162, 0.3, 0.45), sweep(3.4, 0.4, bounce_entry(right, 168, 0.35)),
                  bounce(3.8, 1.0, 168, 0.2, 0.35), rest(4.8, 0.2)};
  spec.scripts = {left, right};
  return spec;
}

SimulationSpec dense_roll_spec(double per_side_hz, double seconds) {
  SimulationSpec spec;
  const double period = 1.0 / per_side_hz;
  spec.duration = seconds + 1.0;
  spec.scripts.push_back(performer(Side::Left, {rest(0.0, 0.5), bounce(0.5, seconds, 165, period, 0.3)}));
  spec.scripts.push_back(
      performer(Side::Right, {rest(0.0, 0.5 + period / 2), bounce(0.5 + period / 2, seconds, 165, period, 0.3)}));
  return spec;
}

SimulationSpec single_roll_spec(Side side, double hz, double seconds) {
  SimulationSpec spec;
  spec.duration = seconds + 1.0;
  spec.scripts.push_back(performer(side, {rest(0.0, 0.5), bounce(0.5, seconds, 165, 1.0 / hz, 0.3)}));
  return spec;
}

namespace {

using nlohmann::json;

double number(const json& j, const char* key, double fallback, const std::string& where) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_number()) bad_script(where + "." + key + " must be a number");
  return j[key].get<double>();
}

std::optional<double> maybe_number(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) return std::nullopt;
  if (!j[key].is_number()) bad_script(where + "." + key + " must be a number");
  return j[key].get<double>();
}

MotionSegment parse_segment(const json& j, const std::string& where) {
  if (!j.is_object()) bad_script(where + " must be an object");
  MotionSegment s;
  const std::string kind = j.value("kind", "");
  if (kind == "rest") s.kind = SegmentKind::rest;
  else if (kind == "bounce") s.kind = SegmentKind::bounce;
  else if (kind == "sweep") s.kind = SegmentKind::sweep;
  else bad_script(where + ".kind must be rest, bounce or sweep");
  // bounce parameters may sit at top level or under "params"
  const json& p = j.contains("params") && j["params"].is_object() ? j["params"] : j;
  s.start_t = number(j, "start_t", 0.0, where);
  s.duration = number(j, "duration", 0.0, where);
  s.drum_y = number(p, "drum_y", 0.0, where);
  s.period = number(p, "period", s.period, where);
  s.max_angle = number(p, "max_angle", s.max_angle, where);
  s.angle = maybe_number(p, "angle", where);
  s.from_angle = maybe_number(p, "from_angle", where);
  s.to_angle = maybe_number(p, "to_angle", where);
  if (s.kind == SegmentKind::bounce && !p.contains("drum_y")) bad_script(where + " bounce needs drum_y");
  return s;
}

PerformerScript parse_performer(const json& j, const std::string& where) {
  if (!j.is_object()) bad_script(where + " must be an object");
  PerformerScript p;
  const std::string side = j.value("side", "");
  if (side == "L") p.side = Side::Left;
  else if (side == "R") p.side = Side::Right;
  else bad_script(where + ".side must be \"L\" or \"R\"");
  if (!j.contains("shoulder") || !j["shoulder"].is_array() || j["shoulder"].size() != 2 ||
      !j["shoulder"][0].is_number() || !j["shoulder"][1].is_number())
    bad_script(where + ".shoulder must be [x, y]");
  p.shoulder = Vec2(j["shoulder"][0].get<double>(), j["shoulder"][1].get<double>());
  p.arm_len = number(j, "arm_len", p.arm_len, where);
  p.stick_len = number(j, "stick_len", p.stick_len, where);
  p.stick_width = number(j, "stick_width", p.stick_width, where);
  p.arm_width = number(j, "arm_width", p.arm_width, where);
  if (j.contains("motion")) {
    if (!j["motion"].is_array()) bad_script(where + ".motion must be an array");
    for (std::size_t i = 0; i < j["motion"].size(); ++i)
      p.motion.push_back(parse_segment(j["motion"][i], where + ".motion[" + std::to_string(i) + "]"));
  }
  return p;
}

}  // namespace

SimulationSpec parse_simulation(const std::string& json_text, const SimulationSpec& defaults) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    bad_script(e.what());
  }
  SimulationSpec spec = defaults;
  spec.scripts.clear();
  const json* performers = nullptr;
  if (doc.is_array()) {
    performers = &doc;
  } else if (doc.is_object() && doc.contains("performers")) {
    performers = &doc["performers"];
    spec.width = static_cast<int>(number(doc, "width", spec.width, "script"));
    spec.height = static_cast<int>(number(doc, "height", spec.height, "script"));
    spec.fps = number(doc, "fps", spec.fps, "script");
    spec.duration = number(doc, "duration", spec.duration, "script");
    spec.noise = number(doc, "noise", spec.noise, "script");
    if (doc.contains("seed")) {
      if (!doc["seed"].is_number_unsigned()) bad_script("seed must be a non-negative integer");
      spec.seed = doc["seed"].get<std::uint64_t>();
    }
  } else if (doc.is_object()) {
    spec.scripts.push_back(parse_performer(doc, "script"));
    return spec;
  } else {
    bad_script("expected an object or an array");
  }
  if (!performers->is_array() || performers->empty() || performers->size() > 2)
    bad_script("performers must be an array of one or two scripts");
  for (std::size_t i = 0; i < performers->size(); ++i)
    spec.scripts.push_back(parse_performer((*performers)[i], "performers[" + std::to_string(i) + "]"));
  return spec;
}

SimulationSpec load_simulation(const std::filesystem::path& path, const SimulationSpec& defaults) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::config_invalid, "script: cannot read " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_simulation(buf.str(), defaults);
}

}  // namespace percuss
