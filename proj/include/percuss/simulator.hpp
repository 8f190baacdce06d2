#pragma once

#include "percuss/frame_io.hpp"
#include "percuss/types.hpp"

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace percuss {

enum class SegmentKind { rest, bounce, sweep };

/// A timed piece of a performer's motion. Pose angles are the forearm+stick
/// direction in radians below horizontal, pointing toward the frame centre.
struct MotionSegment {
  SegmentKind kind = SegmentKind::rest;
  double start_t = 0.0;   // s
  double duration = 0.0;  // s
  // bounce: the tip meets drum_y whenever the lift max_angle*|cos(pi*tau/period)| is zero
  double drum_y = 0.0;
  double period = 0.25;
  double max_angle = 0.4;
  // rest: held pose; sweep: raised-cosine move between poses. Unset values
  // continue from the neighbouring segment.
  std::optional<double> angle;
  std::optional<double> from_angle;
  std::optional<double> to_angle;
};

struct PerformerScript {
  Side side = Side::Left;
  Vec2 shoulder = Vec2::Zero();
  double arm_len = 60.0;   // shoulder to wrist, split evenly at the elbow
  double stick_len = 55.0;
  double stick_width = 3.0;
  double arm_width = 10.0;
  std::vector<MotionSegment> motion;
};

struct TruthStrike {
  Side side = Side::Left;
  Micros t = 0;
  Vec2 pos = Vec2::Zero();
};

struct GroundTruth {
  std::vector<TruthStrike> strikes;  // sorted by t
};

struct SimulationSpec {
  std::vector<PerformerScript> scripts;
  int width = 320;
  int height = 240;
  double fps = 60.0;
  double duration = 5.0;  // s
  double noise = 4.0;     // luma stddev
  std::uint64_t seed = 1;
};

inline constexpr std::uint8_t kBackgroundLuma = 230;
inline constexpr std::uint8_t kSilhouetteLuma = 15;

/// Joint positions of one performer at time t.
struct Pose {
  Vec2 shoulder, elbow, wrist, tip;
  double angle;  // forearm+stick direction below horizontal
};

class Performer {
 public:
  /// Validates segment ordering and bounce reachability; throws
  /// Errc::geometry_out_of_bounds.
  explicit Performer(PerformerScript script);

  Pose pose_at(double t) const;
  /// Contacts with downward velocity inside bounce segments, sorted.
  std::vector<TruthStrike> contacts() const;
  const PerformerScript& script() const { return script_; }

  /// Pose angle at which the tip sits exactly on `drum_y`.
  double contact_angle(double drum_y) const;

  /// Throws Errc::geometry_out_of_bounds unless every reachable pose lies
  /// inside a width x height frame.
  void check_bounds(int width, int height) const;

 private:
  double angle_at(double t) const;
  Vec2 elbow() const;
  double reach() const { return script_.arm_len / 2.0 + script_.stick_len; }
  double direction_sign() const { return script_.side == Side::Left ? 1.0 : -1.0; }

  struct Resolved {
    double start_angle;
    double end_angle;
  };

  PerformerScript script_;
  std::vector<Resolved> resolved_;
};

/// Noise-free render of all performers at time t, then Gaussian noise (stddev
/// `noise`, seeded by (seed, frame_index)) clamped to [0, 255].
Frame render_frame(const std::vector<Performer>& performers, int width, int height, double t, double noise,
                   std::uint64_t seed, std::int64_t frame_index);

struct Simulation {
  std::unique_ptr<FrameSource> frames;
  GroundTruth truth;
  std::int64_t frame_count = 0;
};

/// Frames are generated lazily; `frames` owns copies of the performers.
Simulation simulate(const SimulationSpec& spec);

/// The stock two-performer bounce performance (>= 16 contacts).
SimulationSpec default_bounce_spec();
/// Both performers rolling at `per_side_hz`, the right offset by half a period.
SimulationSpec dense_roll_spec(double per_side_hz = 6.0, double seconds = 3.0);
/// One performer rolling at `hz`.
SimulationSpec single_roll_spec(Side side, double hz, double seconds = 3.0);

/// Accepts a full document {"performers": [...], "width": ..}, an array of
/// performer scripts, or a single script object. Throws Errc::config_invalid.
SimulationSpec parse_simulation(const std::string& json_text, const SimulationSpec& defaults = {});
SimulationSpec load_simulation(const std::filesystem::path& path, const SimulationSpec& defaults = {});

}  // namespace percuss
