#pragma once

#include "percuss/silhouette.hpp"
#include "percuss/types.hpp"

#include <optional>
#include <utility>

namespace percuss {

/// Column splitting the frame into left-performer and right-performer halves.
struct SideAssignment {
  int split_x = 0;

  static SideAssignment center(int frame_width) { return {frame_width / 2}; }
  bool valid_for(int frame_width) const { return split_x > 0 && split_x < frame_width; }
};

struct TipSample {
  Side side = Side::Left;
  Micros t = 0;
  Vec2 pos = Vec2::Zero();
  bool present = false;
};

/// Left tip: rightmost pixel (x <= split_x) of blobs with centroid.x < split_x.
/// Right tip: leftmost pixel (x >= split_x) of blobs with centroid.x >= split_x.
/// Ties on x go to the topmost pixel.
std::pair<TipSample, TipSample> extract_tips(const std::vector<Blob>& blobs, const SideAssignment& assignment,
                                             Micros t = 0);

struct KinematicsConfig {
  double ema_alpha = 0.5;  // (0, 1]
  int dropout_hold = 2;    // frames before acceleration is zeroed
  int dropout_reset = 10;  // frames before the state forgets its history
};

struct KinematicState {
  Side side = Side::Left;
  Vec2 pos = Vec2::Zero();  // smoothed
  std::optional<Vec2> vel;  // px/s
  std::optional<Vec2> acc;  // px/s^2
  double acc_mag = 0.0;
  Micros t = 0;
  int dropout_frames = 0;

  // bookkeeping for the backward differences
  bool started = false;  // any sample seen, present or not
  int present_run = 0;  // present samples since the last reset
  Micros last_present_t = 0;

  explicit KinematicState(Side s = Side::Left) : side(s) {}

  bool initialized() const { return present_run > 0; }
};

/// EMA-smoothed position, then backward differences over the actual time step.
/// Throws Errc::non_monotone_timestamp when sample.t <= state.t on a state
/// that has seen samples.
KinematicState update_kinematics(const KinematicState& state, const TipSample& sample,
                                 const KinematicsConfig& cfg);

}  // namespace percuss
