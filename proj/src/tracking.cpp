#include "percuss/tracking.hpp"

#include <algorithm>
#include <stdexcept>

namespace percuss {

std::pair<TipSample, TipSample> extract_tips(const std::vector<Blob>& blobs, const SideAssignment& assignment,
                                             Micros t) {
  TipSample left{Side::Left, t, Vec2::Zero(), false};
  TipSample right{Side::Right, t, Vec2::Zero(), false};
  const int split = assignment.split_x;
  int lx = 0, ly = 0, rx = 0, ry = 0;

  for (const Blob& b : blobs) {
    if (b.centroid.x() < split) {
      for (const Span& s : b.rows) {
        if (s.x0 > split) continue;
        const int x = std::min(s.x1, split);
        if (!left.present || x > lx || (x == lx && s.y < ly)) {
          lx = x;
          ly = s.y;
          left.present = true;
        }
      }
    } else {
      for (const Span& s : b.rows) {
        if (s.x1 < split) continue;
        const int x = std::max(s.x0, split);
        if (!right.present || x < rx || (x == rx && s.y < ry)) {
          rx = x;
          ry = s.y;
          right.present = true;
        }
      }
    }
  }
  if (left.present) left.pos = Vec2(lx, ly);
  if (right.present) right.pos = Vec2(rx, ry);
  return {left, right};
}

KinematicState update_kinematics(const KinematicState& state, const TipSample& sample,
                                 const KinematicsConfig& cfg) {
  if (sample.side != state.side) throw std::invalid_argument("tip sample side does not match state side");
  if (state.started && sample.t <= state.t)
    throw Error(Errc::non_monotone_timestamp,
                "sample t=" + std::to_string(sample.t) + " after state t=" + std::to_string(state.t));

  KinematicState next = state;
  next.started = true;
  next.t = sample.t;

  if (!sample.present) {
    if (!next.initialized()) return next;
    ++next.dropout_frames;
    if (next.dropout_frames > cfg.dropout_reset) {
      next.present_run = 0;
      next.vel.reset();
      next.acc.reset();
      next.acc_mag = 0.0;
    } else if (next.dropout_frames > cfg.dropout_hold && next.acc) {
      next.acc = Vec2::Zero();
      next.acc_mag = 0.0;
    }
    return next;
  }

  if (!next.initialized()) {
    next.pos = sample.pos;
    next.vel.reset();
    next.acc.reset();
    next.acc_mag = 0.0;
  } else {
    const double dt = static_cast<double>(sample.t - state.last_present_t) * 1e-6;
    const Vec2 pos = cfg.ema_alpha * sample.pos + (1.0 - cfg.ema_alpha) * state.pos;
    const Vec2 vel = (pos - state.pos) / dt;
    if (state.vel && state.dropout_frames <= cfg.dropout_hold) {
      next.acc = (vel - *state.vel) / dt;
      next.acc_mag = next.acc->norm();
    } else {
      next.acc.reset();
      next.acc_mag = 0.0;
    }
    next.pos = pos;
    next.vel = vel;
  }
  ++next.present_run;
  next.dropout_frames = 0;
  next.last_present_t = sample.t;
  return next;
}

}  // namespace percuss
