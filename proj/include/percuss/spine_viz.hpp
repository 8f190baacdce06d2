#pragma once

#include "percuss/silhouette.hpp"
#include "percuss/types.hpp"

#include <Eigen/Core>

#include <vector>

namespace percuss {

using Pixel = Eigen::Vector2i;

/// Closed outer boundary of a blob, counterclockwise as displayed (y down):
/// from the raster-first pixel the trace runs down the left flank first.
struct Contour {
  std::vector<Pixel> points;
  Vec2 centroid = Vec2::Zero();  // of the traced blob
  BBox bbox{};
  // blob membership over bbox grown by 1, used for normal orientation
  Raster<bool> membership;

  bool member(int x, int y) const;
  std::size_t size() const { return points.size(); }
};

/// Moore-neighbour tracing with Jacob's stopping criterion over the blob's own
/// pixels (other blobs in `mask` are ignored).
Contour trace_contour(const Blob& blob, const BinaryMask& mask);

struct PointMotion {
  std::vector<double> speed;  // px/s, feeds the next call as prev_speeds
  std::vector<double> accel;  // px/s^2
};

/// Nearest-point correspondence from `curr` onto `prev`. Points farther than
/// `match_radius` are unmatched and get speed and accel 0. An empty
/// `prev_speeds` counts as all-zero.
PointMotion point_motion(const Contour& prev, const Contour& curr, const std::vector<double>& prev_speeds,
                         double dt, double match_radius = 12.0);

struct Spine {
  Vec2 origin;
  Vec2 dir;  // unit outward normal
  double len;
};

struct SpineField {
  Micros frame_t = 0;
  Side side = Side::Left;
  std::vector<Spine> spines;
};

struct SpineConfig {
  double gain = 0.002;   // display px per (px/s^2)
  double max_len = 40.0;
  int stride = 4;
  double match_radius = 12.0;
  bool broadcast_tip_accel = false;
};

/// Outward normal at contour point `i`, from the perpendicular of the central
/// difference, oriented into background.
Vec2 outward_normal(const Contour& contour, std::size_t i);

SpineField compute_spines(const Contour& contour, const std::vector<double>& accels, double gain, double max_len,
                          int stride);

}  // namespace percuss
