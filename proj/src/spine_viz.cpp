#include "percuss/spine_viz.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <unordered_map>

namespace percuss {

namespace {

// Counterclockwise on screen (y down): W, SW, S, SE, E, NE, N, NW.
constexpr std::array<std::array<int, 2>, 8> kRing = {{{-1, 0}, {-1, 1}, {0, 1}, {1, 1}, {1, 0}, {1, -1}, {0, -1}, {-1, -1}}};

int ring_index(int dx, int dy) {
  for (int i = 0; i < 8; ++i)
    if (kRing[i][0] == dx && kRing[i][1] == dy) return i;
  return -1;
}

}  // namespace

bool Contour::member(int x, int y) const {
  const int lx = x - bbox.min_x + 1;
  const int ly = y - bbox.min_y + 1;
  if (lx < 0 || ly < 0 || ly >= membership.rows() || lx >= membership.cols()) return false;
  return membership(ly, lx);
}

Contour trace_contour(const Blob& blob, const BinaryMask& mask) {
  Contour c;
  c.centroid = blob.centroid;
  c.bbox = blob.bbox;
  if (blob.rows.empty()) return c;
  if (blob.bbox.max_x >= mask.cols() || blob.bbox.max_y >= mask.rows())
    throw std::invalid_argument("blob does not belong to this mask");

  c.membership = Raster<bool>::Constant(blob.bbox.max_y - blob.bbox.min_y + 3, blob.bbox.max_x - blob.bbox.min_x + 3,
                                        false);
  for (const Span& s : blob.rows)
    c.membership.row(s.y - blob.bbox.min_y + 1).segment(s.x0 - blob.bbox.min_x + 1, s.length()).setConstant(true);

  const Pixel start(blob.rows.front().x0, blob.rows.front().y);
  c.points.push_back(start);

  // One Moore step: scan counterclockwise from the backtrack direction.
  // Returns false when the pixel has no member neighbours.
  auto step = [&c](const Pixel& cur, int back, Pixel& next, int& next_back) {
    for (int i = 1; i <= 8; ++i) {
      const int d = (back + i) % 8;
      const Pixel p(cur.x() + kRing[d][0], cur.y() + kRing[d][1]);
      if (!c.member(p.x(), p.y())) continue;
      const int prev_d = (back + i - 1) % 8;
      const Pixel q(cur.x() + kRing[prev_d][0], cur.y() + kRing[prev_d][1]);
      next = p;
      next_back = ring_index(q.x() - p.x(), q.y() - p.y());
      return true;
    }
    return false;
  };

  Pixel first_move;
  int back = 0;  // the raster-first pixel always has background to its west
  int next_back = 0;
  if (!step(start, back, first_move, next_back)) return c;

  Pixel cur = first_move;
  back = next_back;
  // stop once the first move (start -> first_move) is about to repeat
  const std::size_t limit = 4 * static_cast<std::size_t>(blob.area) + 8;
  while (c.points.size() <= limit) {
    if (cur == start) {
      Pixel next;
      int nb = 0;
      step(cur, back, next, nb);
      if (next == first_move) break;
      c.points.push_back(cur);
      cur = next;
      back = nb;
      continue;
    }
    c.points.push_back(cur);
    Pixel next;
    int nb = 0;
    step(cur, back, next, nb);
    cur = next;
    back = nb;
  }
  return c;
}

PointMotion point_motion(const Contour& prev, const Contour& curr, const std::vector<double>& prev_speeds,
                         double dt, double match_radius) {
  PointMotion out;
  out.speed.assign(curr.size(), 0.0);
  out.accel.assign(curr.size(), 0.0);
  if (prev.points.empty() || !(dt > 0.0)) return out;

  // bucket the previous contour on a grid of match_radius cells
  const double cell = std::max(1.0, match_radius);
  auto key = [cell](double x, double y) {
    const auto cx = static_cast<std::int64_t>(std::floor(x / cell));
    const auto cy = static_cast<std::int64_t>(std::floor(y / cell));
    return (cx << 32) ^ (cy & 0xffffffff);
  };
  std::unordered_map<std::int64_t, std::vector<std::size_t>> grid;
  for (std::size_t j = 0; j < prev.points.size(); ++j)
    grid[key(prev.points[j].x(), prev.points[j].y())].push_back(j);

  const double r2 = match_radius * match_radius;
  for (std::size_t i = 0; i < curr.points.size(); ++i) {
    const Vec2 p = curr.points[i].cast<double>();
    double best = std::numeric_limits<double>::infinity();
    std::size_t best_j = 0;
    for (int oy = -1; oy <= 1; ++oy) {
      for (int ox = -1; ox <= 1; ++ox) {
        auto it = grid.find(key(p.x() + ox * cell, p.y() + oy * cell));
        if (it == grid.end()) continue;
        for (std::size_t j : it->second) {
          const double d2 = (prev.points[j].cast<double>() - p).squaredNorm();
          if (d2 < best || (d2 == best && j < best_j)) {
            best = d2;
            best_j = j;
          }
        }
      }
    }
    if (best > r2) continue;
    const double speed = std::sqrt(best) / dt;
    const double before = best_j < prev_speeds.size() ? prev_speeds[best_j] : 0.0;
    out.speed[i] = speed;
    out.accel[i] = std::abs(speed - before) / dt;
  }
  return out;
}

Vec2 outward_normal(const Contour& contour, std::size_t i) {
  const auto& pts = contour.points;
  const std::size_t n = pts.size();
  const Pixel& p = pts[i];

  Vec2 background = Vec2::Zero();
  for (const auto& d : kRing)
    if (!contour.member(p.x() + d[0], p.y() + d[1])) background += Vec2(d[0], d[1]).normalized();

  const Vec2 radial = p.cast<double>() - contour.centroid;
  Vec2 tangent = Vec2::Zero();
  if (n >= 3) tangent = (pts[(i + 1) % n] - pts[(i + n - 1) % n]).cast<double>();

  if (tangent.squaredNorm() > 0.0) {
    // counterclockwise on screen puts the exterior at (-ty, tx)
    Vec2 normal = Vec2(-tangent.y(), tangent.x()).normalized();
    double score = normal.dot(background);
    if (std::abs(score) < 1e-9) score = normal.dot(radial);
    return score < 0.0 ? Vec2(-normal) : normal;
  }
  if (background.squaredNorm() > 1e-12) return background.normalized();
  if (radial.squaredNorm() > 1e-12) return radial.normalized();
  return Vec2(1.0, 0.0);
}

SpineField compute_spines(const Contour& contour, const std::vector<double>& accels, double gain, double max_len,
                          int stride) {
  SpineField field;
  const std::size_t step = static_cast<std::size_t>(std::max(1, stride));
  for (std::size_t i = 0; i < contour.size() && i < accels.size(); i += step) {
    const double len = std::min(max_len, gain * accels[i]);
    if (!(len >= 0.5)) continue;
    field.spines.push_back({contour.points[i].cast<double>(), outward_normal(contour, i), len});
  }
  return field;
}

}  // namespace percuss
