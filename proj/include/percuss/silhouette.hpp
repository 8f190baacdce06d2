#pragma once

#include "percuss/frame_io.hpp"
#include "percuss/types.hpp"

#include <optional>
#include <string_view>
#include <vector>

namespace percuss {

/// Foreground flags, same shape as the source frame.
using BinaryMask = Raster<bool>;

enum class Polarity { dark_foreground, bright_foreground };
enum class Connectivity { four = 4, eight = 8 };

std::optional<Polarity> parse_polarity(std::string_view name);
std::string_view polarity_name(Polarity p);

/// Horizontal run of member pixels [x0, x1] on row y.
struct Span {
  int y;
  int x0;
  int x1;
  int length() const { return x1 - x0 + 1; }
};

struct BBox {
  int min_x, min_y, max_x, max_y;
  bool contains(double x, double y) const { return x >= min_x && x <= max_x && y >= min_y && y <= max_y; }
};

struct Blob {
  int label = 0;
  long area = 0;
  BBox bbox{};
  Vec2 centroid = Vec2::Zero();
  std::vector<Span> rows;  // sorted by (y, x0)

  bool contains(int x, int y) const;
};

/// Strict inequality on both polarities: luma == threshold is background.
BinaryMask segment(const Frame& frame, int threshold, Polarity polarity);

/// 3x3 cross erosion then dilation, `open_iterations` times. Pixels outside
/// the raster count as background.
BinaryMask erode(const BinaryMask& mask);
BinaryMask dilate(const BinaryMask& mask);
BinaryMask denoise(const BinaryMask& mask, int open_iterations);

/// Labels assigned in raster order of each blob's first pixel, starting at 1.
std::vector<Blob> connected_components(const BinaryMask& mask, Connectivity connectivity);

std::vector<Blob> filter_blobs(std::vector<Blob> blobs, long min_area);

}  // namespace percuss
