#include "percuss/silhouette.hpp"

#include <algorithm>
#include <numeric>

namespace percuss {

std::optional<Polarity> parse_polarity(std::string_view name) {
  if (name == "dark-foreground" || name == "dark") return Polarity::dark_foreground;
  if (name == "bright-foreground" || name == "bright") return Polarity::bright_foreground;
  return std::nullopt;
}

std::string_view polarity_name(Polarity p) {
  return p == Polarity::dark_foreground ? "dark-foreground" : "bright-foreground";
}

bool Blob::contains(int x, int y) const {
  if (!bbox.contains(x, y)) return false;
  auto it = std::lower_bound(rows.begin(), rows.end(), y, [](const Span& s, int yy) { return s.y < yy; });
  for (; it != rows.end() && it->y == y; ++it)
    if (x >= it->x0 && x <= it->x1) return true;
  return false;
}

BinaryMask segment(const Frame& frame, int threshold, Polarity polarity) {
  const auto luma = frame.luma.cast<int>();
  return polarity == Polarity::dark_foreground ? BinaryMask(luma < threshold) : BinaryMask(luma > threshold);
}

BinaryMask erode(const BinaryMask& m) {
  const Eigen::Index h = m.rows(), w = m.cols();
  BinaryMask out = m;
  if (h < 3 || w < 3) return BinaryMask::Constant(h, w, false);
  out.bottomRows(h - 1) = out.bottomRows(h - 1) && m.topRows(h - 1);
  out.topRows(h - 1) = out.topRows(h - 1) && m.bottomRows(h - 1);
  out.rightCols(w - 1) = out.rightCols(w - 1) && m.leftCols(w - 1);
  out.leftCols(w - 1) = out.leftCols(w - 1) && m.rightCols(w - 1);
  out.row(0).setConstant(false);
  out.row(h - 1).setConstant(false);
  out.col(0).setConstant(false);
  out.col(w - 1).setConstant(false);
  return out;
}

BinaryMask dilate(const BinaryMask& m) {
  const Eigen::Index h = m.rows(), w = m.cols();
  BinaryMask out = m;
  if (h > 1) {
    out.bottomRows(h - 1) = out.bottomRows(h - 1) || m.topRows(h - 1);
    out.topRows(h - 1) = out.topRows(h - 1) || m.bottomRows(h - 1);
  }
  if (w > 1) {
    out.rightCols(w - 1) = out.rightCols(w - 1) || m.leftCols(w - 1);
    out.leftCols(w - 1) = out.leftCols(w - 1) || m.rightCols(w - 1);
  }
  return out;
}

BinaryMask denoise(const BinaryMask& mask, int open_iterations) {
  BinaryMask out = mask;
  for (int i = 0; i < open_iterations; ++i) out = dilate(erode(out));
  return out;
}

namespace {

struct DisjointSet {
  std::vector<int> parent;

  int add() {
    parent.push_back(static_cast<int>(parent.size()));
    return parent.back();
  }
  int find(int i) {
    while (parent[i] != i) {
      parent[i] = parent[parent[i]];
      i = parent[i];
    }
    return i;
  }
  // the smaller index stays root so the root is the raster-first run
  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (b < a) std::swap(a, b);
    parent[b] = a;
  }
};

}  // namespace

std::vector<Blob> connected_components(const BinaryMask& mask, Connectivity connectivity) {
  const int h = static_cast<int>(mask.rows());
  const int w = static_cast<int>(mask.cols());
  const int reach = connectivity == Connectivity::eight ? 1 : 0;

  std::vector<Span> runs;
  DisjointSet sets;
  std::size_t prev_begin = 0, prev_end = 0;
  for (int y = 0; y < h; ++y) {
    const std::size_t row_begin = runs.size();
    for (int x = 0; x < w;) {
      if (!mask(y, x)) {
        ++x;
        continue;
      }
      const int x0 = x;
      while (x < w && mask(y, x)) ++x;
      runs.push_back({y, x0, x - 1});
      const int id = sets.add();
      for (std::size_t j = prev_begin; j < prev_end; ++j) {
        const Span& p = runs[j];
        if (p.x1 + reach < x0) continue;
        if (p.x0 - reach > x - 1) break;
        sets.unite(id, static_cast<int>(j));
      }
    }
    prev_begin = row_begin;
    prev_end = runs.size();
  }

  std::vector<int> label_of_root(runs.size(), 0);
  std::vector<Blob> blobs;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const int root = sets.find(static_cast<int>(i));
    if (label_of_root[root] == 0) {
      blobs.push_back({});
      Blob& b = blobs.back();
      b.label = static_cast<int>(blobs.size());
      b.bbox = {runs[i].x0, runs[i].y, runs[i].x1, runs[i].y};
      label_of_root[root] = b.label;
    }
    Blob& b = blobs[label_of_root[root] - 1];
    const Span& s = runs[i];
    b.rows.push_back(s);
    b.area += s.length();
    b.centroid += Vec2(0.5 * (s.x0 + s.x1) * s.length(), static_cast<double>(s.y) * s.length());
    b.bbox.min_x = std::min(b.bbox.min_x, s.x0);
    b.bbox.max_x = std::max(b.bbox.max_x, s.x1);
    b.bbox.max_y = std::max(b.bbox.max_y, s.y);
  }
  for (Blob& b : blobs) b.centroid /= static_cast<double>(b.area);
  return blobs;
}

std::vector<Blob> filter_blobs(std::vector<Blob> blobs, long min_area) {
  std::erase_if(blobs, [min_area](const Blob& b) { return b.area < min_area; });
  return blobs;
}

}  // namespace percuss
