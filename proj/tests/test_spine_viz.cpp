#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "percuss/spine_viz.hpp"
#include "support/oracles.hpp"

#include <random>

using namespace percuss;

namespace {

struct Traced {
  BinaryMask mask;
  Blob blob;
  Contour contour;
};

Traced square(int w, int h, int x0, int y0, int side) {
  Traced t;
  t.mask = BinaryMask::Constant(h, w, false);
  t.mask.block(y0, x0, side, side) = true;
  t.blob = connected_components(t.mask, Connectivity::eight).at(0);
  t.contour = trace_contour(t.blob, t.mask);
  return t;
}

oracle::PixelSet point_set(const Contour& c) {
  oracle::PixelSet s;
  for (const Pixel& p : c.points) s.insert({p.x(), p.y()});
  return s;
}

/// Twice the signed area in screen coordinates (y down).
double shoelace(const Contour& c) {
  double a = 0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    const Pixel& p = c.points[i];
    const Pixel& q = c.points[(i + 1) % c.size()];
    a += static_cast<double>(p.x()) * q.y() - static_cast<double>(q.x()) * p.y();
  }
  return a;
}

}  // namespace

TEST_CASE("trace examples") {
  Traced one = square(5, 5, 2, 2, 1);
  CHECK(one.contour.size() == 1);
  Traced three = square(7, 7, 2, 2, 3);
  CHECK(three.contour.size() == 8);
  CHECK_FALSE(point_set(three.contour).count({3, 3}));
  CHECK(three.contour.points.front() == Pixel(2, 2));
  // counterclockwise on screen: down the left flank first
  CHECK(three.contour.points[1] == Pixel(2, 3));
  CHECK(shoelace(three.contour) < 0);
}

TEST_CASE("thin shapes revisit pixels and still close") {
  BinaryMask m = oracle::mask_from({
      ".....",
      ".###.",
      "..#..",
      "..#..",
      ".....",
  });
  auto blobs = connected_components(m, Connectivity::eight);
  Contour c = trace_contour(blobs.at(0), m);
  CHECK(point_set(c) == oracle::boundary_scan(oracle::pixels_of(blobs[0])));
  // the stem is walked down and back up
  CHECK(c.size() == 6);
}

TEST_CASE("other blobs in the mask are ignored") {
  BinaryMask m = oracle::mask_from({
      "##.##",
      "##.##",
  });
  auto blobs = connected_components(m, Connectivity::four);
  REQUIRE(blobs.size() == 2);
  Contour c = trace_contour(blobs[1], m);
  for (const Pixel& p : c.points) CHECK(p.x() >= 3);
}

TEST_CASE("trace visits exactly the boundary pixels of random blobs (property)") {
  std::mt19937 rng(31);
  int traced = 0;
  for (int trial = 0; trial < 400; ++trial) {
    std::uniform_int_distribution<int> dim(1, 16);
    const int w = dim(rng), h = dim(rng);
    BinaryMask m = oracle::random_mask(rng, w, h, 0.6);
    auto blobs = connected_components(m, Connectivity::eight);
    if (blobs.empty()) continue;
    const auto biggest = *std::max_element(blobs.begin(), blobs.end(),
                                           [](const Blob& a, const Blob& b) { return a.area < b.area; });
    // single blob, holes filled: its outer boundary is its whole boundary
    BinaryMask only = BinaryMask::Constant(h, w, false);
    for (auto [x, y] : oracle::pixels_of(biggest)) only(y, x) = true;
    only = oracle::fill_holes(only);
    auto solo = connected_components(only, Connectivity::eight);
    REQUIRE(solo.size() == 1);
    Contour c = trace_contour(solo[0], only);
    CHECK(point_set(c) == oracle::boundary_scan(oracle::pixels_of(solo[0])));
    CHECK(c.points.front() == Pixel(solo[0].rows.front().x0, solo[0].rows.front().y));
    for (std::size_t i = 1; i < c.size(); ++i) {
      const Pixel d = c.points[i] - c.points[i - 1];
      CHECK(std::max(std::abs(d.x()), std::abs(d.y())) == 1);
    }
    ++traced;
  }
  CHECK(traced > 300);
}

TEST_CASE("square normals point outward for every contour point (translated suite)") {
  for (int side : {2, 3, 4, 7, 12}) {
    for (int x0 : {1, 5, 13}) {
      for (int y0 : {1, 4, 9}) {
        Traced t = square(32, 32, x0, y0, side);
        const Vec2 centre(x0 + (side - 1) / 2.0, y0 + (side - 1) / 2.0);
        for (std::size_t i = 0; i < t.contour.size(); ++i) {
          const Vec2 p = t.contour.points[i].cast<double>();
          const Vec2 n = outward_normal(t.contour, i);
          CHECK(n.norm() == doctest::Approx(1.0));
          CHECK(n.dot(p - centre) > 0);
          const Vec2 probe = p + n;
          CHECK_FALSE(oracle::inside_square(probe.x(), probe.y(), x0, y0, x0 + side - 1, y0 + side - 1));
        }
      }
    }
  }
}

TEST_CASE("point motion") {
  const double fps = 60, dt = 1 / fps;
  SUBCASE("identical contours") {
    Traced a = square(30, 30, 5, 5, 8);
    PointMotion m = point_motion(a.contour, a.contour, {}, dt);
    for (double v : m.accel) CHECK(v == 0.0);
  }
  SUBCASE("stationary then jump by d") {
    const int d = 3, x0 = 5, y0 = 5, side = 20;
    Traced f0 = square(60, 40, x0, y0, side);
    Traced f1 = square(60, 40, x0, y0, side);
    Traced f2 = square(60, 40, x0 + d, y0, side);
    PointMotion m1 = point_motion(f0.contour, f1.contour, {}, dt);
    PointMotion m2 = point_motion(f1.contour, f2.contour, m1.speed, dt);
    int exact = 0;
    for (std::size_t i = 0; i < f2.contour.size(); ++i) {
      // brute-force nearest distance onto the previous contour
      const Vec2 p = f2.contour.points[i].cast<double>();
      double nearest = 1e9;
      for (const Pixel& q : f1.contour.points) nearest = std::min(nearest, (q.cast<double>() - p).norm());
      CHECK(m2.accel[i] == doctest::Approx(nearest * fps * fps));
      // away from the corners the matching is exact
      const int y = f2.contour.points[i].y();
      if (f2.contour.points[i].x() == x0 + d && y - y0 >= d && y0 + side - 1 - y >= d) {
        CHECK(m2.accel[i] == doctest::Approx(d * fps * fps));
        ++exact;
      }
    }
    CHECK(exact == side - 2 * d);
  }
  SUBCASE("constant velocity") {
    const int v = 2, y0 = 5, side = 20;
    std::vector<Traced> frames;
    for (int k = 0; k < 3; ++k) frames.push_back(square(80, 40, 5 + v * k, y0, side));
    PointMotion m1 = point_motion(frames[0].contour, frames[1].contour, {}, dt);
    PointMotion m2 = point_motion(frames[1].contour, frames[2].contour, m1.speed, dt);
    const int x0 = 5 + 2 * v, x1 = x0 + side - 1, y1 = y0 + side - 1;
    std::size_t checked = 0;
    for (std::size_t i = 0; i < frames[2].contour.size(); ++i) {
      const Pixel& p = frames[2].contour.points[i];
      int corner = 1 << 20;
      for (int cx : {x0, x1})
        for (int cy : {y0, y1}) corner = std::min(corner, std::max(std::abs(p.x() - cx), std::abs(p.y() - cy)));
      // near corners the nearest previous point is not the true partner
      if (corner <= 2 * v) continue;
      CHECK(m2.accel[i] == 0.0);
      ++checked;
    }
    CHECK(checked > frames[2].contour.size() / 2);
  }
  SUBCASE("beyond match radius") {
    Traced a = square(60, 30, 2, 2, 4);
    Traced b = square(60, 30, 40, 2, 4);
    PointMotion m = point_motion(a.contour, b.contour, {}, dt, 12.0);
    for (double v : m.accel) CHECK(v == 0.0);
    for (double v : m.speed) CHECK(v == 0.0);
  }
}

TEST_CASE("compute spines") {
  Traced t = square(40, 40, 10, 10, 12);
  const std::size_t n = t.contour.size();
  CHECK(compute_spines(t.contour, std::vector<double>(n, 0.0), 0.01, 40, 1).spines.empty());

  std::vector<double> one(n, 0.0);
  one[5] = 1000;
  auto f = compute_spines(t.contour, one, 0.01, 40, 1);
  REQUIRE(f.spines.size() == 1);
  CHECK(f.spines[0].len == doctest::Approx(10.0));
  CHECK(f.spines[0].origin == t.contour.points[5].cast<double>());

  auto clamped = compute_spines(t.contour, std::vector<double>(n, 1e9), 0.01, 40, 1);
  CHECK(clamped.spines.size() == n);
  for (const Spine& s : clamped.spines) CHECK(s.len == 40.0);

  auto strided = compute_spines(t.contour, std::vector<double>(n, 1e9), 0.01, 40, 4);
  CHECK(strided.spines.size() == (n + 3) / 4);
}

TEST_CASE("spine invariants (property)") {
  std::mt19937 rng(12);
  std::uniform_real_distribution<double> acc(0, 8000);
  for (int trial = 0; trial < 50; ++trial) {
    const int side = 3 + trial % 10, x0 = 2 + trial % 7, y0 = 3 + trial % 5;
    Traced t = square(48, 48, x0, y0, side);
    Traced moved = square(48, 48, x0 + 9, y0 + 4, side);
    std::vector<double> a(t.contour.size()), b(t.contour.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      a[i] = acc(rng);
      b[i] = a[i] + acc(rng);
    }
    const auto fa = compute_spines(t.contour, a, 0.01, 30, 2);
    const auto fb = compute_spines(t.contour, b, 0.01, 30, 2);
    const auto fm = compute_spines(moved.contour, a, 0.01, 30, 2);
    const auto on_contour = point_set(t.contour);
    for (const Spine& s : fa.spines) {
      CHECK(on_contour.count({static_cast<int>(s.origin.x()), static_cast<int>(s.origin.y())}));
      CHECK(s.dir.norm() == doctest::Approx(1.0));
      CHECK(s.len >= 0.0);
      CHECK(s.len <= 30.0);
    }
    // monotone: larger accelerations never shorten or remove a spine
    CHECK(fb.spines.size() >= fa.spines.size());
    std::size_t j = 0;
    for (const Spine& s : fa.spines) {
      while (j < fb.spines.size() && fb.spines[j].origin != s.origin) ++j;
      REQUIRE(j < fb.spines.size());
      CHECK(fb.spines[j].len >= s.len);
    }
    // translation equivariance
    REQUIRE(fm.spines.size() == fa.spines.size());
    for (std::size_t i = 0; i < fa.spines.size(); ++i) {
      CHECK(fm.spines[i].origin == fa.spines[i].origin + Vec2(9, 4));
      CHECK(fm.spines[i].len == fa.spines[i].len);
      CHECK(fm.spines[i].dir.isApprox(fa.spines[i].dir));
    }
  }
}
