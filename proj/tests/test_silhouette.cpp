#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "percuss/silhouette.hpp"
#include "support/oracles.hpp"

#include <random>

using namespace percuss;

TEST_CASE("segment") {
  CHECK_FALSE(segment(Frame(4, 3, 0, 255), 128, Polarity::dark_foreground).any());
  CHECK(segment(Frame(4, 3, 0, 0), 128, Polarity::dark_foreground).all());
  Frame eq(2, 2, 0, 128);
  CHECK_FALSE(segment(eq, 128, Polarity::dark_foreground).any());
  CHECK_FALSE(segment(eq, 128, Polarity::bright_foreground).any());
  CHECK(segment(Frame(1, 1, 0, 129), 128, Polarity::bright_foreground).all());
  CHECK(segment(Frame(1, 1, 0, 127), 128, Polarity::dark_foreground).all());
}

TEST_CASE("segmentation is pointwise in time") {
  std::mt19937 rng(11);
  std::uniform_int_distribution<int> d(0, 255);
  std::vector<Frame> frames;
  for (int i = 0; i < 5; ++i) {
    Frame f(16, 8, i);
    for (int y = 0; y < 8; ++y)
      for (int x = 0; x < 16; ++x) f.at(x, y) = static_cast<std::uint8_t>(d(rng));
    frames.push_back(f);
  }
  std::vector<BinaryMask> forward;
  for (const Frame& f : frames) forward.push_back(segment(f, 100, Polarity::dark_foreground));
  for (int i = 4; i >= 0; --i)
    CHECK((segment(frames[static_cast<std::size_t>(i)], 100, Polarity::dark_foreground) ==
           forward[static_cast<std::size_t>(i)])
              .all());
}

TEST_CASE("denoise") {
  std::mt19937 rng(5);
  SUBCASE("zero iterations is identity") {
    BinaryMask m = oracle::random_mask(rng, 20, 15, 0.5);
    CHECK((denoise(m, 0) == m).all());
  }
  SUBCASE("isolated pixel vanishes") {
    BinaryMask m = BinaryMask::Constant(5, 5, false);
    m(2, 2) = true;
    CHECK_FALSE(denoise(m, 1).any());
  }
  SUBCASE("solid 10x10 square") {
    BinaryMask m = BinaryMask::Constant(16, 16, false);
    m.block(3, 3, 10, 10) = true;
    BinaryMask opened = denoise(m, 1);
    const BinaryMask expect = oracle::dilate(oracle::erode(m));
    CHECK((opened == expect).all());
    CHECK(opened.count() >= 64);
    CHECK(opened.block(4, 4, 8, 8).all());
  }
  SUBCASE("erode and dilate match brute force") {
    for (int i = 0; i < 50; ++i) {
      BinaryMask m = oracle::random_mask(rng, 17, 13, 0.6);
      CHECK((erode(m) == oracle::erode(m)).all());
      CHECK((dilate(m) == oracle::dilate(m)).all());
      CHECK((denoise(m, 2) == oracle::dilate(oracle::erode(oracle::dilate(oracle::erode(m))))).all());
    }
  }
}

TEST_CASE("connected components examples") {
  CHECK(connected_components(BinaryMask::Constant(4, 4, false), Connectivity::eight).empty());
  BinaryMask diag = oracle::mask_from({"#.", ".#"});
  CHECK(connected_components(diag, Connectivity::four).size() == 2);
  CHECK(connected_components(diag, Connectivity::eight).size() == 1);

  BinaryMask m = oracle::mask_from({
      "##....#",
      "##...##",
      ".......",
      "...#...",
  });
  auto blobs = connected_components(m, Connectivity::eight);
  REQUIRE(blobs.size() == 3);
  CHECK(blobs[0].label == 1);
  CHECK(blobs[0].area == 4);
  CHECK(blobs[0].centroid.isApprox(Vec2(0.5, 0.5)));
  CHECK(blobs[1].area == 3);
  CHECK(blobs[1].bbox.min_x == 5);
  CHECK(blobs[1].bbox.max_y == 1);
  CHECK(blobs[2].centroid.isApprox(Vec2(3, 3)));
  CHECK(blobs[1].contains(6, 0));
  CHECK_FALSE(blobs[1].contains(5, 0));
}

TEST_CASE("U shape merges late (union-find)") {
  BinaryMask m = oracle::mask_from({
      "#.#.#",
      "#.#.#",
      "#####",
  });
  for (auto c : {Connectivity::four, Connectivity::eight}) {
    auto blobs = connected_components(m, c);
    REQUIRE(blobs.size() == 1);
    CHECK(blobs[0].area == 11);
  }
}

TEST_CASE("labeling matches flood fill on random masks (property)") {
  std::mt19937 rng(2024);
  for (int i = 0; i < 200; ++i) {
    std::uniform_real_distribution<double> dens(0.1, 0.7);
    std::uniform_int_distribution<int> dim(1, 40);
    BinaryMask m = oracle::random_mask(rng, dim(rng), dim(rng), dens(rng));
    for (auto c : {Connectivity::four, Connectivity::eight}) {
      auto blobs = connected_components(m, c);
      CHECK(oracle::partition_of(blobs) == oracle::flood_fill_partition(m, static_cast<int>(c)));
      long total = 0;
      for (const auto& b : blobs) total += b.area;
      CHECK(total == m.count());
      // labels in raster order of first pixel, deterministic
      for (std::size_t k = 0; k < blobs.size(); ++k) CHECK(blobs[k].label == static_cast<int>(k) + 1);
      auto again = connected_components(m, c);
      REQUIRE(again.size() == blobs.size());
      for (std::size_t k = 0; k < blobs.size(); ++k) CHECK(oracle::pixels_of(again[k]) == oracle::pixels_of(blobs[k]));
    }
  }
}

TEST_CASE("filter_blobs") {
  auto blob_of = [](int label, long area) {
    Blob b;
    b.label = label;
    b.area = area;
    return b;
  };
  std::vector<Blob> blobs = {blob_of(1, 3), blob_of(2, 50), blob_of(3, 7)};
  auto kept = filter_blobs(blobs, 10);
  REQUIRE(kept.size() == 1);
  CHECK(kept[0].area == 50);
  CHECK(filter_blobs(blobs, 0).size() == 3);
  CHECK(filter_blobs(blobs, 100).empty());
}

TEST_CASE("polarity names") {
  CHECK(parse_polarity("dark-foreground") == Polarity::dark_foreground);
  CHECK(parse_polarity("bright-foreground") == Polarity::bright_foreground);
  CHECK_FALSE(parse_polarity("sideways"));
  CHECK(polarity_name(Polarity::bright_foreground) == "bright-foreground");
}
