#pragma once

#include "percuss/config.hpp"
#include "percuss/frame_io.hpp"
#include "percuss/spine_viz.hpp"
#include "percuss/strike_detect.hpp"
#include "percuss/tracking.hpp"

#include <array>
#include <cstdint>
#include <string_view>
#include <vector>

namespace percuss {

enum class Stage { segment, denoise, label, track, detect, spines };
inline constexpr std::array<std::string_view, 6> kStageNames = {"segment", "denoise", "label",
                                                                 "track",   "detect",  "spines"};

struct FrameResult {
  std::vector<StrikeEvent> events;  // left before right
  std::vector<SpineField> spines;
};

/// Frames -> masks -> blobs -> tips -> kinematics -> strikes (+ spines).
/// Strictly sequential; one instance per stream.
class Pipeline {
 public:
  Pipeline(const PipelineConfig& cfg, int width, int height);

  FrameResult process(const Frame& frame);

  /// Releases detector episodes still open at end of stream.
  std::vector<StrikeEvent> finish();

  void set_spines_enabled(bool on) { spines_on_ = on; }
  bool spines_enabled() const { return spines_on_; }

  std::int64_t frames() const { return frames_; }
  /// Mean microseconds per frame spent in each stage.
  std::array<double, 6> stage_mean_us() const;
  double frame_mean_us() const;

  const KinematicState& kinematics(Side s) const { return kin_[side_index(s)]; }

 private:
  struct SpineState {
    bool has_prev = false;
    Contour prev;
    std::vector<double> prev_speeds;
    Micros prev_t = 0;
  };

  void update_spines(Side side, const std::vector<Blob>& blobs, const BinaryMask& mask, Micros t,
                     std::vector<SpineField>& out);

  PipelineConfig cfg_;
  int width_;
  int height_;
  SideAssignment split_;
  bool spines_on_;
  std::array<KinematicState, 2> kin_{KinematicState(Side::Left), KinematicState(Side::Right)};
  std::array<StrikeDetector, 2> detectors_;
  std::array<SpineState, 2> spine_state_{};
  std::int64_t frames_ = 0;
  std::array<double, 6> stage_total_us_{};
};

}  // namespace percuss
