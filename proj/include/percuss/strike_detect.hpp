#pragma once

#include "percuss/tracking.hpp"
#include "percuss/types.hpp"

#include <deque>
#include <optional>
#include <string_view>

namespace percuss {

enum class DirectionGate { none, rebound };

std::optional<DirectionGate> parse_direction_gate(std::string_view name);
std::string_view direction_gate_name(DirectionGate g);

struct DetectorConfig {
  double acc_threshold = 12000.0;  // px/s^2
  Micros refractory = 80'000;      // us
  DirectionGate direction_gate = DirectionGate::rebound;
  double k_sat = 3.0;  // intensity saturates at k_sat * acc_threshold
  // samples an above-threshold episode is watched for its peak and the
  // rebound signature before the event is released (1 = release on crossing)
  int peak_window = 2;
};

struct StrikeEvent {
  Side side = Side::Left;
  Micros t = 0;  // threshold-crossing sample
  Vec2 pos = Vec2::Zero();
  double peak_acc = 0.0;
  double intensity = 0.0;
};

/// min(1, peak_acc / (k_sat * acc_threshold)).
double intensity_of(double peak_acc, const DetectorConfig& cfg);

/// Rising-edge strike detector for one side.
///
/// An event opens when acc_mag crosses acc_threshold from below and at least
/// `refractory` us have passed since this side's previous event. The episode is
/// followed for up to `peak_window` samples (or until acc_mag drops below the
/// threshold) to collect the peak; with the rebound gate, it is only released if
/// the velocity along the dominant acceleration axis changed sign within the
/// last two samples at some point of the episode.
class StrikeDetector {
 public:
  explicit StrikeDetector(Side side, DetectorConfig cfg = {});

  std::optional<StrikeEvent> feed(const KinematicState& kin);

  /// Releases an episode still open at end of stream.
  std::optional<StrikeEvent> flush();

  Side side() const { return side_; }
  const DetectorConfig& config() const { return cfg_; }

 private:
  struct Episode {
    Micros t;
    Vec2 pos;
    double peak;
    int samples;
    bool gate_ok;
  };

  bool rebound_signature(const Vec2& acc) const;
  std::optional<StrikeEvent> release();

  Side side_;
  DetectorConfig cfg_;
  bool above_ = false;
  std::optional<Micros> last_event_t_;
  std::optional<Episode> episode_;
  std::deque<Vec2> recent_vel_;  // newest at back, at most 3
};

}  // namespace percuss
