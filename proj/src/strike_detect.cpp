#include "percuss/strike_detect.hpp"

#include <algorithm>
#include <cmath>

namespace percuss {

std::optional<DirectionGate> parse_direction_gate(std::string_view name) {
  if (name == "none") return DirectionGate::none;
  if (name == "rebound") return DirectionGate::rebound;
  return std::nullopt;
}

std::string_view direction_gate_name(DirectionGate g) { return g == DirectionGate::none ? "none" : "rebound"; }

double intensity_of(double peak_acc, const DetectorConfig& cfg) {
  return std::clamp(peak_acc / (cfg.k_sat * cfg.acc_threshold), 0.0, 1.0);
}

StrikeDetector::StrikeDetector(Side side, DetectorConfig cfg) : side_(side), cfg_(cfg) {}

bool StrikeDetector::rebound_signature(const Vec2& acc) const {
  const int axis = std::abs(acc.x()) >= std::abs(acc.y()) ? 0 : 1;
  for (std::size_t i = 1; i < recent_vel_.size(); ++i)
    if (recent_vel_[i - 1][axis] * recent_vel_[i][axis] < 0.0) return true;
  return false;
}

std::optional<StrikeEvent> StrikeDetector::release() {
  std::optional<StrikeEvent> out;
  if (episode_ && (cfg_.direction_gate == DirectionGate::none || episode_->gate_ok)) {
    out = StrikeEvent{side_, episode_->t, episode_->pos, episode_->peak, intensity_of(episode_->peak, cfg_)};
    last_event_t_ = episode_->t;
  }
  episode_.reset();
  return out;
}

std::optional<StrikeEvent> StrikeDetector::feed(const KinematicState& kin) {
  if (kin.vel) {
    recent_vel_.push_back(*kin.vel);
    if (recent_vel_.size() > 3) recent_vel_.pop_front();
  } else {
    recent_vel_.clear();
  }

  const bool above = kin.acc.has_value() && kin.acc_mag >= cfg_.acc_threshold;
  const bool signature = kin.acc.has_value() && rebound_signature(*kin.acc);
  std::optional<StrikeEvent> out;

  if (episode_) {
    if (above) {
      episode_->peak = std::max(episode_->peak, kin.acc_mag);
      episode_->gate_ok = episode_->gate_ok || signature;
      if (++episode_->samples >= cfg_.peak_window) out = release();
    } else {
      out = release();
    }
  } else if (above && !above_) {
    const bool rested = !last_event_t_ || kin.t - *last_event_t_ >= cfg_.refractory;
    if (rested) {
      episode_ = Episode{kin.t, kin.pos, kin.acc_mag, 1, signature};
      if (cfg_.peak_window <= 1) out = release();
    }
  }
  above_ = above;
  return out;
}

std::optional<StrikeEvent> StrikeDetector::flush() { return release(); }

}  // namespace percuss
