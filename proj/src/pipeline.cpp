#include "percuss/pipeline.hpp"

#include <chrono>
#include <numeric>

namespace percuss {

namespace {

class StageClock {
 public:
  explicit StageClock(std::array<double, 6>& totals) : totals_(totals), last_(std::chrono::steady_clock::now()) {}

  void lap(Stage s) {
    const auto now = std::chrono::steady_clock::now();
    totals_[static_cast<std::size_t>(s)] += std::chrono::duration<double, std::micro>(now - last_).count();
    last_ = now;
  }

 private:
  std::array<double, 6>& totals_;
  std::chrono::steady_clock::time_point last_;
};

}  // namespace

Pipeline::Pipeline(const PipelineConfig& cfg, int width, int height)
    : cfg_(cfg),
      width_(width),
      height_(height),
      split_(cfg.split_x ? SideAssignment{*cfg.split_x} : SideAssignment::center(width)),
      spines_on_(cfg.spines),
      detectors_{StrikeDetector(Side::Left, cfg.left_detector), StrikeDetector(Side::Right, cfg.right_detector)} {
  if (!split_.valid_for(width))
    throw Error(Errc::config_invalid, "split_x: " + std::to_string(split_.split_x) + " is outside a frame of width " +
                                          std::to_string(width));
}

FrameResult Pipeline::process(const Frame& frame) {
  if (frame.width() != width_ || frame.height() != height_)
    throw Error(Errc::format_mismatch, "frame is " + std::to_string(frame.width()) + "x" +
                                           std::to_string(frame.height()) + ", pipeline expects " +
                                           std::to_string(width_) + "x" + std::to_string(height_));
  FrameResult out;
  StageClock clock(stage_total_us_);
  const auto& seg = cfg_.segmentation;

  BinaryMask mask = segment(frame, seg.threshold, seg.polarity);
  clock.lap(Stage::segment);
  if (seg.open_iterations > 0) mask = denoise(mask, seg.open_iterations);
  clock.lap(Stage::denoise);
  const std::vector<Blob> blobs = filter_blobs(connected_components(mask, seg.connectivity), seg.min_blob_area);
  clock.lap(Stage::label);

  const auto [left, right] = extract_tips(blobs, split_, frame.timestamp);
  kin_[0] = update_kinematics(kin_[0], left, cfg_.kinematics);
  kin_[1] = update_kinematics(kin_[1], right, cfg_.kinematics);
  clock.lap(Stage::track);

  for (int s = 0; s < 2; ++s)
    if (auto e = detectors_[s].feed(kin_[s])) out.events.push_back(*e);
  clock.lap(Stage::detect);

  if (spines_on_) {
    update_spines(Side::Left, blobs, mask, frame.timestamp, out.spines);
    update_spines(Side::Right, blobs, mask, frame.timestamp, out.spines);
  }
  clock.lap(Stage::spines);
  ++frames_;
  return out;
}

void Pipeline::update_spines(Side side, const std::vector<Blob>& blobs, const BinaryMask& mask, Micros t,
                             std::vector<SpineField>& out) {
  SpineState& st = spine_state_[side_index(side)];
  const Blob* body = nullptr;
  for (const Blob& b : blobs) {
    const bool on_side = side == Side::Left ? b.centroid.x() < split_.split_x : b.centroid.x() >= split_.split_x;
    if (on_side && (!body || b.area > body->area)) body = &b;
  }
  if (!body) {
    st.has_prev = false;
    return;
  }

  Contour contour = trace_contour(*body, mask);
  std::vector<double> accels(contour.size(), 0.0);
  std::vector<double> speeds(contour.size(), 0.0);
  if (cfg_.spine.broadcast_tip_accel) {
    accels.assign(contour.size(), kin_[side_index(side)].acc_mag);
  } else if (st.has_prev && t > st.prev_t) {
    PointMotion motion =
        point_motion(st.prev, contour, st.prev_speeds, static_cast<double>(t - st.prev_t) * 1e-6, cfg_.spine.match_radius);
    accels = std::move(motion.accel);
    speeds = std::move(motion.speed);
  }

  SpineField field = compute_spines(contour, accels, cfg_.spine.gain, cfg_.spine.max_len, cfg_.spine.stride);
  field.frame_t = t;
  field.side = side;
  out.push_back(std::move(field));

  st.prev = std::move(contour);
  st.prev_speeds = std::move(speeds);
  st.prev_t = t;
  st.has_prev = true;
}

std::vector<StrikeEvent> Pipeline::finish() {
  std::vector<StrikeEvent> out;
  for (auto& d : detectors_)
    if (auto e = d.flush()) out.push_back(*e);
  return out;
}

std::array<double, 6> Pipeline::stage_mean_us() const {
  std::array<double, 6> mean{};
  if (frames_ == 0) return mean;
  for (std::size_t i = 0; i < mean.size(); ++i) mean[i] = stage_total_us_[i] / static_cast<double>(frames_);
  return mean;
}

double Pipeline::frame_mean_us() const {
  const auto m = stage_mean_us();
  return std::accumulate(m.begin(), m.end(), 0.0);
}

}  // namespace percuss
