#include "percuss/evaluate.hpp"

#include <json.hpp>

#include <algorithm>
#include <cstdlib>
#include <stdexcept>

namespace percuss {

namespace {

struct Tally {
  std::size_t events = 0, truths = 0, matched = 0;
  double latency_sum = 0.0, abs_latency_sum = 0.0;

  DetectionScore score() const {
    DetectionScore s;
    s.events = events;
    s.truths = truths;
    s.matched = matched;
    s.false_positives = events - matched;
    s.misses = truths - matched;
    s.precision_vacuous = events == 0;
    s.recall_vacuous = truths == 0;
    s.precision = events == 0 ? 1.0 : static_cast<double>(matched) / static_cast<double>(events);
    s.recall = truths == 0 ? 1.0 : static_cast<double>(matched) / static_cast<double>(truths);
    if (matched > 0) {
      s.mean_latency_us = latency_sum / static_cast<double>(matched);
      s.mean_abs_latency_us = abs_latency_sum / static_cast<double>(matched);
    }
    return s;
  }
};

}  // namespace

EvaluationReport evaluate(const std::vector<StrikeEvent>& events, const GroundTruth& truth, Micros tol) {
  if (tol <= 0) throw std::invalid_argument("evaluation tolerance must be positive");

  std::vector<std::size_t> order(events.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return events[a].t < events[b].t; });

  std::vector<bool> taken(truth.strikes.size(), false);
  Tally tally[2];
  for (const StrikeEvent& e : events) ++tally[side_index(e.side)].events;
  for (const TruthStrike& s : truth.strikes) ++tally[side_index(s.side)].truths;

  for (std::size_t idx : order) {
    const StrikeEvent& e = events[idx];
    std::size_t best = truth.strikes.size();
    Micros best_gap = 0;
    for (std::size_t j = 0; j < truth.strikes.size(); ++j) {
      const TruthStrike& s = truth.strikes[j];
      if (taken[j] || s.side != e.side) continue;
      const Micros gap = std::llabs(e.t - s.t);
      if (gap > tol) continue;
      if (best == truth.strikes.size() || gap < best_gap || (gap == best_gap && s.t < truth.strikes[best].t)) {
        best = j;
        best_gap = gap;
      }
    }
    if (best == truth.strikes.size()) continue;
    taken[best] = true;
    Tally& t = tally[side_index(e.side)];
    ++t.matched;
    t.latency_sum += static_cast<double>(e.t - truth.strikes[best].t);
    t.abs_latency_sum += static_cast<double>(best_gap);
  }

  Tally all;
  for (const Tally& t : tally) {
    all.events += t.events;
    all.truths += t.truths;
    all.matched += t.matched;
    all.latency_sum += t.latency_sum;
    all.abs_latency_sum += t.abs_latency_sum;
  }
  return {tally[0].score(), tally[1].score(), all.score()};
}

namespace {

nlohmann::ordered_json score_json(const DetectionScore& s) {
  nlohmann::ordered_json j;
  j["precision"] = s.precision;
  j["recall"] = s.recall;
  j["mean_latency_us"] = s.mean_latency_us;
  j["mean_abs_latency_us"] = s.mean_abs_latency_us;
  j["events"] = s.events;
  j["truths"] = s.truths;
  j["matched"] = s.matched;
  j["false_positives"] = s.false_positives;
  j["misses"] = s.misses;
  if (s.precision_vacuous) j["note_precision"] = "no events; precision reported as 1.0 (vacuous)";
  if (s.recall_vacuous) j["note_recall"] = "no ground truth; recall reported as 1.0 (vacuous)";
  return j;
}

}  // namespace

std::string report_json(const EvaluationReport& report) {
  nlohmann::ordered_json j = score_json(report.overall);
  j["left"] = score_json(report.left);
  j["right"] = score_json(report.right);
  return j.dump();
}

}  // namespace percuss
