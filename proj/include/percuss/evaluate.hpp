#pragma once

#include "percuss/simulator.hpp"
#include "percuss/strike_detect.hpp"

#include <string>
#include <vector>

namespace percuss {

struct DetectionScore {
  std::size_t events = 0;
  std::size_t truths = 0;
  std::size_t matched = 0;
  std::size_t false_positives = 0;
  std::size_t misses = 0;
  double precision = 1.0;  // 1.0 when there are no events (vacuous)
  double recall = 1.0;     // 1.0 when there is no truth (vacuous)
  double mean_latency_us = 0.0;  // signed, event.t - truth.t over matches
  double mean_abs_latency_us = 0.0;
  bool precision_vacuous = false;
  bool recall_vacuous = false;
};

struct EvaluationReport {
  DetectionScore left;
  DetectionScore right;
  DetectionScore overall;
};

/// Greedy one-to-one matching: events are taken in time order and each claims
/// the nearest unmatched same-side truth strike with |dt| <= tol (earlier truth
/// wins a tie).
EvaluationReport evaluate(const std::vector<StrikeEvent>& events, const GroundTruth& truth, Micros tol);

/// {"precision":..,"recall":..,...,"left":{..},"right":{..}} on one line.
std::string report_json(const EvaluationReport& report);

}  // namespace percuss
