#pragma once

#include "percuss/simulator.hpp"
#include "percuss/spine_viz.hpp"
#include "percuss/strike_detect.hpp"

#include <istream>
#include <string>
#include <vector>

namespace percuss::jsonl {

// One JSON object per line, no trailing newline in the returned strings.
std::string event_line(const StrikeEvent& e);
std::string truth_line(const TruthStrike& s);
std::string spine_line(const SpineField& field);

/// Readers throw Errc::parse_error naming the 1-based line number. Blank
/// lines are skipped.
std::vector<StrikeEvent> read_events(std::istream& in);
std::vector<TruthStrike> read_truth(std::istream& in);

}  // namespace percuss::jsonl
