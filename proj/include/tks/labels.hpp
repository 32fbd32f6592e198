#pragma once

#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "tks/timeline.hpp"

namespace tks {

// Ordered by severity; the numeric value is the class index used for logits.
enum class Outcome { nominal = 0, open = 1, deconstruction = 2 };

std::string_view to_string(Outcome o);
std::optional<Outcome> parse_outcome(std::string_view text);

// Failure state visible at frame f. A deconstruction with t_open passes
// through open first; states never regress as f grows.
Outcome failure_state_at(const std::optional<FailureAnnotation>& ann, FrameIndex f);

// Label for a clip of one action: deconstruction if the deconstruction first
// becomes visible inside the action, open if the object is open (or left open
// by an earlier deconstruction) at the action's last frame, nominal otherwise.
Outcome action_label(const TaskTimeline& t, std::string_view action);

// deconstruction beats open beats nominal. Throws on an empty list.
Outcome aggregate_outcomes(std::span<const Outcome> per_action);

struct LogitSummary {
  std::vector<double> mean;
  std::size_t argmax = 0;  // ties go to the lowest index
};

// Element-wise mean over rows. Throws on no rows or ragged rows.
LogitSummary aggregate_logits(std::span<const std::vector<double>> rows);

// Index of the largest value, lowest index on ties.
std::size_t argmax(std::span<const double> values);

}  // namespace tks
