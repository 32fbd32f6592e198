#include "tks/labels.hpp"

#include <algorithm>
#include <string>

#include "tks/error.hpp"

namespace tks {

std::string_view to_string(Outcome o) {
  switch (o) {
    case Outcome::nominal:
      return "nominal";
    case Outcome::open:
      return "open";
    case Outcome::deconstruction:
      return "deconstruction";
  }
  return "unknown";
}

std::optional<Outcome> parse_outcome(std::string_view text) {
  if (text == "nominal") return Outcome::nominal;
  if (text == "open") return Outcome::open;
  if (text == "deconstruction") return Outcome::deconstruction;
  return std::nullopt;
}

Outcome failure_state_at(const std::optional<FailureAnnotation>& ann, FrameIndex f) {
  if (!ann) return Outcome::nominal;
  if (f >= ann->t_first_visible) {
    return ann->cls == FailureClass::open ? Outcome::open : Outcome::deconstruction;
  }
  if (ann->t_open && f >= *ann->t_open) return Outcome::open;
  return Outcome::nominal;
}

Outcome action_label(const TaskTimeline& t, std::string_view action) {
  const ActionSegment* seg = t.find_segment(action);
  if (seg == nullptr) throw ValidationError("action '" + std::string(action) + "' not found in sample " + t.sample_id);
  const auto& ann = t.failure;
  if (ann && ann->cls == FailureClass::deconstruction && seg->contains(ann->t_first_visible)) {
    return Outcome::deconstruction;
  }
  // A deconstruction that happened earlier leaves the object open.
  return failure_state_at(ann, seg->end - 1) == Outcome::nominal ? Outcome::nominal : Outcome::open;
}

Outcome aggregate_outcomes(std::span<const Outcome> per_action) {
  if (per_action.empty()) throw ValidationError("cannot aggregate an empty list of outcomes");
  return *std::max_element(per_action.begin(), per_action.end(),
                           [](Outcome a, Outcome b) { return static_cast<int>(a) < static_cast<int>(b); });
}

std::size_t argmax(std::span<const double> values) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

LogitSummary aggregate_logits(std::span<const std::vector<double>> rows) {
  if (rows.empty()) throw ValidationError("cannot aggregate zero logit rows");
  const std::size_t k = rows.front().size();
  if (k == 0) throw ValidationError("logit rows must be non-empty");
  LogitSummary out;
  out.mean.assign(k, 0.0);
  for (const auto& row : rows) {
    if (row.size() != k) throw ValidationError("ragged logit rows");
    for (std::size_t c = 0; c < k; ++c) out.mean[c] += row[c];
  }
  for (auto& v : out.mean) v /= static_cast<double>(rows.size());
  out.argmax = argmax(out.mean);
  return out;
}

}  // namespace tks
