#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tks/timeline.hpp"

namespace tks {

// Crop region in pixels, half-open, always inside the frame:
// 0 <= x1 < x2 <= width, 0 <= y1 < y2 <= height.
struct CropRect {
  int x1 = 0;
  int y1 = 0;
  int x2 = 0;
  int y2 = 0;

  [[nodiscard]] int width() const noexcept { return x2 - x1; }
  [[nodiscard]] int height() const noexcept { return y2 - y1; }
  [[nodiscard]] static CropRect full_frame(int width, int height) { return {0, 0, width, height}; }
  friend bool operator==(const CropRect&, const CropRect&) = default;
};

enum class Strategy { baseline, action_subset, single_action, variable_rate, random_window };

std::string_view to_string(Strategy s);
std::optional<Strategy> parse_strategy(std::string_view text);

struct PlanEntry {
  FrameIndex frame = 0;
  std::string action;
  std::optional<CropRect> crop;

  friend bool operator==(const PlanEntry&, const PlanEntry&) = default;
};

// An ordered frame selection for one clip. Entries are sorted by frame and
// every index lies inside the segment named by its action.
struct SamplingPlan {
  std::string sample_id;
  Strategy strategy = Strategy::baseline;
  std::uint64_t seed = 0;
  double offset = 0.0;
  // Ground-truth label for this clip; per-action plans carry the adjusted label.
  std::string label;
  // Set for single-action plans (the action the clip represents).
  std::optional<std::string> action;
  // Variable-rate plans: the high-rate action. Random-window plans: window center.
  std::optional<std::string> selected;
  std::optional<FrameIndex> center;
  // Plans sharing a group index are aggregated together (test-time augmentation).
  std::optional<int> group;
  // none | fixed | roi once crops are attached.
  std::string crop_mode;
  std::vector<PlanEntry> entries;

  [[nodiscard]] std::size_t n() const noexcept { return entries.size(); }
  [[nodiscard]] std::vector<FrameIndex> frames() const;

  friend bool operator==(const SamplingPlan&, const SamplingPlan&) = default;
};

}  // namespace tks
