#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tks/plan.hpp"
#include "tks/timeline.hpp"

namespace tks {

inline constexpr int kDefaultFrames = 32;
inline constexpr double kDefaultMajority = 0.75;
inline constexpr double kDefaultWindow = 0.25;

// Actions where most robot-object interaction happens in the pick-and-place task.
inline const std::vector<std::string> kInteractionSubset = {"MoveDestination", "Wait", "Place"};

struct FrameSpan {
  FrameIndex start = 0;
  FrameIndex end = 0;

  [[nodiscard]] FrameIndex length() const noexcept { return end - start; }
  friend bool operator==(const FrameSpan&, const FrameSpan&) = default;
};

// n indices start + floor((i + offset) * L / n), i = 0..n-1, L = end - start.
// Duplicates appear when L < n. offset must lie in [0, 1).
std::vector<FrameIndex> equidistant(FrameIndex start, FrameIndex end, int n, double offset = 0.0);

// Largest-remainder apportionment of `total` over non-negative integer
// weights. Remainder ties go to the lower index. All-zero weights yield zeros.
std::vector<int> apportion(std::span<const std::int64_t> weights, int total);

// Frame range covered by the named actions. They must exist, be distinct and
// occupy consecutive segments (any order).
FrameSpan subset_span(const TaskTimeline& t, std::span<const std::string> subset);

SamplingPlan plan_baseline(const TaskTimeline& t, int n, double offset = 0.0);
SamplingPlan plan_action_subset(const TaskTimeline& t, std::span<const std::string> subset, int n,
                                double offset = 0.0);
SamplingPlan plan_single_action(const TaskTimeline& t, std::string_view action, int n, double offset = 0.0);

enum class RemainderSplit { proportional, equal };

struct ActionCount {
  std::string action;
  int count = 0;

  friend bool operator==(const ActionCount&, const ActionCount&) = default;
};

// Per-action frame counts in temporal order.
struct FrameAllocation {
  std::vector<ActionCount> counts;

  [[nodiscard]] int total() const noexcept;
  [[nodiscard]] int count_of(std::string_view action) const noexcept;
  friend bool operator==(const FrameAllocation&, const FrameAllocation&) = default;
};

// round(f * n) frames for `selected`, the rest spread over the other subset
// actions by length (or equally). Each other action receives at least one
// frame whenever enough frames remain.
FrameAllocation allocate_variable_rate(const TaskTimeline& t, std::span<const std::string> subset, int n,
                                       std::string_view selected, double majority = kDefaultMajority,
                                       RemainderSplit split = RemainderSplit::proportional);

// Equidistant sampling inside each allocated action, concatenated in time order.
SamplingPlan plan_from_allocation(const TaskTimeline& t, const FrameAllocation& alloc, double offset = 0.0);

SamplingPlan plan_variable_rate(const TaskTimeline& t, std::span<const std::string> subset, int n,
                                std::string_view selected, double majority = kDefaultMajority,
                                double offset = 0.0, RemainderSplit split = RemainderSplit::proportional);

// Window of round(w * L) frames (at least one) starting width / 2 frames
// before `center`, clipped to the subset span. round(f * n) frames go to the window, the remainder
// to the flanking regions by length.
SamplingPlan plan_random_window(const TaskTimeline& t, std::span<const std::string> subset, int n,
                                FrameIndex center, double window = kDefaultWindow,
                                double majority = kDefaultMajority, double offset = 0.0);

// The window used by plan_random_window.
FrameSpan random_window_bounds(FrameSpan span, FrameIndex center, double window);

// Uniform subset plan followed by one variable-rate plan per subset action.
// Offsets are fixed to 0 and all plans share group 0.
std::vector<SamplingPlan> tta_plan_set(const TaskTimeline& t, std::span<const std::string> subset, int n,
                                       double majority = kDefaultMajority,
                                       RemainderSplit split = RemainderSplit::proportional);

enum class PairMode { per_action, act_bracket };

struct ImagePair {
  FrameIndex first = 0;
  FrameIndex last = 0;
  std::string action;

  friend bool operator==(const ImagePair&, const ImagePair&) = default;
};

// per_action: (start, end - 1) for every subset action.
// act_bracket: (Approach.start, Retract.end - 1), attributed to Act.
std::vector<ImagePair> image_pairs(const TaskTimeline& t, PairMode mode, std::span<const std::string> subset = {});

// Seeded randomness for training-time draws. Conversions are done by hand so
// the stream is identical on every standard library.
class PlanRng {
 public:
  explicit PlanRng(std::uint64_t seed) : engine_(seed) {}

  // Uniform in [0, 1) with 53 bits of resolution.
  double unit();
  // Uniform in [0, k).
  std::size_t index(std::size_t k);

 private:
  std::mt19937_64 engine_;
};

// Per-sample seed so that plans do not depend on manifest order.
std::uint64_t derive_seed(std::uint64_t base, std::string_view sample_id);

}  // namespace tks
