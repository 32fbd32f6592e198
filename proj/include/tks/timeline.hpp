#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace tks {

// Frame indices are the canonical time axis; fps is carried only as metadata.
using FrameIndex = std::int64_t;

inline constexpr int kDefaultFrameWidth = 1280;
inline constexpr int kDefaultFrameHeight = 560;

// Pixel rectangle, half-open: [x1, x2) x [y1, y2).
struct Box {
  int x1 = 0;
  int y1 = 0;
  int x2 = 0;
  int y2 = 0;

  [[nodiscard]] int width() const noexcept { return x2 - x1; }
  [[nodiscard]] int height() const noexcept { return y2 - y1; }
  friend bool operator==(const Box&, const Box&) = default;
};

struct ActionSegment {
  std::string name;
  FrameIndex start = 0;  // inclusive
  FrameIndex end = 0;    // exclusive

  [[nodiscard]] FrameIndex length() const noexcept { return end - start; }
  [[nodiscard]] bool contains(FrameIndex f) const noexcept { return f >= start && f < end; }
  friend bool operator==(const ActionSegment&, const ActionSegment&) = default;
};

enum class TrackRole { end_effector, source_container, destination_container };

std::string_view to_string(TrackRole role);
std::optional<TrackRole> parse_track_role(std::string_view text);

// Sparse per-frame boxes; frames without an entry resolve to the nearest
// annotated frame (see box_at).
using BoundingBoxTrack = std::map<FrameIndex, Box>;

enum class FailureClass { open, deconstruction };

std::string_view to_string(FailureClass cls);
std::optional<FailureClass> parse_failure_class(std::string_view text);

struct FailureAnnotation {
  FailureClass cls = FailureClass::open;
  FrameIndex t_first_visible = 0;
  // Deconstruction samples where the object is visibly open beforehand.
  std::optional<FrameIndex> t_open;
  // Exclusive end of the rendered event; only synthetic data records it.
  std::optional<FrameIndex> t_end_visible;

  friend bool operator==(const FailureAnnotation&, const FailureAnnotation&) = default;
};

struct TaskTimeline {
  std::string sample_id;
  FrameIndex frame_count = 0;
  double fps = 30.0;
  int width = kDefaultFrameWidth;
  int height = kDefaultFrameHeight;
  std::vector<ActionSegment> segments;
  std::map<TrackRole, BoundingBoxTrack> tracks;
  std::optional<FailureAnnotation> failure;
  std::string label = "nominal";

  // Segment by name, or nullptr.
  [[nodiscard]] const ActionSegment* find_segment(std::string_view name) const;
  // Position of the named segment in temporal order, or -1.
  [[nodiscard]] int segment_position(std::string_view name) const;
  // Segment containing frame f, or nullptr.
  [[nodiscard]] const ActionSegment* segment_at(FrameIndex f) const;
  [[nodiscard]] const BoundingBoxTrack* track(TrackRole role) const;
  [[nodiscard]] double duration_seconds() const { return fps > 0 ? static_cast<double>(frame_count) / fps : 0.0; }

  friend bool operator==(const TaskTimeline&, const TaskTimeline&) = default;
};

struct Violation {
  std::string field;
  std::string rule;

  [[nodiscard]] std::string to_string() const { return field + ": " + rule; }
};

// Empty iff every timeline invariant holds. Never throws.
std::vector<Violation> validate_timeline(const TaskTimeline& t);

// Box at f, or at the nearest annotated frame (ties go to the earlier frame).
// Throws ValidationError on an empty track.
Box box_at(const BoundingBoxTrack& track, FrameIndex f);

}  // namespace tks
