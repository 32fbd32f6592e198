#include "tks/timeline.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "tks/error.hpp"

namespace tks {

std::string_view to_string(TrackRole role) {
  switch (role) {
    case TrackRole::end_effector:
      return "end_effector";
    case TrackRole::source_container:
      return "source_container";
    case TrackRole::destination_container:
      return "destination_container";
  }
  return "unknown";
}

std::optional<TrackRole> parse_track_role(std::string_view text) {
  if (text == "end_effector") return TrackRole::end_effector;
  if (text == "source_container") return TrackRole::source_container;
  if (text == "destination_container") return TrackRole::destination_container;
  return std::nullopt;
}

std::string_view to_string(FailureClass cls) {
  return cls == FailureClass::open ? "open" : "deconstruction";
}

std::optional<FailureClass> parse_failure_class(std::string_view text) {
  if (text == "open") return FailureClass::open;
  if (text == "deconstruction") return FailureClass::deconstruction;
  return std::nullopt;
}

const ActionSegment* TaskTimeline::find_segment(std::string_view name) const {
  auto it = std::find_if(segments.begin(), segments.end(),
                         [&](const ActionSegment& s) { return s.name == name; });
  return it == segments.end() ? nullptr : &*it;
}

int TaskTimeline::segment_position(std::string_view name) const {
  for (std::size_t i = 0; i < segments.size(); ++i) {
    if (segments[i].name == name) return static_cast<int>(i);
  }
  return -1;
}

const ActionSegment* TaskTimeline::segment_at(FrameIndex f) const {
  // Segments are sorted by start once validated.
  auto it = std::upper_bound(segments.begin(), segments.end(), f,
                             [](FrameIndex v, const ActionSegment& s) { return v < s.start; });
  if (it == segments.begin()) return nullptr;
  --it;
  return it->contains(f) ? &*it : nullptr;
}

const BoundingBoxTrack* TaskTimeline::track(TrackRole role) const {
  auto it = tracks.find(role);
  return it == tracks.end() ? nullptr : &it->second;
}

namespace {

template <typename... Parts>
std::string cat(const Parts&... parts) {
  std::ostringstream os;
  (os << ... << parts);
  return os.str();
}

void validate_segments(const TaskTimeline& t, std::vector<Violation>& out) {
  if (t.segments.empty()) {
    out.push_back({"segments", "at least one segment required"});
    return;
  }
  std::set<std::string> seen;
  for (std::size_t i = 0; i < t.segments.size(); ++i) {
    const auto& s = t.segments[i];
    if (s.name.empty()) out.push_back({cat("segments[", i, "].name"), "name must be non-empty"});
    if (s.start >= s.end) {
      out.push_back({cat("segments[", i, "]"), cat("start must be < end (", s.start, " >= ", s.end, ")")});
    }
    if (!seen.insert(s.name).second) {
      out.push_back({cat("segments[", i, "].name"), cat("duplicate segment name ", s.name)});
    }
    if (i + 1 < t.segments.size() && s.end != t.segments[i + 1].start) {
      out.push_back({"segments", cat("segments not contiguous at index ", i, "/", i + 1)});
    }
  }
  if (t.segments.front().start != 0) out.push_back({"segments[0].start", "first segment must start at 0"});
  if (t.segments.back().end != t.frame_count) {
    out.push_back({"segments", cat("last segment must end at frame_count (", t.segments.back().end,
                                   " != ", t.frame_count, ")")});
  }
}

void validate_failure(const TaskTimeline& t, std::vector<Violation>& out) {
  if (!t.failure) return;
  const auto& f = *t.failure;
  if (f.t_first_visible < 0 || f.t_first_visible >= t.frame_count) {
    out.push_back({"failure.t_first_visible", "must lie in [0, frame_count)"});
  }
  if (f.t_open) {
    if (f.cls != FailureClass::deconstruction) {
      out.push_back({"failure.t_open", "t_open only allowed for deconstruction"});
    }
    if (*f.t_open < 0) out.push_back({"failure.t_open", "must be >= 0"});
    if (*f.t_open >= f.t_first_visible) {
      out.push_back({"failure.t_open", "t_open must precede t_first_visible"});
    }
  }
  if (f.t_end_visible && (*f.t_end_visible <= f.t_first_visible || *f.t_end_visible > t.frame_count)) {
    out.push_back({"failure.t_end_visible", "must lie in (t_first_visible, frame_count]"});
  }
  // Labels outside the three-way scheme belong to other datasets and are not cross-checked.
  if ((t.label == "nominal" || t.label == "open" || t.label == "deconstruction") && t.label != to_string(f.cls)) {
    out.push_back({"label", cat("label ", t.label, " contradicts failure class ", to_string(f.cls))});
  }
}

void validate_tracks(const TaskTimeline& t, std::vector<Violation>& out) {
  for (const auto& [role, track] : t.tracks) {
    const std::string field = cat("tracks.", to_string(role));
    if (track.empty()) out.push_back({field, "track must contain at least one box"});
    for (const auto& [frame, b] : track) {
      const std::string at = cat(field, "[", frame, "]");
      if (frame < 0 || frame >= t.frame_count) out.push_back({at, "frame outside [0, frame_count)"});
      if (b.x1 >= b.x2 || b.y1 >= b.y2) out.push_back({at, "box must satisfy x1 < x2 and y1 < y2"});
      if (b.x1 < 0 || b.y1 < 0 || b.x2 > t.width || b.y2 > t.height) {
        out.push_back({at, "box outside frame bounds"});
      }
    }
  }
}

}  // namespace

std::vector<Violation> validate_timeline(const TaskTimeline& t) {
  std::vector<Violation> out;
  if (t.sample_id.empty()) out.push_back({"sample_id", "must be non-empty"});
  if (t.frame_count < 1) out.push_back({"frame_count", "must be >= 1"});
  if (!(std::isfinite(t.fps) && t.fps > 0)) out.push_back({"fps", "must be positive"});
  if (t.width < 1 || t.height < 1) out.push_back({"width/height", "frame dimensions must be positive"});
  if (t.label.empty()) out.push_back({"label", "must be non-empty"});
  validate_segments(t, out);
  validate_failure(t, out);
  validate_tracks(t, out);
  return out;
}

Box box_at(const BoundingBoxTrack& track, FrameIndex f) {
  if (track.empty()) throw ValidationError("no boxes in track");
  auto hi = track.lower_bound(f);
  if (hi != track.end() && hi->first == f) return hi->second;
  if (hi == track.begin()) return hi->second;
  auto lo = std::prev(hi);
  if (hi == track.end()) return lo->second;
  return (f - lo->first) <= (hi->first - f) ? lo->second : hi->second;
}

}  // namespace tks
