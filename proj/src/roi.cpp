#include "tks/roi.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "tks/error.hpp"

namespace tks {

std::optional<TrackRole> container_role_for(std::string_view action) {
  if (action == "Pick" || action == "MoveDestination") return TrackRole::source_container;
  if (action == "Wait" || action == "Place" || action == "MoveSource") return TrackRole::destination_container;
  return std::nullopt;
}

CropRect action_roi(const TaskTimeline& t, std::string_view action, std::span<const FrameIndex> frames) {
  const auto role = container_role_for(action);
  if (!role) throw ValidationError("no ROI rule for action '" + std::string(action) + "'");
  const ActionSegment* seg = t.find_segment(action);
  if (seg == nullptr) throw ValidationError("action '" + std::string(action) + "' not found in sample " + t.sample_id);
  if (frames.empty()) throw ValidationError("ROI needs at least one frame");

  const BoundingBoxTrack* container = t.track(*role);
  if (container == nullptr || container->empty()) {
    throw ValidationError("missing track " + std::string(to_string(*role)) + " in sample " + t.sample_id);
  }
  const BoundingBoxTrack* effector = t.track(TrackRole::end_effector);
  if (effector == nullptr || effector->empty()) {
    throw ValidationError("missing track end_effector in sample " + t.sample_id);
  }

  int lo = std::numeric_limits<int>::max();
  int hi = std::numeric_limits<int>::min();
  for (FrameIndex f : frames) {
    if (!seg->contains(f)) {
      throw ValidationError("frame " + std::to_string(f) + " is outside action '" + seg->name + "'");
    }
    for (const Box& b : {box_at(*container, f), box_at(*effector, f)}) {
      lo = std::min(lo, b.x1);
      hi = std::max(hi, b.x2);
    }
  }
  lo = std::clamp(lo, 0, t.width - 1);
  hi = std::clamp(hi, lo + 1, t.width);
  return {lo, 0, hi, t.height};
}

void check_crop(const CropRect& r, int width, int height) {
  if (r.x1 >= r.x2 || r.y1 >= r.y2) throw ValidationError("invalid crop: requires x1 < x2 and y1 < y2");
  if (r.x1 < 0 || r.y1 < 0 || r.x2 > width || r.y2 > height) {
    throw ValidationError("invalid crop: outside the " + std::to_string(width) + "x" + std::to_string(height) +
                          " frame");
  }
}

CropRect fixed_crop(const CropRect& region) {
  check_crop(region, std::numeric_limits<int>::max(), std::numeric_limits<int>::max());
  return region;
}

std::string_view to_string(CropKind kind) {
  switch (kind) {
    case CropKind::none:
      return "none";
    case CropKind::fixed:
      return "fixed";
    case CropKind::roi:
      return "roi";
  }
  return "unknown";
}

std::optional<CropKind> parse_crop_kind(std::string_view text) {
  if (text == "none") return CropKind::none;
  if (text == "fixed") return CropKind::fixed;
  if (text == "roi") return CropKind::roi;
  return std::nullopt;
}

SamplingPlan attach_crops(const SamplingPlan& plan, const TaskTimeline& t, const CropMode& mode) {
  SamplingPlan out = plan;
  out.crop_mode = std::string(to_string(mode.kind));
  switch (mode.kind) {
    case CropKind::none: {
      const auto full = CropRect::full_frame(t.width, t.height);
      for (auto& e : out.entries) e.crop = full;
      return out;
    }
    case CropKind::fixed: {
      const CropRect region = fixed_crop(mode.region);
      check_crop(region, t.width, t.height);
      for (auto& e : out.entries) e.crop = region;
      return out;
    }
    case CropKind::roi:
      break;
  }

  std::map<std::string, std::vector<FrameIndex>> by_action;
  for (const auto& e : out.entries) {
    if (e.action.empty()) throw ValidationError("plan entry at frame " + std::to_string(e.frame) + " has no action");
    by_action[e.action].push_back(e.frame);
  }
  std::map<std::string, CropRect> rects;
  for (auto& [action, frames] : by_action) {
    if (mode.roi_frames == RoiFrames::all) {
      const ActionSegment* seg = t.find_segment(action);
      if (seg == nullptr) throw ValidationError("action '" + action + "' not found in sample " + t.sample_id);
      frames.clear();
      for (FrameIndex f = seg->start; f < seg->end; ++f) frames.push_back(f);
    }
    rects.emplace(action, action_roi(t, action, frames));
  }
  for (auto& e : out.entries) e.crop = rects.at(e.action);
  return out;
}

}  // namespace tks
