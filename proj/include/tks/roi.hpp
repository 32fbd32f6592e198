#pragma once

#include <optional>
#include <span>
#include <string_view>

#include "tks/plan.hpp"
#include "tks/timeline.hpp"

namespace tks {

// Container whose box is paired with the end-effector when cropping an action:
// the source container for Pick and MoveDestination, the destination
// container for Wait, Place and MoveSource. nullopt for any other action.
std::optional<TrackRole> container_role_for(std::string_view action);

// Horizontal union of the container and end-effector boxes over `frames`,
// spanning the full frame height and clamped to the frame.
CropRect action_roi(const TaskTimeline& t, std::string_view action, std::span<const FrameIndex> frames);

// Throws ValidationError when the rect is not a valid crop (x1 >= x2, ...).
void check_crop(const CropRect& r, int width, int height);

// Pass-through used by the baseline; validates the region.
CropRect fixed_crop(const CropRect& region);

enum class CropKind { none, fixed, roi };

// Which frames of an action feed its ROI: every frame of the segment, or only
// the frames the plan selected.
enum class RoiFrames { all, sampled };

struct CropMode {
  CropKind kind = CropKind::none;
  CropRect region;  // used when kind == fixed
  RoiFrames roi_frames = RoiFrames::all;
};

std::string_view to_string(CropKind kind);
std::optional<CropKind> parse_crop_kind(std::string_view text);

// Copy of `plan` with a crop on every entry. In roi mode all entries of one
// action share a single rect.
SamplingPlan attach_crops(const SamplingPlan& plan, const TaskTimeline& t, const CropMode& mode);

}  // namespace tks
