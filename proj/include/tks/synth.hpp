#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "tks/clip.hpp"
#include "tks/frame_source.hpp"
#include "tks/labels.hpp"
#include "tks/serialize.hpp"
#include "tks/timeline.hpp"

namespace tks {

struct LengthRange {
  FrameIndex min = 1;
  FrameIndex max = 1;
};

struct ActionLengthRange {
  std::string action;
  LengthRange length;
};

// Parameters of the procedural pick-and-place generator.
struct SynthSpec {
  std::uint64_t seed = 7;
  int width = 160;
  int height = 70;
  double fps = 10.0;
  std::vector<ActionLengthRange> actions = {
      {"Pick", {40, 120}}, {"MoveDestination", {40, 120}}, {"Wait", {40, 120}},
      {"Place", {40, 120}}, {"MoveSource", {40, 120}},
  };
  double p_open = 0.15;
  double p_deconstruction = 0.15;
  // Chance that a deconstruction is preceded by a visible open phase.
  double p_open_phase = 0.5;
  LengthRange event_duration = {2, 8};
  LengthRange open_phase_duration = {2, 8};
  // Relative chance of an event starting in each action; events stay inside
  // the span of the weighted actions.
  std::map<std::string, double> event_weights = {{"MoveDestination", 1.0}, {"Wait", 1.0}, {"Place", 1.0}};
  // When > 0, event durations are drawn from [1, span / k) for this clip
  // length k instead of event_duration (span = weighted actions).
  int short_event_clip_frames = 0;
};

// Throws ValidationError on out-of-range probabilities, empty ranges, or a
// frame too small for the scene layout.
void validate_synth_spec(const SynthSpec& spec);

SynthSpec synth_spec_from_json(const Json& j);
Json synth_spec_to_json(const SynthSpec& spec);

// Scene geometry shared by the renderer and the annotation repainter.
struct SceneLayout {
  Box source_container;
  Box destination_container;
  int effector_size = 0;
  int effector_top = 0;
  int patch_height = 0;
  int patch_gap = 0;

  static SceneLayout for_frame(int width, int height);
  // Event patch drawn under the end-effector box.
  [[nodiscard]] Box patch_for(const Box& effector) const;
};

inline constexpr std::uint8_t kBackground[3] = {128, 128, 128};
inline constexpr std::uint8_t kEffectorColor[3] = {240, 240, 240};
inline constexpr std::uint8_t kSourceColor[3] = {60, 60, 72};
inline constexpr std::uint8_t kDestinationColor[3] = {72, 60, 60};
inline constexpr std::uint8_t kAmber[3] = {255, 170, 0};
inline constexpr std::uint8_t kRed[3] = {220, 20, 20};

// Ground-truth event as rendered: amber over [amber_from, visible_from) when
// amber_from is set, then the class color over [visible_from, visible_to).
struct SynthEvent {
  FailureClass cls = FailureClass::open;
  std::optional<FrameIndex> amber_from;
  FrameIndex visible_from = 0;
  FrameIndex visible_to = 0;
};

struct SynthSample {
  TaskTimeline timeline;
  std::optional<SynthEvent> event;
  // Effector box per frame, exactly as rendered.
  std::vector<Box> effector_path;
  SceneLayout layout;

  [[nodiscard]] Image render(FrameIndex f) const;
  // Renders on demand; the sample must outlive the returned source.
  [[nodiscard]] std::unique_ptr<FrameSource> source() const;
};

// Deterministic in (spec.seed, index); sample i uses seed ^ i.
SynthSample generate_sample(const SynthSpec& spec, std::size_t index);
std::vector<SynthSample> generate(const SynthSpec& spec, std::size_t count);

enum class FrameFormat { packed, png };

// Writes manifest.jsonl and frames/<sample_id>.tksf (or frames/<sample_id>/
// numbered PNGs) under `out_dir`.
void write_dataset(const std::vector<SynthSample>& samples, const std::filesystem::path& out_dir,
                   FrameFormat format = FrameFormat::packed);

// Event pixels implied by the annotations alone: the colored patch under the
// annotated end-effector box. Returns nullopt when nothing is visible at f.
struct EventPatch {
  Box rect;
  Outcome color;  // open = amber, deconstruction = red
};
std::optional<EventPatch> repaint_event(const TaskTimeline& t, FrameIndex f);

// Frames in which an event patch is visible.
std::vector<FrameIndex> event_frames(const TaskTimeline& t);

enum class PixelClass { other, amber, red };
PixelClass classify_pixel(const std::uint8_t* rgb);

// Logits [1 - a - r, a, r] from the largest per-frame share of amber and red
// pixels. Shares saturate at kOracleSaturation of the frame; amber is capped
// at 0.75 so a clip showing both colors is classed as deconstruction.
inline constexpr double kOracleSaturation = 0.005;
std::vector<double> oracle_classify(const ClipTensor& clip);

}  // namespace tks
