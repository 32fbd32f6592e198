#include "tks/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>

#include "tks/error.hpp"
#include "tks/sampling.hpp"

namespace tks {

namespace {

void check_range(const LengthRange& r, const std::string& what) {
  if (r.min < 1 || r.max < r.min) throw ValidationError(what + " must satisfy 1 <= min <= max");
}

void check_probability(double p, const std::string& what) {
  if (!(p >= 0.0 && p <= 1.0)) throw ValidationError(what + " must lie in [0, 1]");
}

FrameIndex uniform_in(PlanRng& rng, LengthRange r) {
  return r.min + static_cast<FrameIndex>(rng.index(static_cast<std::size_t>(r.max - r.min + 1)));
}

LengthRange range_from_json(const Json& j, const std::string& what) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number_integer() || !j[1].is_number_integer()) {
    throw ValidationError(what + " must be [min, max]");
  }
  return {j[0].get<FrameIndex>(), j[1].get<FrameIndex>()};
}

void paint(Image& img, const Box& b, const std::uint8_t (&c)[3]) {
  img.fill_rect(b.x1, b.y1, b.x2, b.y2, c[0], c[1], c[2]);
}

int effector_center(const SceneLayout& layout, std::string_view action, double progress) {
  const double src = (layout.source_container.x1 + layout.source_container.x2) / 2.0;
  const double dst = (layout.destination_container.x1 + layout.destination_container.x2) / 2.0;
  double x = src;
  if (action == "MoveDestination") {
    x = src + (dst - src) * progress;
  } else if (action == "Wait" || action == "Place") {
    x = dst;
  } else if (action == "MoveSource") {
    x = dst + (src - dst) * progress;
  }
  return static_cast<int>(std::lround(x));
}

}  // namespace

void validate_synth_spec(const SynthSpec& spec) {
  if (spec.width < 40 || spec.height < 40) throw ValidationError("synthetic frames must be at least 40x40");
  if (!(spec.fps > 0.0)) throw ValidationError("fps must be positive");
  if (spec.actions.empty()) throw ValidationError("at least one action is required");
  for (const auto& a : spec.actions) check_range(a.length, "length range of " + a.action);
  check_probability(spec.p_open, "p_open");
  check_probability(spec.p_deconstruction, "p_deconstruction");
  check_probability(spec.p_open_phase, "p_open_phase");
  if (spec.p_open + spec.p_deconstruction > 1.0) throw ValidationError("failure probabilities sum above 1");
  check_range(spec.event_duration, "event_duration");
  check_range(spec.open_phase_duration, "open_phase_duration");
  if (spec.short_event_clip_frames < 0) throw ValidationError("short_event_clip_frames must be >= 0");
  double weight = 0.0;
  for (const auto& [action, w] : spec.event_weights) {
    if (!(w >= 0.0)) throw ValidationError("event weight of " + action + " must be >= 0");
    const bool known = std::any_of(spec.actions.begin(), spec.actions.end(),
                                   [&](const ActionLengthRange& a) { return a.action == action; });
    if (!known && w > 0.0) throw ValidationError("event weight names unknown action " + action);
    weight += w;
  }
  if (spec.p_open + spec.p_deconstruction > 0.0 && weight <= 0.0) {
    throw ValidationError("failures requested but no action carries event weight");
  }
}

SynthSpec synth_spec_from_json(const Json& j) {
  if (!j.is_object()) throw ValidationError("synthetic spec must be a JSON object");
  static const std::set<std::string> keys = {"seed", "width", "height", "fps", "actions", "p_open",
                                             "p_deconstruction", "p_open_phase", "event_duration",
                                             "open_phase_duration", "event_weights", "short_event_clip_frames"};
  for (const auto& [key, value] : j.items()) {
    if (!keys.contains(key)) throw ValidationError("synthetic spec: unknown key '" + key + "'");
  }
  SynthSpec s;
  try {
    if (j.contains("seed")) s.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("width")) s.width = j.at("width").get<int>();
    if (j.contains("height")) s.height = j.at("height").get<int>();
    if (j.contains("fps")) s.fps = j.at("fps").get<double>();
    if (j.contains("p_open")) s.p_open = j.at("p_open").get<double>();
    if (j.contains("p_deconstruction")) s.p_deconstruction = j.at("p_deconstruction").get<double>();
    if (j.contains("p_open_phase")) s.p_open_phase = j.at("p_open_phase").get<double>();
    if (j.contains("short_event_clip_frames")) s.short_event_clip_frames = j.at("short_event_clip_frames").get<int>();
    if (j.contains("event_duration")) s.event_duration = range_from_json(j.at("event_duration"), "event_duration");
    if (j.contains("open_phase_duration")) {
      s.open_phase_duration = range_from_json(j.at("open_phase_duration"), "open_phase_duration");
    }
    if (j.contains("actions")) {
      s.actions.clear();
      for (const auto& a : j.at("actions")) {
        s.actions.push_back({a.at("name").get<std::string>(), {a.at("min").get<FrameIndex>(), a.at("max").get<FrameIndex>()}});
      }
    }
    if (j.contains("event_weights")) s.event_weights = j.at("event_weights").get<std::map<std::string, double>>();
  } catch (const Json::exception& e) {
    throw ValidationError(std::string("synthetic spec: ") + e.what());
  }
  validate_synth_spec(s);
  return s;
}

Json synth_spec_to_json(const SynthSpec& s) {
  Json j;
  j["seed"] = s.seed;
  j["width"] = s.width;
  j["height"] = s.height;
  j["fps"] = s.fps;
  j["p_open"] = s.p_open;
  j["p_deconstruction"] = s.p_deconstruction;
  j["p_open_phase"] = s.p_open_phase;
  j["event_duration"] = {s.event_duration.min, s.event_duration.max};
  j["open_phase_duration"] = {s.open_phase_duration.min, s.open_phase_duration.max};
  j["event_weights"] = s.event_weights;
  j["short_event_clip_frames"] = s.short_event_clip_frames;
  Json actions = Json::array();
  for (const auto& a : s.actions) actions.push_back({{"name", a.action}, {"min", a.length.min}, {"max", a.length.max}});
  j["actions"] = std::move(actions);
  return j;
}

SceneLayout SceneLayout::for_frame(int width, int height) {
  SceneLayout l;
  const int top = height * 55 / 100;
  const int bottom = height * 95 / 100;
  l.source_container = {width * 5 / 100, top, width * 35 / 100, bottom};
  l.destination_container = {width * 65 / 100, top, width * 95 / 100, bottom};
  l.effector_size = std::max(4, height / 6);
  l.effector_top = std::max(1, height / 14);
  l.patch_gap = 2;
  l.patch_height = std::max(4, height / 4);
  return l;
}

Box SceneLayout::patch_for(const Box& effector) const {
  const int top = effector.y2 + patch_gap;
  return {effector.x1, top, effector.x2, top + patch_height};
}

Image SynthSample::render(FrameIndex f) const {
  if (f < 0 || f >= timeline.frame_count) throw IoError("frame " + std::to_string(f) + " not available");
  Image img(timeline.width, timeline.height);
  img.fill(kBackground[0], kBackground[1], kBackground[2]);
  paint(img, layout.source_container, kSourceColor);
  paint(img, layout.destination_container, kDestinationColor);
  const Box& eff = effector_path[static_cast<std::size_t>(f)];
  paint(img, eff, kEffectorColor);
  if (event) {
    const Box patch = layout.patch_for(eff);
    if (f >= event->visible_from && f < event->visible_to) {
      paint(img, patch, event->cls == FailureClass::open ? kAmber : kRed);
    } else if (event->amber_from && f >= *event->amber_from && f < event->visible_from) {
      paint(img, patch, kAmber);
    }
  }
  return img;
}

std::unique_ptr<FrameSource> SynthSample::source() const {
  return std::make_unique<GeneratedFrameSource>(timeline.frame_count, timeline.width, timeline.height,
                                                [this](FrameIndex f) { return render(f); });
}

SynthSample generate_sample(const SynthSpec& spec, std::size_t index) {
  validate_synth_spec(spec);
  PlanRng rng(spec.seed ^ static_cast<std::uint64_t>(index));

  SynthSample s;
  TaskTimeline& t = s.timeline;
  char id[32];
  std::snprintf(id, sizeof id, "synth-%06zu", index);
  t.sample_id = id;
  t.fps = spec.fps;
  t.width = spec.width;
  t.height = spec.height;
  FrameIndex cursor = 0;
  for (const auto& a : spec.actions) {
    const FrameIndex len = uniform_in(rng, a.length);
    t.segments.push_back({a.action, cursor, cursor + len});
    cursor += len;
  }
  t.frame_count = cursor;

  s.layout = SceneLayout::for_frame(spec.width, spec.height);
  s.effector_path.reserve(static_cast<std::size_t>(t.frame_count));
  const int size = s.layout.effector_size;
  for (const auto& seg : t.segments) {
    for (FrameIndex f = seg.start; f < seg.end; ++f) {
      const double progress = static_cast<double>(f - seg.start + 1) / static_cast<double>(seg.length());
      const int cx = effector_center(s.layout, seg.name, progress);
      const int x1 = std::clamp(cx - size / 2, 0, spec.width - size);
      s.effector_path.push_back({x1, s.layout.effector_top, x1 + size, s.layout.effector_top + size});
    }
  }
  auto& effector = t.tracks[TrackRole::end_effector];
  for (FrameIndex f = 0; f < t.frame_count; ++f) effector[f] = s.effector_path[static_cast<std::size_t>(f)];
  t.tracks[TrackRole::source_container][0] = s.layout.source_container;
  t.tracks[TrackRole::destination_container][0] = s.layout.destination_container;

  const double u = rng.unit();
  t.label = "nominal";
  if (u >= spec.p_deconstruction + spec.p_open) return s;
  const FailureClass cls = u < spec.p_deconstruction ? FailureClass::deconstruction : FailureClass::open;

  // Event start: pick an action by weight, then a frame inside it.
  std::vector<const ActionSegment*> weighted;
  std::vector<double> weights;
  FrameIndex lo = t.frame_count;
  FrameIndex hi = 0;
  for (const auto& seg : t.segments) {
    auto it = spec.event_weights.find(seg.name);
    if (it == spec.event_weights.end() || it->second <= 0.0) continue;
    weighted.push_back(&seg);
    weights.push_back(it->second);
    lo = std::min(lo, seg.start);
    hi = std::max(hi, seg.end);
  }
  double pick = rng.unit() * std::accumulate(weights.begin(), weights.end(), 0.0);
  std::size_t chosen = 0;
  while (chosen + 1 < weights.size() && pick >= weights[chosen]) pick -= weights[chosen++];
  const ActionSegment& seg = *weighted[chosen];
  const FrameIndex start = seg.start + static_cast<FrameIndex>(rng.index(static_cast<std::size_t>(seg.length())));

  LengthRange duration = spec.event_duration;
  if (spec.short_event_clip_frames > 0) {
    const FrameIndex k = spec.short_event_clip_frames;
    duration = {1, std::max<FrameIndex>(1, (hi - lo + k - 1) / k - 1)};
  }
  const FrameIndex end = std::min(start + uniform_in(rng, duration), hi);

  SynthEvent ev;
  ev.cls = cls;
  ev.visible_from = start;
  ev.visible_to = end;
  if (cls == FailureClass::deconstruction && rng.unit() < spec.p_open_phase) {
    const FrameIndex opened = std::max(lo, start - uniform_in(rng, spec.open_phase_duration));
    if (opened < start) ev.amber_from = opened;
  }
  s.event = ev;

  FailureAnnotation ann;
  ann.cls = cls;
  ann.t_first_visible = ev.visible_from;
  ann.t_open = ev.amber_from;
  ann.t_end_visible = ev.visible_to;
  t.failure = ann;
  t.label = std::string(to_string(cls));
  return s;
}

std::vector<SynthSample> generate(const SynthSpec& spec, std::size_t count) {
  validate_synth_spec(spec);
  std::vector<SynthSample> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(generate_sample(spec, i));
  return out;
}

void write_dataset(const std::vector<SynthSample>& samples, const std::filesystem::path& out_dir,
                   FrameFormat format) {
  std::filesystem::create_directories(out_dir / "frames");
  std::vector<TaskTimeline> timelines;
  timelines.reserve(samples.size());
  for (const auto& s : samples) {
    const auto& t = s.timeline;
    if (format == FrameFormat::packed) {
      PackedFrameWriter writer(out_dir / "frames" / (t.sample_id + ".tksf"), t.width, t.height);
      for (FrameIndex f = 0; f < t.frame_count; ++f) writer.write(s.render(f));
      writer.close();
    } else {
      const auto dir = out_dir / "frames" / t.sample_id;
      std::filesystem::create_directories(dir);
      char name[32];
      for (FrameIndex f = 0; f < t.frame_count; ++f) {
        std::snprintf(name, sizeof name, "%06lld.png", static_cast<long long>(f));
        write_png(dir / name, s.render(f));
      }
    }
    timelines.push_back(t);
  }
  write_manifest(out_dir / "manifest.jsonl", timelines);
}

std::optional<EventPatch> repaint_event(const TaskTimeline& t, FrameIndex f) {
  if (!t.failure) return std::nullopt;
  const auto& ann = *t.failure;
  const FrameIndex until = ann.t_end_visible.value_or(t.frame_count);
  Outcome color;
  if (f >= ann.t_first_visible && f < until) {
    color = ann.cls == FailureClass::open ? Outcome::open : Outcome::deconstruction;
  } else if (ann.t_open && f >= *ann.t_open && f < ann.t_first_visible) {
    color = Outcome::open;
  } else {
    return std::nullopt;
  }
  const BoundingBoxTrack* eff = t.track(TrackRole::end_effector);
  if (eff == nullptr || eff->empty()) throw ValidationError("repaint needs an end_effector track");
  const SceneLayout layout = SceneLayout::for_frame(t.width, t.height);
  return EventPatch{layout.patch_for(box_at(*eff, f)), color};
}

std::vector<FrameIndex> event_frames(const TaskTimeline& t) {
  std::vector<FrameIndex> out;
  if (!t.failure) return out;
  const auto& ann = *t.failure;
  const FrameIndex from = ann.t_open.value_or(ann.t_first_visible);
  const FrameIndex until = ann.t_end_visible.value_or(t.frame_count);
  for (FrameIndex f = from; f < until; ++f) out.push_back(f);
  return out;
}

PixelClass classify_pixel(const std::uint8_t* rgb) {
  const int r = rgb[0];
  const int g = rgb[1];
  const int b = rgb[2];
  if (r >= 160 && g <= 90 && b <= 90) return PixelClass::red;
  if (r >= 180 && g >= 110 && g <= 210 && b <= 90) return PixelClass::amber;
  return PixelClass::other;
}

std::vector<double> oracle_classify(const ClipTensor& clip) {
  const std::size_t pixels_per_frame = static_cast<std::size_t>(clip.height) * clip.width;
  double amber = 0.0;
  double red = 0.0;
  for (std::uint32_t i = 0; i < clip.n && pixels_per_frame > 0; ++i) {
    const auto frame = clip.frame(i);
    std::size_t a = 0;
    std::size_t r = 0;
    for (std::size_t p = 0; p < pixels_per_frame; ++p) {
      switch (classify_pixel(frame.data() + p * clip.channels)) {
        case PixelClass::amber:
          ++a;
          break;
        case PixelClass::red:
          ++r;
          break;
        case PixelClass::other:
          break;
      }
    }
    amber = std::max(amber, static_cast<double>(a) / static_cast<double>(pixels_per_frame));
    red = std::max(red, static_cast<double>(r) / static_cast<double>(pixels_per_frame));
  }
  const double a = 0.75 * std::min(1.0, amber / kOracleSaturation);
  const double r = std::min(1.0, red / kOracleSaturation);
  return {1.0 - a - r, a, r};
}

}  // namespace tks
