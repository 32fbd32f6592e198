#include "tks/serialize.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include "tks/error.hpp"

namespace tks {

namespace {

void require_keys(const Json& j, std::string_view what, std::initializer_list<std::string_view> required,
                  std::initializer_list<std::string_view> optional) {
  if (!j.is_object()) throw ValidationError(std::string(what) + " must be an object");
  for (auto key : required) {
    if (!j.contains(key)) throw ValidationError(std::string(what) + ": missing key '" + std::string(key) + "'");
  }
  for (const auto& [key, value] : j.items()) {
    const bool known = std::find(required.begin(), required.end(), key) != required.end() ||
                       std::find(optional.begin(), optional.end(), key) != optional.end();
    if (!known) throw ValidationError(std::string(what) + ": unknown key '" + key + "'");
  }
}

template <typename T>
T get_as(const Json& j, std::string_view key, std::string_view what) {
  const Json& v = j.at(key);
  if constexpr (std::is_same_v<T, std::string>) {
    if (!v.is_string()) throw ValidationError(std::string(what) + "." + std::string(key) + " must be a string");
  } else if constexpr (std::is_same_v<T, double>) {
    if (!v.is_number()) throw ValidationError(std::string(what) + "." + std::string(key) + " must be a number");
  } else if constexpr (std::is_same_v<T, std::uint64_t>) {
    if (!v.is_number_unsigned()) {
      throw ValidationError(std::string(what) + "." + std::string(key) + " must be a non-negative integer");
    }
  } else {
    if (!v.is_number_integer()) throw ValidationError(std::string(what) + "." + std::string(key) + " must be an integer");
  }
  return v.get<T>();
}

FrameIndex parse_frame_key(const std::string& key) {
  if (key.empty() || key.size() > 18 || !std::all_of(key.begin(), key.end(), [](unsigned char c) { return std::isdigit(c); })) {
    throw ValidationError("track frame key '" + key + "' is not a frame index");
  }
  return std::stoll(key);
}

Box parse_box(const Json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 4 || !std::all_of(j.begin(), j.end(), [](const Json& v) { return v.is_number_integer(); })) {
    throw ValidationError(where + " must be [x1, y1, x2, y2] integers");
  }
  return {j[0].get<int>(), j[1].get<int>(), j[2].get<int>(), j[3].get<int>()};
}

}  // namespace

Json timeline_to_json(const TaskTimeline& t) {
  Json j;
  j["sample_id"] = t.sample_id;
  j["frame_count"] = t.frame_count;
  j["fps"] = t.fps;
  j["width"] = t.width;
  j["height"] = t.height;
  j["label"] = t.label;
  Json segs = Json::array();
  for (const auto& s : t.segments) segs.push_back({{"name", s.name}, {"start", s.start}, {"end", s.end}});
  j["segments"] = std::move(segs);
  Json tracks = Json::object();
  for (const auto& [role, track] : t.tracks) {
    Json boxes = Json::object();
    for (const auto& [frame, b] : track) boxes[std::to_string(frame)] = {b.x1, b.y1, b.x2, b.y2};
    tracks[std::string(to_string(role))] = std::move(boxes);
  }
  j["tracks"] = std::move(tracks);
  if (t.failure) {
    Json f;
    f["cls"] = std::string(to_string(t.failure->cls));
    f["t_first_visible"] = t.failure->t_first_visible;
    if (t.failure->t_open) f["t_open"] = *t.failure->t_open;
    if (t.failure->t_end_visible) f["t_end_visible"] = *t.failure->t_end_visible;
    j["failure"] = std::move(f);
  }
  return j;
}

TaskTimeline timeline_from_json(const Json& j) {
  require_keys(j, "record", {"sample_id", "frame_count", "fps", "segments", "label"},
               {"width", "height", "tracks", "failure"});
  TaskTimeline t;
  t.sample_id = get_as<std::string>(j, "sample_id", "record");
  t.frame_count = get_as<FrameIndex>(j, "frame_count", "record");
  t.fps = get_as<double>(j, "fps", "record");
  t.label = get_as<std::string>(j, "label", "record");
  if (j.contains("width")) t.width = get_as<int>(j, "width", "record");
  if (j.contains("height")) t.height = get_as<int>(j, "height", "record");

  const Json& segs = j.at("segments");
  if (!segs.is_array()) throw ValidationError("record.segments must be an array");
  for (std::size_t i = 0; i < segs.size(); ++i) {
    const std::string what = "segments[" + std::to_string(i) + "]";
    require_keys(segs[i], what, {"name", "start", "end"}, {});
    t.segments.push_back({get_as<std::string>(segs[i], "name", what), get_as<FrameIndex>(segs[i], "start", what),
                          get_as<FrameIndex>(segs[i], "end", what)});
  }

  if (j.contains("tracks")) {
    const Json& tracks = j.at("tracks");
    if (!tracks.is_object()) throw ValidationError("record.tracks must be an object");
    for (const auto& [name, boxes] : tracks.items()) {
      const auto role = parse_track_role(name);
      if (!role) throw ValidationError("unknown track role '" + name + "'");
      if (!boxes.is_object()) throw ValidationError("tracks." + name + " must map frame -> box");
      BoundingBoxTrack& track = t.tracks[*role];
      for (const auto& [key, box] : boxes.items()) {
        track[parse_frame_key(key)] = parse_box(box, "tracks." + name + "[" + key + "]");
      }
    }
  }

  if (j.contains("failure") && !j.at("failure").is_null()) {
    const Json& f = j.at("failure");
    require_keys(f, "failure", {"cls", "t_first_visible"}, {"t_open", "t_end_visible"});
    const auto cls = parse_failure_class(get_as<std::string>(f, "cls", "failure"));
    if (!cls) throw ValidationError("failure.cls must be open or deconstruction");
    FailureAnnotation ann;
    ann.cls = *cls;
    ann.t_first_visible = get_as<FrameIndex>(f, "t_first_visible", "failure");
    if (f.contains("t_open") && !f.at("t_open").is_null()) ann.t_open = get_as<FrameIndex>(f, "t_open", "failure");
    if (f.contains("t_end_visible")) ann.t_end_visible = get_as<FrameIndex>(f, "t_end_visible", "failure");
    t.failure = ann;
  }
  return t;
}

std::string serialize_timeline(const TaskTimeline& t) {
  return timeline_to_json(t).dump();
}

std::string RecordError::to_string() const {
  std::ostringstream os;
  os << "line " << line;
  if (!sample_id.empty()) os << " (" << sample_id << ")";
  os << ":";
  for (std::size_t i = 0; i < messages.size(); ++i) os << (i == 0 ? " " : "; ") << messages[i];
  return os.str();
}

ManifestParse parse_manifest(std::istream& in) {
  ManifestParse out;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (std::all_of(line.begin(), line.end(), [](unsigned char c) { return std::isspace(c); })) continue;
    RecordError err;
    err.line = number;
    try {
      TaskTimeline t = timeline_from_json(Json::parse(line));
      err.sample_id = t.sample_id;
      for (const auto& v : validate_timeline(t)) err.messages.push_back(v.to_string());
      if (err.messages.empty()) {
        out.timelines.push_back(std::move(t));
        continue;
      }
    } catch (const Json::exception& e) {
      err.messages.push_back(std::string("malformed record: ") + e.what());
    } catch (const ValidationError& e) {
      err.messages.push_back(std::string("malformed record: ") + e.what());
    }
    out.errors.push_back(std::move(err));
  }
  return out;
}

ManifestParse parse_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read manifest " + path.string());
  return parse_manifest(in);
}

std::vector<TaskTimeline> load_manifest(const std::filesystem::path& path) {
  ManifestParse parsed = parse_manifest(path);
  if (!parsed.ok()) {
    std::string msg = path.string() + ": " + std::to_string(parsed.errors.size()) + " invalid record(s)";
    for (const auto& e : parsed.errors) msg += "\n  " + e.to_string();
    throw ValidationError(msg);
  }
  return std::move(parsed.timelines);
}

void write_manifest(std::ostream& out, std::span<const TaskTimeline> timelines) {
  for (const auto& t : timelines) out << serialize_timeline(t) << '\n';
}

void write_manifest(const std::filesystem::path& path, std::span<const TaskTimeline> timelines) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write manifest " + path.string());
  write_manifest(out, timelines);
  if (!out) throw IoError("write failed: " + path.string());
}

Json plan_to_json(const SamplingPlan& plan) {
  Json j;
  j["sample_id"] = plan.sample_id;
  j["strategy"] = std::string(to_string(plan.strategy));
  j["seed"] = plan.seed;
  j["offset"] = plan.offset;
  j["label"] = plan.label;
  j["n"] = plan.n();
  if (plan.action) j["action"] = *plan.action;
  if (plan.selected) j["selected"] = *plan.selected;
  if (plan.center) j["center"] = *plan.center;
  if (plan.group) j["group"] = *plan.group;
  if (!plan.crop_mode.empty()) j["crop_mode"] = plan.crop_mode;
  Json entries = Json::array();
  for (const auto& e : plan.entries) {
    Json je = {{"frame", e.frame}, {"action", e.action}};
    if (e.crop) je["crop"] = {e.crop->x1, e.crop->y1, e.crop->x2, e.crop->y2};
    entries.push_back(std::move(je));
  }
  j["entries"] = std::move(entries);
  return j;
}

SamplingPlan plan_from_json(const Json& j) {
  require_keys(j, "plan", {"sample_id", "strategy", "seed", "offset", "label", "n", "entries"},
               {"action", "selected", "center", "group", "crop_mode"});
  SamplingPlan p;
  p.sample_id = get_as<std::string>(j, "sample_id", "plan");
  const auto strategy = parse_strategy(get_as<std::string>(j, "strategy", "plan"));
  if (!strategy) throw ValidationError("plan.strategy is not a known strategy");
  p.strategy = *strategy;
  p.seed = get_as<std::uint64_t>(j, "seed", "plan");
  p.offset = get_as<double>(j, "offset", "plan");
  p.label = get_as<std::string>(j, "label", "plan");
  if (j.contains("action")) p.action = get_as<std::string>(j, "action", "plan");
  if (j.contains("selected")) p.selected = get_as<std::string>(j, "selected", "plan");
  if (j.contains("center")) p.center = get_as<FrameIndex>(j, "center", "plan");
  if (j.contains("group")) p.group = get_as<int>(j, "group", "plan");
  if (j.contains("crop_mode")) p.crop_mode = get_as<std::string>(j, "crop_mode", "plan");
  const Json& entries = j.at("entries");
  if (!entries.is_array()) throw ValidationError("plan.entries must be an array");
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const std::string what = "entries[" + std::to_string(i) + "]";
    require_keys(entries[i], what, {"frame", "action"}, {"crop"});
    PlanEntry e{get_as<FrameIndex>(entries[i], "frame", what), get_as<std::string>(entries[i], "action", what),
                std::nullopt};
    if (entries[i].contains("crop")) {
      const Box b = parse_box(entries[i].at("crop"), what + ".crop");
      e.crop = CropRect{b.x1, b.y1, b.x2, b.y2};
    }
    p.entries.push_back(std::move(e));
  }
  if (get_as<std::uint64_t>(j, "n", "plan") != p.entries.size()) {
    throw ValidationError("plan.n does not match the number of entries");
  }
  return p;
}

void write_plans(std::ostream& out, std::span<const SamplingPlan> plans) {
  for (const auto& p : plans) out << plan_to_json(p).dump() << '\n';
}

std::vector<SamplingPlan> read_plans(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read plans " + path.string());
  std::vector<SamplingPlan> plans;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (std::all_of(line.begin(), line.end(), [](unsigned char c) { return std::isspace(c); })) continue;
    try {
      plans.push_back(plan_from_json(Json::parse(line)));
    } catch (const Json::exception& e) {
      throw ValidationError(path.string() + " line " + std::to_string(number) + ": " + e.what());
    } catch (const ValidationError& e) {
      throw ValidationError(path.string() + " line " + std::to_string(number) + ": " + e.what());
    }
  }
  return plans;
}

Json report_to_json(const EvalReport& r) {
  const auto& classes = r.confusion.classes;
  Json j;
  j["classes"] = classes;
  Json rows = Json::array();
  for (std::size_t i = 0; i < classes.size(); ++i) {
    Json row = Json::array();
    for (std::size_t k = 0; k < classes.size(); ++k) row.push_back(r.confusion.at(i, k));
    rows.push_back(std::move(row));
  }
  j["confusion"] = std::move(rows);
  for (std::size_t i = 0; i < classes.size(); ++i) {
    j["precision"][classes[i]] = r.precision[i];
    j["recall"][classes[i]] = r.recall[i];
    j["fpr"][classes[i]] = r.fpr[i];
  }
  j["f1"] = r.f1;
  j["f1_scope"] = std::string(to_string(r.f1_scope));
  j["negative_class"] = r.negative_class ? Json(classes[*r.negative_class]) : Json(nullptr);
  j["samples"] = r.confusion.total();
  j["degenerate"] = r.degenerate;
  return j;
}

std::string report_to_text(const EvalReport& r) {
  const auto& classes = r.confusion.classes;
  std::ostringstream os;
  os << std::fixed << std::setprecision(6);
  os << "samples=" << r.confusion.total() << '\n';
  os << "f1=" << r.f1 << '\n';
  os << "f1_scope=" << to_string(r.f1_scope) << '\n';
  for (std::size_t i = 0; i < classes.size(); ++i) {
    os << "precision." << classes[i] << '=' << r.precision[i] << '\n';
    os << "recall." << classes[i] << '=' << r.recall[i] << '\n';
    os << "fpr." << classes[i] << '=' << r.fpr[i] << '\n';
  }
  for (std::size_t i = 0; i < classes.size(); ++i) {
    for (std::size_t k = 0; k < classes.size(); ++k) {
      os << "confusion." << classes[i] << '.' << classes[k] << '=' << r.confusion.at(i, k) << '\n';
    }
  }
  os << "degenerate=";
  for (std::size_t i = 0; i < r.degenerate.size(); ++i) os << (i ? "," : "") << r.degenerate[i];
  os << '\n';
  return os.str();
}

}  // namespace tks
