#include "tks/cli.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "tks/clip.hpp"
#include "tks/error.hpp"
#include "tks/labels.hpp"
#include "tks/serialize.hpp"
#include "tks/synth.hpp"

namespace tks {

namespace {

std::vector<std::string> all_actions(const TaskTimeline& t) {
  std::vector<std::string> names;
  for (const auto& s : t.segments) names.push_back(s.name);
  return names;
}

// Per-action label for single-action clips; datasets outside the
// nominal/open/deconstruction label set keep the task label.
std::string clip_label(const TaskTimeline& t, const std::string& action) {
  if (!parse_outcome(t.label)) return t.label;
  return std::string(to_string(action_label(t, action)));
}

CropRect parse_region(const std::string& text) {
  std::vector<int> v;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      v.push_back(std::stoi(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ValidationError("--region must be x1,y1,x2,y2 integers");
    }
  }
  if (v.size() != 4) throw ValidationError("--region must be x1,y1,x2,y2 integers");
  return fixed_crop({v[0], v[1], v[2], v[3]});
}

std::string expand_source(const std::string& pattern, const std::string& sample_id) {
  std::string out = pattern;
  const std::string key = "{sample_id}";
  for (auto pos = out.find(key); pos != std::string::npos; pos = out.find(key, pos + sample_id.size())) {
    out.replace(pos, key.size(), sample_id);
  }
  return out;
}

struct OutputFile {
  std::ofstream file;
  std::ostream* stream = nullptr;

  OutputFile(const std::string& path, std::ostream& fallback) {
    if (path.empty() || path == "-") {
      stream = &fallback;
      return;
    }
    file.open(path);
    if (!file) throw IoError("cannot open " + path + " for writing");
    stream = &file;
  }
};

// ---------------------------------------------------------------- plan

struct PlanArgs {
  std::string manifest;
  std::string out = "-";
  std::string strategy = "action-subset";
  std::vector<std::string> subset = kInteractionSubset;
  int frames = kDefaultFrames;
  std::string crop = "none";
  std::string region = "0,0,1280,560";
  std::string roi_frames = "all";
  std::string augmentation = "none";
  double majority = kDefaultMajority;
  double window = kDefaultWindow;
  std::string split = "proportional";
  bool tta = false;
  bool jitter = false;
  std::uint64_t seed = 0;
};

RunConfig to_config(const PlanArgs& a) {
  RunConfig cfg;
  cfg.strategy = *parse_strategy(a.strategy);
  cfg.subset = a.subset;
  cfg.frames = a.frames;
  cfg.crop.kind = *parse_crop_kind(a.crop);
  if (cfg.crop.kind == CropKind::fixed) cfg.crop.region = parse_region(a.region);
  cfg.crop.roi_frames = a.roi_frames == "sampled" ? RoiFrames::sampled : RoiFrames::all;
  cfg.augmentation = a.augmentation == "action"   ? Augmentation::action
                     : a.augmentation == "random" ? Augmentation::random
                                                  : Augmentation::none;
  cfg.majority = a.majority;
  cfg.window = a.window;
  cfg.split = a.split == "equal" ? RemainderSplit::equal : RemainderSplit::proportional;
  cfg.tta = a.tta;
  cfg.jitter = a.jitter;
  cfg.seed = a.seed;
  return cfg;
}

int cmd_plan(const PlanArgs& args, std::ostream& out, std::ostream& err) {
  const RunConfig cfg = to_config(args);
  validate_config(cfg);
  const ManifestParse parsed = parse_manifest(std::filesystem::path(args.manifest));
  OutputFile sink(args.out, out);

  std::size_t failures = parsed.errors.size();
  for (const auto& e : parsed.errors) err << "invalid record: " << e.to_string() << '\n';
  std::size_t written = 0;
  for (const auto& t : parsed.timelines) {
    try {
      const auto plans = plans_for_sample(t, cfg);
      write_plans(*sink.stream, plans);
      written += plans.size();
    } catch (const ValidationError& e) {
      err << "sample " << t.sample_id << ": " << e.what() << '\n';
      ++failures;
    }
  }
  spdlog::info("wrote {} plan(s) for {} sample(s)", written, parsed.timelines.size());
  return failures == 0 ? 0 : 2;
}

// ---------------------------------------------------------- materialize

struct MaterializeArgs {
  std::string plans;
  std::string source;
  std::string out;
  int size = kDefaultClipSize;
  int height = 0;
  int width = 0;
  int jobs = 1;
};

std::string clip_name(std::size_t index, const SamplingPlan& plan) {
  char prefix[16];
  std::snprintf(prefix, sizeof prefix, "%06zu_", index);
  return prefix + plan.sample_id + ".tksm";
}

int cmd_materialize(const MaterializeArgs& args, std::ostream& err) {
  const int height = args.height > 0 ? args.height : args.size;
  const int width = args.width > 0 ? args.width : args.size;
  if (height < 1 || width < 1) throw ValidationError("clip size must be positive");
  if (args.jobs < 1) throw ValidationError("--jobs must be >= 1");

  const auto plans = read_plans(args.plans);
  std::filesystem::create_directories(args.out);

  std::atomic<std::size_t> next{0};
  std::mutex mu;
  std::vector<std::string> errors;
  auto worker = [&] {
    for (std::size_t i = next++; i < plans.size(); i = next++) {
      const SamplingPlan& plan = plans[i];
      try {
        const auto source = open_frame_source(expand_source(args.source, plan.sample_id));
        const ClipTensor clip = materialize(plan, *source, height, width);
        write_clip(std::filesystem::path(args.out) / clip_name(i, plan), clip);
      } catch (const std::exception& e) {
        std::lock_guard lock(mu);
        errors.push_back("plan " + std::to_string(i) + " (" + plan.sample_id + "): " + e.what());
      }
    }
  };
  const int threads = std::min<int>(args.jobs, static_cast<int>(std::max<std::size_t>(plans.size(), 1)));
  std::vector<std::thread> pool;
  for (int j = 1; j < threads; ++j) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  std::sort(errors.begin(), errors.end());
  for (const auto& e : errors) err << e << '\n';
  spdlog::info("materialized {} of {} clip(s)", plans.size() - errors.size(), plans.size());
  return errors.empty() ? 0 : 1;
}

// ----------------------------------------------------------------- eval

struct EvalArgs {
  std::string manifest;
  std::string predictions;
  bool tta = false;
  std::vector<std::string> classes = {"nominal", "open", "deconstruction"};
  std::string f1_scope = "failure";
  std::string format = "text";
  std::string out;
};

struct PredictionRow {
  std::optional<std::vector<double>> logits;
  std::optional<std::string> label;
};

std::string resolve_prediction(const std::vector<PredictionRow>& rows, const std::vector<std::string>& classes,
                               bool tta, const std::string& key) {
  if (rows.size() > 1 && !tta) throw ValidationError("multiple predictions for " + key + "; pass --tta to average");
  if (rows.size() == 1 && rows.front().label) {
    const std::string& label = *rows.front().label;
    if (std::find(classes.begin(), classes.end(), label) == classes.end()) {
      throw ValidationError("prediction for " + key + " has unknown label '" + label + "'");
    }
    return label;
  }
  std::vector<std::vector<double>> logits;
  for (const auto& r : rows) {
    if (!r.logits) throw ValidationError("averaging " + key + " requires logits on every row");
    if (r.logits->size() != classes.size()) {
      throw ValidationError("prediction for " + key + " has " + std::to_string(r.logits->size()) +
                            " logits, expected " + std::to_string(classes.size()));
    }
    logits.push_back(*r.logits);
  }
  return classes[aggregate_logits(logits).argmax];
}

int cmd_eval(const EvalArgs& args, std::ostream& out, std::ostream& err) {
  const auto scope = parse_f1_scope(args.f1_scope);
  const auto timelines = load_manifest(args.manifest);

  // (sample_id, action or "") -> rows
  std::map<std::pair<std::string, std::string>, std::vector<PredictionRow>> grouped;
  std::ifstream in(args.predictions);
  if (!in) throw IoError("cannot read predictions " + args.predictions);
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const Json j = Json::parse(line);
      PredictionRow row;
      const std::string id = j.at("sample_id").get<std::string>();
      const std::string action = j.contains("action") ? j.at("action").get<std::string>() : "";
      if (j.contains("logits")) row.logits = j.at("logits").get<std::vector<double>>();
      if (j.contains("label")) row.label = j.at("label").get<std::string>();
      if (row.logits.has_value() == row.label.has_value()) {
        throw ValidationError("row needs exactly one of logits or label");
      }
      grouped[{id, action}].push_back(std::move(row));
    } catch (const Json::exception& e) {
      throw ValidationError(args.predictions + " line " + std::to_string(number) + ": " + e.what());
    } catch (const ValidationError& e) {
      throw ValidationError(args.predictions + " line " + std::to_string(number) + ": " + e.what());
    }
  }

  std::vector<std::string> truth;
  std::vector<std::string> pred;
  std::vector<std::string> missing;
  for (const auto& t : timelines) {
    auto first = grouped.lower_bound({t.sample_id, ""});
    std::optional<std::string> whole;
    std::vector<Outcome> per_action;
    for (auto it = first; it != grouped.end() && it->first.first == t.sample_id; ++it) {
      const std::string key = t.sample_id + (it->first.second.empty() ? "" : "/" + it->first.second);
      const std::string label = resolve_prediction(it->second, args.classes, args.tta, key);
      if (it->first.second.empty()) {
        whole = label;
        continue;
      }
      const auto outcome = parse_outcome(label);
      if (!outcome) throw ValidationError("per-action aggregation needs nominal/open/deconstruction labels");
      per_action.push_back(*outcome);
    }
    if (whole && !per_action.empty()) {
      throw ValidationError("sample " + t.sample_id + " has both task-level and per-action predictions");
    }
    if (!whole && per_action.empty()) {
      missing.push_back(t.sample_id);
      continue;
    }
    truth.push_back(t.label);
    pred.push_back(whole ? *whole : std::string(to_string(aggregate_outcomes(per_action))));
  }
  if (!missing.empty()) {
    std::string msg = "missing predictions for " + std::to_string(missing.size()) + " sample(s):";
    for (const auto& id : missing) msg += " " + id;
    throw ValidationError(msg);
  }

  const EvalReport rep = report(confusion(truth, pred, args.classes), *scope);
  for (const auto& d : rep.degenerate) spdlog::debug("0/0 ratio reported as 0: {}", d);
  if (!args.out.empty()) {
    std::ofstream file(args.out);
    if (!file) throw IoError("cannot open " + args.out + " for writing");
    file << report_to_json(rep).dump(2) << '\n';
  }
  if (args.format == "json") {
    out << report_to_json(rep).dump(2) << '\n';
  } else {
    out << report_to_text(rep);
  }
  (void)err;
  return 0;
}

// ---------------------------------------------------------------- synth

struct SynthArgs {
  std::string spec;
  std::string out;
  std::size_t count = 100;
  std::optional<std::uint64_t> seed;
  std::string format = "packed";
};

int cmd_synth(const SynthArgs& args, std::ostream& out) {
  SynthSpec spec;
  if (!args.spec.empty()) {
    std::ifstream in(args.spec);
    if (!in) throw IoError("cannot read synthetic spec " + args.spec);
    Json j;
    try {
      j = Json::parse(in);
    } catch (const Json::exception& e) {
      throw ValidationError(args.spec + ": " + e.what());
    }
    spec = synth_spec_from_json(j);
  }
  if (args.seed) spec.seed = *args.seed;
  const auto samples = generate(spec, args.count);
  write_dataset(samples, args.out, args.format == "png" ? FrameFormat::png : FrameFormat::packed);
  out << "wrote " << samples.size() << " sample(s) to " << args.out << '\n';
  return 0;
}

// ---------------------------------------------------------------- stats

struct Summary {
  std::size_t count = 0;
  double min = 0.0;
  double max = 0.0;
  double sum = 0.0;

  void add(double v) {
    min = count == 0 ? v : std::min(min, v);
    max = count == 0 ? v : std::max(max, v);
    sum += v;
    ++count;
  }
  [[nodiscard]] double mean() const { return count == 0 ? 0.0 : sum / static_cast<double>(count); }
};

int cmd_stats(const std::string& manifest, std::ostream& out) {
  const auto timelines = load_manifest(manifest);
  Summary duration;
  Summary frames;
  std::map<std::string, std::size_t> labels;
  std::vector<std::string> action_order;
  std::map<std::string, Summary> lengths;
  for (const auto& t : timelines) {
    duration.add(t.duration_seconds());
    frames.add(static_cast<double>(t.frame_count));
    ++labels[t.label];
    for (const auto& s : t.segments) {
      if (!lengths.contains(s.name)) action_order.push_back(s.name);
      lengths[s.name].add(static_cast<double>(s.length()));
    }
  }

  out << std::fixed << std::setprecision(2);
  out << "records: " << timelines.size() << '\n';
  out << "duration_s: min " << duration.min << " mean " << duration.mean() << " max " << duration.max << '\n';
  out << "frames: min " << frames.min << " mean " << frames.mean() << " max " << frames.max << '\n';
  out << '\n' << std::left;
  out << std::setw(10) << "Split" << std::right << std::setw(10) << "Nominal" << std::setw(16) << "Deconstruction"
      << std::setw(8) << "Open" << std::setw(8) << "Total" << '\n';
  out << std::left << std::setw(10) << "all" << std::right << std::setw(10) << labels["nominal"] << std::setw(16)
      << labels["deconstruction"] << std::setw(8) << labels["open"] << std::setw(8) << timelines.size() << '\n';
  for (const auto& [label, n] : labels) {
    if (label != "nominal" && label != "open" && label != "deconstruction" && n > 0) {
      out << "other label " << label << ": " << n << '\n';
    }
  }
  out << '\n' << "segment lengths (frames):" << '\n';
  for (const auto& name : action_order) {
    const Summary& s = lengths[name];
    out << "  " << std::left << std::setw(18) << name << std::right << " count " << s.count << " min " << s.min
        << " mean " << s.mean() << " max " << s.max << '\n';
  }
  return 0;
}

}  // namespace

void validate_config(const RunConfig& cfg) {
  if (cfg.frames < 1) throw ValidationError("--frames must be >= 1");
  if (!(cfg.majority > 0.5 && cfg.majority < 1.0)) throw ValidationError("--majority must lie in (0.5, 1)");
  if (!(cfg.window > 0.0 && cfg.window < 1.0)) throw ValidationError("--window must lie in (0, 1)");
  if (cfg.strategy != Strategy::baseline && cfg.subset.empty()) throw ValidationError("--subset is empty");
  if (cfg.strategy == Strategy::variable_rate || cfg.strategy == Strategy::random_window) {
    throw ValidationError("use --augmentation for variable-rate sampling");
  }
  if (cfg.tta && cfg.augmentation != Augmentation::none) {
    throw ValidationError("--tta is a test-time setting and cannot be combined with --augmentation");
  }
  if (cfg.tta && cfg.strategy == Strategy::single_action) {
    throw ValidationError("--tta does not apply to single-action clips");
  }
  if (cfg.augmentation != Augmentation::none && cfg.strategy == Strategy::single_action) {
    throw ValidationError("--augmentation does not apply to single-action clips");
  }
  if (cfg.crop.kind == CropKind::fixed) fixed_crop(cfg.crop.region);
}

std::vector<SamplingPlan> plans_for_sample(const TaskTimeline& t, const RunConfig& cfg) {
  validate_config(cfg);
  const std::uint64_t seed = derive_seed(cfg.seed, t.sample_id);
  PlanRng rng(seed);
  const bool random_offset = cfg.jitter || cfg.augmentation != Augmentation::none;
  auto draw_offset = [&] { return random_offset ? rng.unit() : 0.0; };
  const std::vector<std::string> subset = cfg.strategy == Strategy::baseline ? all_actions(t) : cfg.subset;

  std::vector<SamplingPlan> plans;
  if (cfg.strategy == Strategy::single_action) {
    for (const auto& action : subset) {
      SamplingPlan p = plan_single_action(t, action, cfg.frames, draw_offset());
      p.label = clip_label(t, action);
      plans.push_back(std::move(p));
    }
  } else if (cfg.tta) {
    plans = tta_plan_set(t, subset, cfg.frames, cfg.majority, cfg.split);
    if (cfg.strategy == Strategy::baseline) plans.front().strategy = Strategy::baseline;
  } else if (cfg.augmentation == Augmentation::action) {
    const std::string& selected = subset[rng.index(subset.size())];
    plans.push_back(plan_variable_rate(t, subset, cfg.frames, selected, cfg.majority, draw_offset(), cfg.split));
  } else if (cfg.augmentation == Augmentation::random) {
    const FrameSpan span = subset_span(t, subset);
    const FrameIndex center = span.start + static_cast<FrameIndex>(rng.index(static_cast<std::size_t>(span.length())));
    plans.push_back(plan_random_window(t, subset, cfg.frames, center, cfg.window, cfg.majority, draw_offset()));
  } else if (cfg.strategy == Strategy::baseline) {
    plans.push_back(plan_baseline(t, cfg.frames, draw_offset()));
  } else {
    plans.push_back(plan_action_subset(t, subset, cfg.frames, draw_offset()));
  }

  for (auto& p : plans) {
    p.seed = seed;
    p = attach_crops(p, t, cfg.crop);
  }
  return plans;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Task-knowledge frame selection, clip materialization and evaluation for robot failure videos"};
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for every subcommand");

  PlanArgs plan;
  auto* plan_cmd = app.add_subcommand("plan", "Write one sampling plan per clip as JSON lines");
  plan_cmd->add_option("--manifest", plan.manifest, "Manifest (JSON lines)")->required();
  plan_cmd->add_option("--out", plan.out, "Output file, - for stdout");
  plan_cmd->add_option("--strategy", plan.strategy, "Frame selection strategy")
      ->check(CLI::IsMember({"baseline", "action-subset", "single-action"}));
  plan_cmd->add_option("--subset", plan.subset, "Actions to sample from (comma separated)")->delimiter(',');
  plan_cmd->add_option("--frames", plan.frames, "Frames per clip");
  plan_cmd->add_option("--crop", plan.crop, "Crop mode")->check(CLI::IsMember({"none", "fixed", "roi"}));
  plan_cmd->add_option("--region", plan.region, "Fixed crop region x1,y1,x2,y2");
  plan_cmd->add_option("--roi-frames", plan.roi_frames, "Frames whose boxes form an action's ROI")
      ->check(CLI::IsMember({"all", "sampled"}));
  plan_cmd->add_option("--augmentation", plan.augmentation, "Training-time variable frame-rate augmentation")
      ->check(CLI::IsMember({"none", "action", "random"}));
  plan_cmd->add_option("--majority", plan.majority, "Share of frames drawn from the high-rate action or window");
  plan_cmd->add_option("--window", plan.window, "Random window width as a fraction of the sampled span");
  plan_cmd->add_option("--split", plan.split, "How remaining frames are spread over the other actions")
      ->check(CLI::IsMember({"proportional", "equal"}));
  plan_cmd->add_flag("--tta", plan.tta, "Emit the test-time augmentation plan set");
  plan_cmd->add_flag("--jitter", plan.jitter, "Draw a random start offset per sample");
  plan_cmd->add_option("--seed", plan.seed, "Base seed for training-time draws");

  MaterializeArgs mat;
  auto* mat_cmd = app.add_subcommand("materialize", "Write one TKSM clip per plan");
  mat_cmd->add_option("--plans", mat.plans, "Plans (JSON lines)")->required();
  mat_cmd->add_option("--source", mat.source,
                      "Frame source per sample; {sample_id} is substituted (packed file, directory or %d pattern)")
      ->required();
  mat_cmd->add_option("--out", mat.out, "Output directory")->required();
  mat_cmd->add_option("--size", mat.size, "Square clip side in pixels");
  mat_cmd->add_option("--height", mat.height, "Clip height (overrides --size when > 0)");
  mat_cmd->add_option("--width", mat.width, "Clip width (overrides --size when > 0)");
  mat_cmd->add_option("--jobs", mat.jobs, "Clips materialized in parallel");

  EvalArgs ev;
  auto* eval_cmd = app.add_subcommand("eval", "Join predictions with ground truth and report metrics");
  eval_cmd->add_option("--manifest", ev.manifest, "Manifest (JSON lines)")->required();
  eval_cmd->add_option("--predictions", ev.predictions,
                       "JSON lines {sample_id, action?, logits | label}")
      ->required();
  eval_cmd->add_flag("--tta", ev.tta, "Average logits over repeated rows before argmax");
  eval_cmd->add_option("--classes", ev.classes, "Class names in logit order")->delimiter(',');
  eval_cmd->add_option("--f1-scope", ev.f1_scope, "Classes averaged into F1")
      ->check(CLI::IsMember({"failure", "all"}));
  eval_cmd->add_option("--format", ev.format, "Report format on stdout")->check(CLI::IsMember({"text", "json"}));
  eval_cmd->add_option("--out", ev.out, "Also write the JSON report here");

  SynthArgs syn;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic pick-and-place dataset");
  synth_cmd->add_option("--spec", syn.spec, "Generator spec (JSON); built-in defaults when omitted");
  synth_cmd->add_option("--out", syn.out, "Output directory")->required();
  synth_cmd->add_option("--count", syn.count, "Number of samples");
  synth_cmd->add_option("--seed", syn.seed, "Override the spec seed");
  synth_cmd->add_option("--format", syn.format, "Frame storage")->check(CLI::IsMember({"packed", "png"}));

  std::string stats_manifest;
  auto* stats_cmd = app.add_subcommand("stats", "Print duration, label and segment-length statistics");
  stats_cmd->add_option("--manifest", stats_manifest, "Manifest (JSON lines)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*plan_cmd) return cmd_plan(plan, out, err);
    if (*mat_cmd) return cmd_materialize(mat, err);
    if (*eval_cmd) return cmd_eval(ev, out, err);
    if (*synth_cmd) return cmd_synth(syn, out);
    if (*stats_cmd) return cmd_stats(stats_manifest, out);
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}

}  // namespace tks
