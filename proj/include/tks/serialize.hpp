#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "tks/metrics.hpp"
#include "tks/plan.hpp"
#include "tks/timeline.hpp"

namespace tks {

using Json = nlohmann::json;

// Manifest record <-> JSON. timeline_from_json is strict: unknown keys,
// missing required keys and wrong types throw ValidationError. It does not
// run validate_timeline.
Json timeline_to_json(const TaskTimeline& t);
TaskTimeline timeline_from_json(const Json& j);

// Canonical single-line form: sorted keys, shortest round-trip floats.
std::string serialize_timeline(const TaskTimeline& t);

struct RecordError {
  std::size_t line = 0;  // 1-based
  std::string sample_id;  // empty when the record could not be read
  std::vector<std::string> messages;

  [[nodiscard]] std::string to_string() const;
};

// Every well-formed, valid record is kept; the rest are reported with their
// line numbers. Blank lines are skipped.
struct ManifestParse {
  std::vector<TaskTimeline> timelines;
  std::vector<RecordError> errors;

  [[nodiscard]] bool ok() const noexcept { return errors.empty(); }
};

ManifestParse parse_manifest(std::istream& in);
ManifestParse parse_manifest(const std::filesystem::path& path);

// Throws ValidationError listing every failed record.
std::vector<TaskTimeline> load_manifest(const std::filesystem::path& path);

void write_manifest(std::ostream& out, std::span<const TaskTimeline> timelines);
void write_manifest(const std::filesystem::path& path, std::span<const TaskTimeline> timelines);

Json plan_to_json(const SamplingPlan& plan);
SamplingPlan plan_from_json(const Json& j);
void write_plans(std::ostream& out, std::span<const SamplingPlan> plans);
std::vector<SamplingPlan> read_plans(const std::filesystem::path& path);

Json report_to_json(const EvalReport& r);
// One key=value pair per line.
std::string report_to_text(const EvalReport& r);

}  // namespace tks
