#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "tks/metrics.hpp"
#include "tks/plan.hpp"
#include "tks/roi.hpp"
#include "tks/sampling.hpp"

namespace tks {

enum class Augmentation { none, action, random };

// Everything `plan` and `eval` need to turn a manifest into clips and scores.
struct RunConfig {
  Strategy strategy = Strategy::action_subset;
  std::vector<std::string> subset = kInteractionSubset;
  int frames = kDefaultFrames;
  CropMode crop;
  Augmentation augmentation = Augmentation::none;
  double majority = kDefaultMajority;
  double window = kDefaultWindow;
  RemainderSplit split = RemainderSplit::proportional;
  bool tta = false;
  bool jitter = false;
  std::uint64_t seed = 0;
  F1Scope f1_scope = F1Scope::failure;
};

// Throws ValidationError when a parameter is outside its documented range.
void validate_config(const RunConfig& cfg);

// Plans for one sample under `cfg`: one clip normally, one per subset action
// for single-action, the full test-time set under tta. Crops are attached.
std::vector<SamplingPlan> plans_for_sample(const TaskTimeline& t, const RunConfig& cfg);

// Entry point shared by the tks executable and the tests. Returns the process
// exit code: 0 success, 2 validation failure, 1 anything else.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace tks
