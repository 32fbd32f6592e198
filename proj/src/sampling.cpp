#include "tks/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

#include "tks/error.hpp"

namespace tks {

std::string_view to_string(Strategy s) {
  switch (s) {
    case Strategy::baseline:
      return "baseline";
    case Strategy::action_subset:
      return "action-subset";
    case Strategy::single_action:
      return "single-action";
    case Strategy::variable_rate:
      return "variable-rate";
    case Strategy::random_window:
      return "random-window";
  }
  return "unknown";
}

std::optional<Strategy> parse_strategy(std::string_view text) {
  for (auto s : {Strategy::baseline, Strategy::action_subset, Strategy::single_action, Strategy::variable_rate,
                 Strategy::random_window}) {
    if (to_string(s) == text) return s;
  }
  return std::nullopt;
}

std::vector<FrameIndex> SamplingPlan::frames() const {
  std::vector<FrameIndex> out;
  out.reserve(entries.size());
  for (const auto& e : entries) out.push_back(e.frame);
  return out;
}

namespace {

void check_count(int n) {
  if (n < 1) throw ValidationError("frame count n must be >= 1");
}

void check_majority(double f) {
  if (!(f > 0.5 && f < 1.0)) throw ValidationError("majority fraction must lie in (0.5, 1)");
}

const ActionSegment& require_segment(const TaskTimeline& t, std::string_view name) {
  const ActionSegment* s = t.find_segment(name);
  if (s == nullptr) {
    throw ValidationError("action '" + std::string(name) + "' not found in sample " + t.sample_id);
  }
  return *s;
}

SamplingPlan make_plan(const TaskTimeline& t, Strategy strategy, const std::vector<FrameIndex>& frames,
                       double offset) {
  SamplingPlan plan;
  plan.sample_id = t.sample_id;
  plan.strategy = strategy;
  plan.offset = offset;
  plan.label = t.label;
  plan.entries.reserve(frames.size());
  for (FrameIndex f : frames) {
    const ActionSegment* seg = t.segment_at(f);
    if (seg == nullptr) throw ValidationError("frame " + std::to_string(f) + " is not covered by any segment");
    plan.entries.push_back({f, seg->name, std::nullopt});
  }
  return plan;
}

void append(std::vector<FrameIndex>& out, FrameIndex start, FrameIndex end, int count, double offset) {
  if (count <= 0) return;
  auto part = equidistant(start, end, count, offset);
  out.insert(out.end(), part.begin(), part.end());
}

int round_majority(double f, int n) {
  return std::clamp(static_cast<int>(std::lround(f * n)), 1, n);
}

}  // namespace

std::vector<FrameIndex> equidistant(FrameIndex start, FrameIndex end, int n, double offset) {
  if (start >= end) throw ValidationError("empty range");
  check_count(n);
  if (!(offset >= 0.0 && offset < 1.0)) throw ValidationError("offset must lie in [0, 1)");

  const FrameIndex length = end - start;
  std::vector<FrameIndex> out(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    FrameIndex step;
    if (offset == 0.0) {
      step = (static_cast<FrameIndex>(i) * length) / n;
    } else {
      const double num = static_cast<double>(i) * static_cast<double>(length) + offset * static_cast<double>(length);
      step = static_cast<FrameIndex>(std::floor(num / n));
    }
    out[static_cast<std::size_t>(i)] = start + std::min(step, length - 1);
  }
  return out;
}

std::vector<int> apportion(std::span<const std::int64_t> weights, int total) {
  std::vector<int> out(weights.size(), 0);
  if (total <= 0 || weights.empty()) return out;
  std::int64_t sum = 0;
  for (auto w : weights) {
    if (w < 0) throw ValidationError("apportion weights must be non-negative");
    sum += w;
  }
  if (sum == 0) return out;

  std::vector<std::int64_t> remainder(weights.size());
  int assigned = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    const std::int64_t scaled = weights[i] * total;
    out[i] = static_cast<int>(scaled / sum);
    remainder[i] = scaled % sum;
    assigned += out[i];
  }
  std::vector<std::size_t> order(weights.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
  for (std::size_t k = 0; assigned < total; ++k, ++assigned) ++out[order[k % order.size()]];
  return out;
}

FrameSpan subset_span(const TaskTimeline& t, std::span<const std::string> subset) {
  if (subset.empty()) throw ValidationError("action subset is empty");
  std::vector<int> positions;
  positions.reserve(subset.size());
  std::set<std::string_view> seen;
  for (const auto& name : subset) {
    if (!seen.insert(name).second) throw ValidationError("action '" + name + "' listed twice in subset");
    const int pos = t.segment_position(name);
    if (pos < 0) throw ValidationError("action '" + name + "' not found in sample " + t.sample_id);
    positions.push_back(pos);
  }
  std::sort(positions.begin(), positions.end());
  if (positions.back() - positions.front() + 1 != static_cast<int>(positions.size())) {
    throw ValidationError("action subset is not temporally contiguous in sample " + t.sample_id);
  }
  return {t.segments[static_cast<std::size_t>(positions.front())].start,
          t.segments[static_cast<std::size_t>(positions.back())].end};
}

SamplingPlan plan_baseline(const TaskTimeline& t, int n, double offset) {
  return make_plan(t, Strategy::baseline, equidistant(0, t.frame_count, n, offset), offset);
}

SamplingPlan plan_action_subset(const TaskTimeline& t, std::span<const std::string> subset, int n, double offset) {
  const FrameSpan span = subset_span(t, subset);
  return make_plan(t, Strategy::action_subset, equidistant(span.start, span.end, n, offset), offset);
}

SamplingPlan plan_single_action(const TaskTimeline& t, std::string_view action, int n, double offset) {
  const ActionSegment& seg = require_segment(t, action);
  SamplingPlan plan = make_plan(t, Strategy::single_action, equidistant(seg.start, seg.end, n, offset), offset);
  plan.action = seg.name;
  return plan;
}

int FrameAllocation::total() const noexcept {
  int sum = 0;
  for (const auto& c : counts) sum += c.count;
  return sum;
}

int FrameAllocation::count_of(std::string_view action) const noexcept {
  for (const auto& c : counts) {
    if (c.action == action) return c.count;
  }
  return 0;
}

FrameAllocation allocate_variable_rate(const TaskTimeline& t, std::span<const std::string> subset, int n,
                                       std::string_view selected, double majority, RemainderSplit split) {
  check_count(n);
  check_majority(majority);
  subset_span(t, subset);
  if (std::find(subset.begin(), subset.end(), selected) == subset.end()) {
    throw ValidationError("selected action '" + std::string(selected) + "' is not in the subset");
  }

  std::vector<const ActionSegment*> ordered;
  for (const auto& name : subset) ordered.push_back(t.find_segment(name));
  std::sort(ordered.begin(), ordered.end(),
            [](const ActionSegment* a, const ActionSegment* b) { return a->start < b->start; });

  FrameAllocation alloc;
  if (ordered.size() == 1) {
    alloc.counts.push_back({ordered.front()->name, n});
    return alloc;
  }

  const int majority_count = round_majority(majority, n);
  const int remaining = n - majority_count;

  std::vector<const ActionSegment*> others;
  std::vector<std::int64_t> weights;
  for (const ActionSegment* s : ordered) {
    if (s->name == selected) continue;
    others.push_back(s);
    weights.push_back(split == RemainderSplit::proportional ? s->length() : 1);
  }
  std::vector<int> shares = apportion(weights, remaining);

  // Every other action keeps at least one frame when there are enough to go round.
  if (remaining >= static_cast<int>(others.size())) {
    for (std::size_t i = 0; i < shares.size(); ++i) {
      if (shares[i] != 0) continue;
      auto donor = std::max_element(shares.begin(), shares.end());
      --*donor;
      shares[i] = 1;
    }
  }

  std::size_t k = 0;
  for (const ActionSegment* s : ordered) {
    const int count = s->name == selected ? majority_count : shares[k++];
    alloc.counts.push_back({s->name, count});
  }
  return alloc;
}

SamplingPlan plan_from_allocation(const TaskTimeline& t, const FrameAllocation& alloc, double offset) {
  std::vector<std::pair<const ActionSegment*, int>> parts;
  for (const auto& c : alloc.counts) {
    if (c.count < 0) throw ValidationError("negative frame count for action '" + c.action + "'");
    parts.emplace_back(&require_segment(t, c.action), c.count);
  }
  std::sort(parts.begin(), parts.end(), [](const auto& a, const auto& b) { return a.first->start < b.first->start; });

  std::vector<FrameIndex> frames;
  for (const auto& [seg, count] : parts) append(frames, seg->start, seg->end, count, offset);
  if (frames.empty()) throw ValidationError("frame allocation is empty");
  return make_plan(t, Strategy::variable_rate, frames, offset);
}

SamplingPlan plan_variable_rate(const TaskTimeline& t, std::span<const std::string> subset, int n,
                                std::string_view selected, double majority, double offset, RemainderSplit split) {
  const FrameAllocation alloc = allocate_variable_rate(t, subset, n, selected, majority, split);
  SamplingPlan plan = plan_from_allocation(t, alloc, offset);
  plan.selected = std::string(selected);
  return plan;
}

FrameSpan random_window_bounds(FrameSpan span, FrameIndex center, double window) {
  const FrameIndex width =
      std::max<FrameIndex>(1, std::llround(window * static_cast<double>(span.length())));
  const FrameIndex lo = std::max(center - width / 2, span.start);
  const FrameIndex hi = std::min(center - width / 2 + width, span.end);
  return {lo, std::max(hi, lo + 1)};
}

SamplingPlan plan_random_window(const TaskTimeline& t, std::span<const std::string> subset, int n,
                                FrameIndex center, double window, double majority, double offset) {
  check_count(n);
  check_majority(majority);
  if (!(window > 0.0 && window < 1.0)) throw ValidationError("window fraction must lie in (0, 1)");
  const FrameSpan span = subset_span(t, subset);
  if (center < span.start || center >= span.end) {
    throw ValidationError("window center " + std::to_string(center) + " outside subset span");
  }

  const FrameSpan win = random_window_bounds(span, center, window);
  const std::int64_t flanks[2] = {win.start - span.start, span.end - win.end};

  int window_count = n;
  std::vector<int> flank_counts = {0, 0};
  if (flanks[0] + flanks[1] > 0) {
    window_count = round_majority(majority, n);
    flank_counts = apportion(flanks, n - window_count);
  }

  std::vector<FrameIndex> frames;
  append(frames, span.start, win.start, flank_counts[0], offset);
  append(frames, win.start, win.end, window_count, offset);
  append(frames, win.end, span.end, flank_counts[1], offset);
  std::stable_sort(frames.begin(), frames.end());

  SamplingPlan plan = make_plan(t, Strategy::random_window, frames, offset);
  plan.center = center;
  return plan;
}

std::vector<SamplingPlan> tta_plan_set(const TaskTimeline& t, std::span<const std::string> subset, int n,
                                       double majority, RemainderSplit split) {
  std::vector<SamplingPlan> plans;
  plans.reserve(subset.size() + 1);
  plans.push_back(plan_action_subset(t, subset, n, 0.0));
  for (const auto& action : subset) plans.push_back(plan_variable_rate(t, subset, n, action, majority, 0.0, split));
  for (auto& p : plans) p.group = 0;
  return plans;
}

std::vector<ImagePair> image_pairs(const TaskTimeline& t, PairMode mode, std::span<const std::string> subset) {
  std::vector<ImagePair> out;
  if (mode == PairMode::act_bracket) {
    const ActionSegment& approach = require_segment(t, "Approach");
    const ActionSegment& retract = require_segment(t, "Retract");
    out.push_back({approach.start, retract.end - 1, "Act"});
    return out;
  }
  if (subset.empty()) throw ValidationError("action subset is empty");
  for (const auto& name : subset) {
    const ActionSegment& seg = require_segment(t, name);
    out.push_back({seg.start, seg.end - 1, seg.name});
  }
  return out;
}

double PlanRng::unit() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

std::size_t PlanRng::index(std::size_t k) {
  if (k == 0) throw ValidationError("cannot draw from an empty range");
  const std::uint64_t bound = k;
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t v;
  do {
    v = engine_();
  } while (v >= limit);
  return static_cast<std::size_t>(v % bound);
}

std::uint64_t derive_seed(std::uint64_t base, std::string_view sample_id) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : sample_id) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  std::uint64_t z = base ^ h;
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace tks
