#include <doctest.h>

#include <random>

#include "support.hpp"
#include "tks/error.hpp"
#include "tks/roi.hpp"
#include "tks/sampling.hpp"

using namespace tks;
using tks::test::armbench;

namespace {

TaskTimeline tracked() {
  TaskTimeline t = armbench(40);
  t.tracks[TrackRole::source_container] = {{0, {100, 200, 300, 400}}};
  t.tracks[TrackRole::destination_container] = {{0, {700, 200, 900, 400}}};
  t.tracks[TrackRole::end_effector] = {{0, {150, 10, 250, 60}}, {20, {250, 10, 350, 60}}, {100, {650, 10, 800, 60}}};
  return t;
}

std::vector<FrameIndex> range(FrameIndex a, FrameIndex b) {
  std::vector<FrameIndex> out;
  for (FrameIndex f = a; f < b; ++f) out.push_back(f);
  return out;
}

}  // namespace

TEST_CASE("container pairing per action") {
  CHECK(container_role_for("Pick") == TrackRole::source_container);
  CHECK(container_role_for("MoveDestination") == TrackRole::source_container);
  CHECK(container_role_for("Wait") == TrackRole::destination_container);
  CHECK(container_role_for("Place") == TrackRole::destination_container);
  CHECK(container_role_for("MoveSource") == TrackRole::destination_container);
  CHECK_FALSE(container_role_for("Approach").has_value());
}

TEST_CASE("ROI examples") {
  const TaskTimeline t = tracked();
  CHECK(action_roi(t, "Pick", range(0, 40)) == CropRect{100, 0, 350, 560});
  CHECK(action_roi(t, "Wait", range(80, 120)) == CropRect{650, 0, 900, 560});

  TaskTimeline same = armbench(40);
  same.tracks[TrackRole::source_container] = {{0, {400, 100, 500, 200}}};
  same.tracks[TrackRole::end_effector] = {{0, {400, 100, 500, 200}}};
  const std::vector<FrameIndex> one = {5};
  CHECK(action_roi(same, "Pick", one) == CropRect{400, 0, 500, 560});
}

TEST_CASE("ROI errors") {
  TaskTimeline t = tracked();
  const std::vector<FrameIndex> wait = {90};
  CHECK_THROWS_WITH_AS(action_roi(t, "Grasp", wait), doctest::Contains("Grasp"), ValidationError);
  CHECK_THROWS_WITH_AS(action_roi(t, "Wait", std::vector<FrameIndex>{10}), doctest::Contains("outside"), ValidationError);
  t.tracks.erase(TrackRole::destination_container);
  CHECK_THROWS_WITH_AS(action_roi(t, "Wait", wait), doctest::Contains("destination_container"), ValidationError);
}

TEST_CASE("ROI union contains every contributing box and is clamped") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 500; ++trial) {
    TaskTimeline t = armbench(20);
    auto random_box = [&] {
      const int x1 = static_cast<int>(rng() % 1300) - 10;
      const int w = 1 + static_cast<int>(rng() % 300);
      return Box{x1, 5, x1 + w, 50};
    };
    auto& src = t.tracks[TrackRole::source_container];
    auto& eff = t.tracks[TrackRole::end_effector];
    for (int k = 0; k < 3; ++k) src[static_cast<FrameIndex>(rng() % 100)] = random_box();
    for (int k = 0; k < 5; ++k) eff[static_cast<FrameIndex>(rng() % 100)] = random_box();
    std::vector<FrameIndex> frames;
    for (int k = 0; k < 4; ++k) frames.push_back(static_cast<FrameIndex>(rng() % 20));

    const CropRect r = action_roi(t, "Pick", frames);
    CHECK(r.y1 == 0);
    CHECK(r.y2 == t.height);
    CHECK(r.x1 >= 0);
    CHECK(r.x2 <= t.width);
    CHECK(r.x1 < r.x2);
    for (FrameIndex f : frames) {
      for (const Box& b : {box_at(src, f), box_at(eff, f)}) {
        CHECK(r.x1 <= std::max(b.x1, 0));
        CHECK(r.x2 >= std::min(b.x2, t.width));
      }
    }
    // Union order does not matter.
    std::vector<FrameIndex> reversed(frames.rbegin(), frames.rend());
    CHECK(action_roi(t, "Pick", reversed) == r);
    // Union over a superset of frames is at least as wide.
    const std::vector<FrameIndex> first = {frames.front()};
    const CropRect sub = action_roi(t, "Pick", first);
    CHECK(r.x1 <= sub.x1);
    CHECK(r.x2 >= sub.x2);
  }
}

TEST_CASE("fixed crop") {
  CHECK(fixed_crop({0, 0, 1280, 560}) == CropRect{0, 0, 1280, 560});
  CHECK(fixed_crop({0, 0, 640, 560}) == CropRect{0, 0, 640, 560});
  CHECK_THROWS_AS(fixed_crop({100, 0, 50, 560}), ValidationError);
  CHECK_THROWS_AS(fixed_crop({0, 10, 50, 10}), ValidationError);
  CHECK_THROWS_AS(fixed_crop({-1, 0, 50, 10}), ValidationError);
}

TEST_CASE("crop kinds round-trip") {
  for (auto k : {CropKind::none, CropKind::fixed, CropKind::roi}) CHECK(parse_crop_kind(to_string(k)) == k);
  CHECK_FALSE(parse_crop_kind("center").has_value());
}

TEST_CASE("attach_crops") {
  const TaskTimeline t = tracked();
  const std::vector<std::string> subset = {"Pick", "MoveDestination", "Wait"};
  const SamplingPlan plan = plan_action_subset(t, subset, 12);

  const auto none = attach_crops(plan, t, {});
  CHECK(none.crop_mode == "none");
  for (const auto& e : none.entries) CHECK(e.crop == CropRect{0, 0, 1280, 560});

  CropMode fixed{CropKind::fixed, {0, 0, 640, 560}, RoiFrames::all};
  const auto fx = attach_crops(plan, t, fixed);
  CHECK(fx.crop_mode == "fixed");
  for (const auto& e : fx.entries) CHECK(e.crop == CropRect{0, 0, 640, 560});
  CropMode too_big{CropKind::fixed, {0, 0, 2000, 560}, RoiFrames::all};
  CHECK_THROWS_AS(attach_crops(plan, t, too_big), ValidationError);

  CropMode roi{CropKind::roi, {}, RoiFrames::all};
  const auto r = attach_crops(plan, t, roi);
  CHECK(r.crop_mode == "roi");
  std::map<std::string, CropRect> seen;
  for (const auto& e : r.entries) {
    REQUIRE(e.crop.has_value());
    auto [it, fresh] = seen.emplace(e.action, *e.crop);
    if (!fresh) CHECK(it->second == *e.crop);
  }
  CHECK(seen.size() == 3);
  CHECK(seen.at("Pick") != seen.at("Wait"));
  CHECK(seen.at("Pick") == action_roi(t, "Pick", range(0, 40)));

  // Sampled-frames mode only looks at the planned frames.
  CropMode sampled{CropKind::roi, {}, RoiFrames::sampled};
  const auto s = attach_crops(plan, t, sampled);
  std::vector<FrameIndex> pick_frames;
  for (const auto& e : plan.entries) {
    if (e.action == "Pick") pick_frames.push_back(e.frame);
  }
  for (const auto& e : s.entries) {
    if (e.action == "Pick") CHECK(e.crop == action_roi(t, "Pick", pick_frames));
  }

  TaskTimeline missing = t;
  missing.tracks.erase(TrackRole::destination_container);
  CHECK_THROWS_AS(attach_crops(plan, missing, roi), ValidationError);
}
