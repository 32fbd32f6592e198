#include <doctest.h>

#include <algorithm>
#include <random>

#include "oracles.hpp"
#include "support.hpp"
#include "tks/error.hpp"
#include "tks/labels.hpp"

using namespace tks;
using tks::test::armbench;

namespace {

FailureAnnotation deconstruction(FrameIndex first, std::optional<FrameIndex> open = std::nullopt) {
  return {FailureClass::deconstruction, first, open, std::nullopt};
}

}  // namespace

TEST_CASE("failure state over time") {
  CHECK(failure_state_at(std::nullopt, 0) == Outcome::nominal);
  CHECK(failure_state_at(std::nullopt, 1000) == Outcome::nominal);
  CHECK(failure_state_at(deconstruction(90, 50), 70) == Outcome::open);
  CHECK(failure_state_at(deconstruction(90, 50), 49) == Outcome::nominal);
  CHECK(failure_state_at(deconstruction(90, 50), 90) == Outcome::deconstruction);
  CHECK(failure_state_at(deconstruction(90), 120) == Outcome::deconstruction);
  CHECK(failure_state_at(deconstruction(90), 89) == Outcome::nominal);
  const FailureAnnotation open{FailureClass::open, 30, std::nullopt, std::nullopt};
  CHECK(failure_state_at(open, 29) == Outcome::nominal);
  CHECK(failure_state_at(open, 30) == Outcome::open);
}

TEST_CASE("failure state never regresses") {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 1000; ++trial) {
    FailureAnnotation a;
    a.cls = rng() % 2 == 0 ? FailureClass::open : FailureClass::deconstruction;
    a.t_first_visible = 1 + static_cast<FrameIndex>(rng() % 100);
    if (a.cls == FailureClass::deconstruction && rng() % 2 == 0) {
      a.t_open = static_cast<FrameIndex>(rng() % static_cast<std::uint64_t>(a.t_first_visible));
    }
    Outcome prev = Outcome::nominal;
    for (FrameIndex f = 0; f < 120; ++f) {
      const Outcome s = failure_state_at(a, f);
      CHECK(static_cast<int>(s) >= static_cast<int>(prev));
      prev = s;
    }
  }
}

TEST_CASE("per-action labels") {
  // Opens in MoveDestination, deconstructs in Wait.
  TaskTimeline t = armbench(40);
  t.failure = deconstruction(100, 60);
  t.label = "deconstruction";
  CHECK(action_label(t, "Pick") == Outcome::nominal);
  CHECK(action_label(t, "MoveDestination") == Outcome::open);
  CHECK(action_label(t, "Wait") == Outcome::deconstruction);
  CHECK(action_label(t, "Place") == Outcome::open);
  CHECK(action_label(t, "MoveSource") == Outcome::open);

  // Deconstructs in MoveDestination; everything afterwards is open.
  t.failure = deconstruction(50);
  CHECK(action_label(t, "MoveDestination") == Outcome::deconstruction);
  CHECK(action_label(t, "Place") == Outcome::open);

  TaskTimeline nominal = armbench(40);
  for (const auto& s : nominal.segments) CHECK(action_label(nominal, s.name) == Outcome::nominal);
  CHECK_THROWS_AS(action_label(nominal, "Grasp"), ValidationError);
}

TEST_CASE("per-action labels match a brute-force scan on random timelines") {
  std::mt19937_64 rng(43);
  for (int trial = 0; trial < 2000; ++trial) {
    std::vector<FrameIndex> lens;
    for (int i = 0; i < 5; ++i) lens.push_back(1 + static_cast<FrameIndex>(rng() % 12));
    TaskTimeline t = armbench(lens);
    oracle::Annotation o;
    o.cls = static_cast<int>(rng() % 3);
    if (o.cls != 0) {
      o.first = static_cast<FrameIndex>(rng() % static_cast<std::uint64_t>(t.frame_count));
      FailureAnnotation a{o.cls == 1 ? FailureClass::open : FailureClass::deconstruction, o.first, std::nullopt,
                          std::nullopt};
      if (o.cls == 2 && o.first > 0 && rng() % 2 == 0) {
        o.open_at = static_cast<FrameIndex>(rng() % static_cast<std::uint64_t>(o.first));
        a.t_open = o.open_at;
      }
      t.failure = a;
    }
    for (const auto& s : t.segments) {
      CHECK(static_cast<int>(action_label(t, s.name)) == oracle::action_label_scan(o, s.start, s.end));
    }
  }
}

TEST_CASE("outcome aggregation") {
  using O = Outcome;
  CHECK(aggregate_outcomes(std::vector<O>{O::open, O::deconstruction, O::nominal}) == O::deconstruction);
  CHECK(aggregate_outcomes(std::vector<O>{O::nominal, O::open, O::nominal}) == O::open);
  CHECK(aggregate_outcomes(std::vector<O>{O::nominal, O::nominal}) == O::nominal);
  CHECK_THROWS_AS(aggregate_outcomes(std::vector<O>{}), ValidationError);

  std::mt19937_64 rng(47);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<O> xs(1 + rng() % 6);
    for (auto& x : xs) x = static_cast<O>(rng() % 3);
    const O base = aggregate_outcomes(xs);
    std::shuffle(xs.begin(), xs.end(), rng);
    CHECK(aggregate_outcomes(xs) == base);
    xs.push_back(xs[rng() % xs.size()]);
    CHECK(aggregate_outcomes(xs) == base);
  }
}

TEST_CASE("logit aggregation") {
  using Rows = std::vector<std::vector<double>>;
  const auto a = aggregate_logits(Rows{{1, 0, 0}, {0, 1, 0}});
  CHECK(a.mean == std::vector<double>{0.5, 0.5, 0});
  CHECK(a.argmax == 0);
  const auto b = aggregate_logits(Rows{{0.2, 0.7, 0.1}});
  CHECK(b.mean == std::vector<double>{0.2, 0.7, 0.1});
  CHECK(b.argmax == 1);
  const auto c = aggregate_logits(Rows{{2, 0, 1}, {0, 4, 1}});
  CHECK(c.mean == std::vector<double>{1, 2, 1});
  CHECK(c.argmax == 1);
  CHECK_THROWS_AS(aggregate_logits(Rows{{1, 2}, {1}}), ValidationError);
  CHECK_THROWS_AS(aggregate_logits(Rows{}), ValidationError);
  CHECK(argmax(std::vector<double>{3, 3, 3}) == 0);
  CHECK(argmax(std::vector<double>{1, 3, 3}) == 1);
}

TEST_CASE("appending the mean row keeps the argmax") {
  std::mt19937_64 rng(53);
  std::uniform_real_distribution<double> u(-3, 3);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<std::vector<double>> rows(1 + rng() % 5, std::vector<double>(3));
    for (auto& r : rows) {
      for (auto& v : r) v = u(rng);
    }
    const auto base = aggregate_logits(rows);
    rows.push_back(base.mean);
    CHECK(aggregate_logits(rows).argmax == base.argmax);
  }
}

TEST_CASE("outcome names") {
  for (auto o : {Outcome::nominal, Outcome::open, Outcome::deconstruction}) CHECK(parse_outcome(to_string(o)) == o);
  CHECK_FALSE(parse_outcome("success").has_value());
}
