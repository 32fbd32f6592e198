#include <doctest.h>

#include <fstream>
#include <sstream>

#include "support.hpp"
#include "tks/cli.hpp"
#include "tks/clip.hpp"
#include "tks/error.hpp"
#include "tks/serialize.hpp"
#include "tks/synth.hpp"

using namespace tks;
using tks::test::TempDir;

namespace {

struct Run {
  int code = 0;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "tks");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  Run r;
  r.code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::size_t lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

// Small synthetic dataset shared by the CLI tests.
struct Dataset {
  TempDir dir;
  std::string manifest;

  Dataset() {
    const Run r = run({"synth", "--out", (dir / "ds").string(), "--count", "4", "--seed", "3"});
    REQUIRE(r.code == 0);
    manifest = (dir / "ds" / "manifest.jsonl").string();
  }
};

}  // namespace

TEST_CASE("help lists flags with their defaults") {
  const Run top = run({"--help"});
  CHECK(top.code == 0);
  for (const char* cmd : {"plan", "materialize", "eval", "synth", "stats"}) CHECK(top.out.find(cmd) != std::string::npos);

  const Run plan = run({"plan", "--help"});
  CHECK(plan.code == 0);
  for (const char* want : {"--strategy", "[action-subset]", "--subset", "MoveDestination,Wait,Place", "--frames",
                           "[32]", "--crop", "[none]", "--region", "[0,0,1280,560]", "--roi-frames", "[all]",
                           "--augmentation", "--majority", "[0.75]", "--window", "[0.25]", "--split",
                           "[proportional]", "--tta", "--jitter", "--seed", "[0]"}) {
    CAPTURE(want);
    CHECK(plan.out.find(want) != std::string::npos);
  }
  const Run mat = run({"materialize", "--help"});
  CHECK(mat.out.find("[224]") != std::string::npos);
  CHECK(mat.out.find("--jobs") != std::string::npos);
  const Run ev = run({"eval", "--help"});
  CHECK(ev.out.find("[failure]") != std::string::npos);
  CHECK(ev.out.find("nominal,open,deconstruction") != std::string::npos);
  const Run syn = run({"synth", "--help"});
  CHECK(syn.out.find("[100]") != std::string::npos);
}

TEST_CASE("usage errors exit 2") {
  CHECK(run({}).code == 2);
  CHECK(run({"plan"}).code == 2);
  CHECK(run({"plan", "--manifest", "x", "--strategy", "magic"}).code == 2);
  CHECK(run({"frobnicate"}).code == 2);
}

TEST_CASE("plan command") {
  Dataset ds;
  const Run one = run({"plan", "--manifest", ds.manifest, "--strategy", "action-subset", "--frames", "32"});
  CHECK(one.code == 0);
  CHECK(lines(one.out) == 4);
  CHECK(run({"plan", "--manifest", ds.manifest}).out == one.out);

  const Run single = run({"plan", "--manifest", ds.manifest, "--strategy", "single-action", "--subset",
                          "MoveDestination,Wait,Place"});
  CHECK(single.code == 0);
  CHECK(lines(single.out) == 12);
  const auto timelines = load_manifest(ds.manifest);
  std::istringstream in(single.out);
  std::string line;
  std::size_t i = 0;
  while (std::getline(in, line)) {
    const SamplingPlan p = plan_from_json(Json::parse(line));
    const TaskTimeline& t = timelines[i / 3];
    CHECK(p.sample_id == t.sample_id);
    CHECK(p.label == to_string(action_label(t, *p.action)));
    ++i;
  }

  const Run bad = run({"plan", "--manifest", ds.manifest, "--subset", "MoveDestination,Grasp"});
  CHECK(bad.code == 2);
  CHECK(bad.err.find("Grasp") != std::string::npos);
  CHECK(run({"plan", "--manifest", ds.manifest, "--majority", "0.4"}).code == 2);
  CHECK(run({"plan", "--manifest", ds.manifest, "--tta", "--augmentation", "action"}).code == 2);
  CHECK(run({"plan", "--manifest", ds.manifest, "--crop", "fixed", "--region", "0,0,5000,70"}).code == 2);
  CHECK(run({"plan", "--manifest", (ds.dir / "absent.jsonl").string()}).code == 1);

  const Run tta = run({"plan", "--manifest", ds.manifest, "--tta", "--crop", "roi"});
  CHECK(tta.code == 0);
  CHECK(lines(tta.out) == 16);

  const Run aug = run({"plan", "--manifest", ds.manifest, "--augmentation", "random", "--seed", "9"});
  CHECK(aug.code == 0);
  CHECK(aug.out == run({"plan", "--manifest", ds.manifest, "--augmentation", "random", "--seed", "9"}).out);
  CHECK(aug.out != run({"plan", "--manifest", ds.manifest, "--augmentation", "random", "--seed", "10"}).out);
  CHECK(aug.out.find("random-window") != std::string::npos);
}

TEST_CASE("plan keeps going past invalid records") {
  Dataset ds;
  {
    std::ofstream out(ds.manifest, std::ios::app);
    out << "{\"sample_id\": \"broken\"}\n";
  }
  const Run r = run({"plan", "--manifest", ds.manifest});
  CHECK(r.code == 2);
  CHECK(lines(r.out) == 4);
  CHECK(r.err.find("line 5") != std::string::npos);
}

TEST_CASE("materialize command") {
  Dataset ds;
  const auto plans = ds.dir / "plans.jsonl";
  REQUIRE(run({"plan", "--manifest", ds.manifest, "--out", plans.string(), "--crop", "roi", "--frames", "8"}).code == 0);
  const std::string source = (ds.dir / "ds" / "frames" / "{sample_id}.tksf").string();
  const auto out1 = ds.dir / "clips1";
  const auto out2 = ds.dir / "clips2";
  CHECK(run({"materialize", "--plans", plans.string(), "--source", source, "--out", out1.string(), "--size", "32",
             "--jobs", "3"})
            .code == 0);
  CHECK(run({"materialize", "--plans", plans.string(), "--source", source, "--out", out2.string(), "--size", "32"})
            .code == 0);
  std::size_t count = 0;
  for (const auto& entry : std::filesystem::directory_iterator(out1)) {
    ++count;
    CHECK(slurp(entry.path()) == slurp(out2 / entry.path().filename()));
    const ClipTensor clip = read_clip(entry.path());
    CHECK(clip.n == 8);
    CHECK(clip.height == 32);
    CHECK(clip.width == 32);
    CHECK(Json::parse(clip.provenance)["crop_mode"] == "roi");
  }
  CHECK(count == 4);
  CHECK(std::filesystem::exists(out1 / "000000_synth-000000.tksm"));

  // Frames past the end of the source.
  std::string text = slurp(plans);
  auto first_line = text.substr(0, text.find('\n'));
  Json j = Json::parse(first_line);
  j["entries"][0]["frame"] = 100000;
  {
    std::ofstream out(ds.dir / "broken.jsonl");
    out << j.dump() << "\n";
  }
  const Run missing = run({"materialize", "--plans", (ds.dir / "broken.jsonl").string(), "--source", source, "--out",
                           (ds.dir / "clips3").string()});
  CHECK(missing.code == 1);
  CHECK(missing.err.find("100000") != std::string::npos);
}

TEST_CASE("eval command") {
  TempDir dir;
  std::vector<TaskTimeline> ts;
  for (const char* label : {"nominal", "open", "deconstruction"}) {
    TaskTimeline t = test::armbench(10);
    t.sample_id = std::string("s-") + label;
    if (std::string(label) != "nominal") {
      t.failure = FailureAnnotation{*parse_failure_class(label), 15, std::nullopt, std::nullopt};
      t.label = label;
    }
    ts.push_back(t);
  }
  const auto manifest = (dir / "m.jsonl").string();
  write_manifest(std::filesystem::path(manifest), ts);
  auto write = [&](const std::string& name, const std::string& body) {
    std::ofstream(dir / name) << body;
    return (dir / name).string();
  };

  const auto labels = write("labels.jsonl",
                            R"({"sample_id":"s-nominal","label":"nominal"}
{"sample_id":"s-open","label":"open"}
{"sample_id":"s-deconstruction","action":"Wait","label":"nominal"}
{"sample_id":"s-deconstruction","action":"Place","label":"deconstruction"}
{"sample_id":"s-deconstruction","action":"MoveDestination","label":"open"}
)");
  const Run r = run({"eval", "--manifest", manifest, "--predictions", labels});
  CHECK(r.code == 0);
  CHECK(r.out.find("f1=1.000000\n") != std::string::npos);
  CHECK(r.out.find("confusion.deconstruction.deconstruction=1") != std::string::npos);

  const auto json = run({"eval", "--manifest", manifest, "--predictions", labels, "--format", "json"});
  CHECK(Json::parse(json.out)["f1"] == 1.0);

  // Two augmented views of s-open; their mean points at open only when averaged.
  const auto tta = write("tta.jsonl",
                         R"({"sample_id":"s-nominal","logits":[1,0,0]}
{"sample_id":"s-open","logits":[0.6,0.4,0]}
{"sample_id":"s-open","logits":[0,1,0]}
{"sample_id":"s-deconstruction","logits":[0,0,1]}
)");
  const Run with = run({"eval", "--manifest", manifest, "--predictions", tta, "--tta"});
  CHECK(with.code == 0);
  CHECK(with.out.find("recall.open=1.000000\n") != std::string::npos);
  const Run without = run({"eval", "--manifest", manifest, "--predictions", tta});
  CHECK(without.code == 2);
  CHECK(without.err.find("s-open") != std::string::npos);

  const auto partial = write("partial.jsonl", R"({"sample_id":"s-open","label":"open"}
)");
  const Run miss = run({"eval", "--manifest", manifest, "--predictions", partial});
  CHECK(miss.code == 2);
  CHECK(miss.err.find("s-nominal") != std::string::npos);
  CHECK(miss.err.find("s-deconstruction") != std::string::npos);

  const auto ragged = write("ragged.jsonl", R"({"sample_id":"s-open","logits":[1,0]}
)");
  CHECK(run({"eval", "--manifest", manifest, "--predictions", ragged}).code == 2);

  const Run all = run({"eval", "--manifest", manifest, "--predictions", labels, "--f1-scope", "all", "--out",
                       (dir / "report.json").string()});
  CHECK(all.code == 0);
  CHECK(Json::parse(slurp(dir / "report.json"))["f1_scope"] == "all");
}

TEST_CASE("synth and stats commands") {
  TempDir dir;
  const Run a = run({"synth", "--out", (dir / "a").string(), "--count", "6", "--seed", "5"});
  const Run b = run({"synth", "--out", (dir / "b").string(), "--count", "6", "--seed", "5"});
  CHECK(a.code == 0);
  CHECK(b.code == 0);
  CHECK(slurp(dir / "a" / "manifest.jsonl") == slurp(dir / "b" / "manifest.jsonl"));
  CHECK(slurp(dir / "a" / "frames" / "synth-000002.tksf") == slurp(dir / "b" / "frames" / "synth-000002.tksf"));

  std::ofstream(dir / "spec.json") << R"({"p_open": 0, "p_deconstruction": 1, "seed": 1})";
  const Run spec = run({"synth", "--spec", (dir / "spec.json").string(), "--out", (dir / "c").string(), "--count", "2"});
  CHECK(spec.code == 0);
  for (const auto& t : load_manifest(dir / "c" / "manifest.jsonl")) CHECK(t.label == "deconstruction");
  std::ofstream(dir / "bad.json") << R"({"p_open": 2})";
  CHECK(run({"synth", "--spec", (dir / "bad.json").string(), "--out", (dir / "d").string()}).code == 2);

  const Run stats = run({"stats", "--manifest", (dir / "c" / "manifest.jsonl").string()});
  CHECK(stats.code == 0);
  CHECK(stats.out.find("records: 2") != std::string::npos);
  CHECK(stats.out.find("Nominal") != std::string::npos);
  CHECK(stats.out.find("Deconstruction") != std::string::npos);
  // Table row: nominal, deconstruction, open, total.
  std::istringstream in(stats.out);
  std::string line;
  bool found = false;
  while (std::getline(in, line)) {
    if (line.rfind("all", 0) != 0) continue;
    std::istringstream row(line.substr(3));
    int nominal = -1, decon = -1, open = -1, total = -1;
    row >> nominal >> decon >> open >> total;
    CHECK(nominal == 0);
    CHECK(decon == 2);
    CHECK(open == 0);
    CHECK(total == 2);
    found = true;
  }
  CHECK(found);
}
