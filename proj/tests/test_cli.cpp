#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>

#include "json.hpp"
#include "scopemetrics/cli.hpp"
#include "support.hpp"

using namespace scopemetrics;
using test_support::TempDir;
using test_support::read_file;
using test_support::write_file;

namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

const char* kToyGt =
    R"({"video_id": "v01", "frame_index": 0, "width": 640, "height": 480, "boxes": [{"class": "grasper", "bbox": [10, 10, 50, 80]}]})"
    "\n"
    R"({"video_id": "v01", "frame_index": 1, "width": 640, "height": 480, "boxes": [{"class": "hook", "bbox": [100, 100, 160, 180]}]})"
    "\n";

const char* kToyDet =
    R"({"video_id": "v01", "frame_index": 0, "width": 640, "height": 480, "boxes": [{"class": "grasper", "bbox": [10, 10, 50, 80], "confidence": 0.9}]})"
    "\n"
    R"({"video_id": "v01", "frame_index": 1, "width": 640, "height": 480, "boxes": [{"class": "hook", "bbox": [100, 100, 160, 180], "confidence": 0.8}]})"
    "\n";

const char* kScenario = R"({
  "seed": 42, "video_id": "va", "width": 640, "height": 480, "fps": 1.0, "n_frames": 60,
  "noise": {"centroid_jitter_px": 1.5, "drop_rate": 0.08, "fp_rate_per_frame": 0.05},
  "script": [
    {"tool": "grasper", "start_frame": 0, "end_frame": 59,
     "waypoints": [[120, 120], [420, 300]], "box_width": 40, "box_height": 30},
    {"tool": "clipper", "start_frame": 20, "end_frame": 34,
     "waypoints": [[300, 200], [335, 235]], "box_width": 30, "box_height": 30}
  ],
  "phases": [{"name": "clipping", "start_frame": 20, "end_frame": 35}]
})";

std::vector<std::string> split_args(std::initializer_list<std::string> args) { return args; }

}  // namespace

TEST_CASE("evaluate-spatial happy path and exit codes") {
  TempDir dir("scopemetrics-cli");
  write_file(dir.path() / "gt.jsonl", kToyGt);
  write_file(dir.path() / "det.jsonl", kToyDet);
  const std::string out = (dir.path() / "ap.json").string();

  CHECK(run_cli(split_args({"evaluate-spatial", "--gt", (dir.path() / "gt.jsonl").string(),
                            "--det", (dir.path() / "det.jsonl").string(), "--out", out})) == 0);
  const json doc = json::parse(read_file(out));
  CHECK(doc["mAP"].get<double>() == 1.0);
  CHECK(doc["per_class"]["grasper"].get<double>() == 1.0);
  CHECK(doc["per_class"]["clipper"].is_null());

  SUBCASE("missing file is an I/O error") {
    CHECK(run_cli(split_args({"evaluate-spatial", "--gt", (dir.path() / "nope.jsonl").string(),
                              "--det", (dir.path() / "det.jsonl").string()})) == 2);
  }
  SUBCASE("out-of-range threshold is a validation error") {
    CHECK(run_cli(split_args({"evaluate-spatial", "--gt", (dir.path() / "gt.jsonl").string(),
                              "--det", (dir.path() / "det.jsonl").string(), "--iou", "1.5"})) == 1);
  }
  SUBCASE("malformed input is a validation error") {
    write_file(dir.path() / "bad.jsonl", "not json\n");
    CHECK(run_cli(split_args({"evaluate-spatial", "--gt", (dir.path() / "bad.jsonl").string(),
                              "--det", (dir.path() / "det.jsonl").string()})) == 1);
  }
}

TEST_CASE("evaluate-presence happy path") {
  TempDir dir("scopemetrics-cli");
  write_file(dir.path() / "det.jsonl", kToyDet);
  write_file(dir.path() / "labels.csv",
             "frame_index,grasper,bipolar,hook,scissors,clipper,irrigator,specimen_bag\n"
             "0,1,0,0,0,0,0,0\n"
             "1,0,0,1,0,0,0,0\n");
  const std::string out = (dir.path() / "ap.json").string();
  CHECK(run_cli(split_args({"evaluate-presence", "--labels", (dir.path() / "labels.csv").string(),
                            "--det", (dir.path() / "det.jsonl").string(), "--out", out})) == 0);
  const json doc = json::parse(read_file(out));
  CHECK(doc["mAP"].get<double>() == 1.0);
}

TEST_CASE("synth, analyze, and report compose deterministically") {
  TempDir dir("scopemetrics-cli");
  write_file(dir.path() / "scenario.json", kScenario);

  const std::string synth_dir = (dir.path() / "synth").string();
  REQUIRE(run_cli(split_args({"synth", "--config", (dir.path() / "scenario.json").string(),
                              "--out", synth_dir})) == 0);
  CHECK(fs::exists(fs::path(synth_dir) / "gt.jsonl"));
  CHECK(fs::exists(fs::path(synth_dir) / "det.jsonl"));
  CHECK(fs::exists(fs::path(synth_dir) / "truth.json"));
  CHECK(fs::exists(fs::path(synth_dir) / "meta.jsonl"));
  CHECK(fs::exists(fs::path(synth_dir) / "phases.csv"));

  auto analyze_into = [&](const std::string& out_dir, const std::string& jobs) {
    REQUIRE(run_cli(split_args({"analyze", "--det", (fs::path(synth_dir) / "det.jsonl").string(),
                                "--meta", (fs::path(synth_dir) / "meta.jsonl").string(),
                                "--phases", (fs::path(synth_dir) / "phases.csv").string(),
                                "--out", (dir.path() / out_dir).string(), "--jobs", jobs})) == 0);
  };
  analyze_into("out1", "1");
  analyze_into("out2", "4");

  const fs::path va1 = dir.path() / "out1" / "va";
  const fs::path va2 = dir.path() / "out2" / "va";
  for (const char* name :
       {"report.json", "timeline.svg", "heatmap_grasper.pgm", "heatmap_combined.pgm",
        "trajectory_full.svg", "trajectory_clipping.svg"}) {
    CAPTURE(name);
    REQUIRE(fs::exists(va1 / name));
    CHECK(read_file(va1 / name) == read_file(va2 / name));
  }

  // report re-renders the same images from report.json alone
  const std::string rerender = (dir.path() / "rerender").string();
  REQUIRE(run_cli(split_args({"report", "--in", (va1 / "report.json").string(), "--out",
                              rerender})) == 0);
  for (const char* name : {"timeline.svg", "heatmap_grasper.pgm", "heatmap_combined.pgm",
                           "trajectory_full.svg", "trajectory_clipping.svg"}) {
    CAPTURE(name);
    CHECK(read_file(fs::path(rerender) / name) == read_file(va1 / name));
  }
  CHECK(read_file(fs::path(rerender) / "report.json") == read_file(va1 / "report.json"));
}

TEST_CASE("anchors subcommand reports label statistics") {
  TempDir dir("scopemetrics-cli");
  write_file(dir.path() / "gt.jsonl", kToyGt);
  const std::string out = (dir.path() / "anchors.json").string();
  CHECK(run_cli(split_args({"anchors", "--gt", (dir.path() / "gt.jsonl").string(), "--stride",
                            "32", "--scales", "64,128", "--ratios", "0.5,1,2", "--out", out})) ==
        0);
  const json doc = json::parse(read_file(out));
  CHECK(doc["summary"]["n_frames"].get<int>() == 2);
  REQUIRE(doc["frames"].size() == 2);
  const json& frame = doc["frames"][0];
  CHECK(frame["n_anchors"].get<long>() == 20 * 15 * 6);
  CHECK(frame["n_positive"].get<long>() >= 1);
  // ideal predictions sit on the loss floor
  CHECK(frame["loss"]["total"].get<double>() < 1e-5);
}

TEST_CASE("analyze joins GOALS ratings and emits correlations") {
  TempDir dir("scopemetrics-cli");
  // three one-tool videos with different activity levels
  std::string det;
  std::string meta;
  for (int v = 0; v < 3; ++v) {
    const std::string id = "v0" + std::to_string(v + 1);
    meta += R"({"video_id": ")" + id +
            R"(", "width": 640.0, "height": 480.0, "n_frames": 12, "fps": 1.0})" + "\n";
    for (long f = 0; f <= 3 * (v + 1); ++f) {
      const double x = 100.0 + 4.0 * static_cast<double>(f);
      det += R"({"video_id": ")" + id + R"(", "frame_index": )" + std::to_string(f) +
             R"(, "width": 640, "height": 480, "boxes": [{"class": "hook", "bbox": [)" +
             std::to_string(x) + ", 100, " + std::to_string(x + 40) +
             R"(, 160], "confidence": 0.9}]})" + "\n";
    }
  }
  write_file(dir.path() / "det.jsonl", det);
  write_file(dir.path() / "meta.jsonl", meta);
  write_file(dir.path() / "goals.csv",
             "video_id,rater_id,depth_perception,bimanual_dexterity,efficiency,tissue_handling,total\n"
             "v01,r1,2.00,2.00,2.00,2.00,8.00\n"
             "v02,r1,3.00,3.00,3.00,3.00,12.00\n"
             "v03,r1,4.00,4.00,4.00,4.00,16.00\n");

  REQUIRE(run_cli(split_args({"analyze", "--det", (dir.path() / "det.jsonl").string(), "--meta",
                              (dir.path() / "meta.jsonl").string(), "--goals",
                              (dir.path() / "goals.csv").string(), "--out",
                              (dir.path() / "out").string()})) == 0);
  const json report = json::parse(read_file(dir.path() / "out" / "v01" / "report.json"));
  CHECK(report["goals"]["total"].get<double>() == 8.0);

  const json correlation = json::parse(read_file(dir.path() / "out" / "correlation.json"));
  // longer usage and longer paths line up with higher ratings here
  CHECK(correlation["total_usage_seconds"]["spearman_rho"].get<double>() == 1.0);
  CHECK(correlation["total_path_length_px"]["spearman_rho"].get<double>() == 1.0);
}

TEST_CASE("unknown flags fail fast") {
  CHECK(run_cli(split_args({"evaluate-spatial", "--nope"})) == 1);
  CHECK(run_cli(split_args({})) == 1);
}
