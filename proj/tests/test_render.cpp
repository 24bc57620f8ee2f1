#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "scopemetrics/render.hpp"
#include "scopemetrics/report_io.hpp"
#include "scopemetrics/synth.hpp"
#include "support.hpp"

using namespace scopemetrics;

namespace {

size_t count_occurrences(const std::string& text, const std::string& needle) {
  size_t count = 0;
  for (size_t pos = text.find(needle); pos != std::string::npos;
       pos = text.find(needle, pos + needle.size())) {
    ++count;
  }
  return count;
}

}  // namespace

TEST_CASE("heatmap PGM serialization") {
  SUBCASE("all-zero grid uses maxval 1") {
    HeatMap map;
    map.grid = Eigen::MatrixXi::Zero(2, 3);
    CHECK(render_heatmap(map) == "P2\n3 2\n1\n0 0 0\n0 0 0\n");
  }
  SUBCASE("2x2 example") {
    HeatMap map;
    map.grid = Eigen::MatrixXi::Zero(2, 2);
    map.grid(0, 0) = 1;
    map.grid(1, 1) = 2;
    CHECK(render_heatmap(map) == "P2\n2 2\n2\n1 0\n0 2\n");
  }
}

TEST_CASE("timeline SVG") {
  const VideoMeta meta{"v", 640, 480, 60};
  SUBCASE("empty timeline still draws seven labeled lanes") {
    const std::string svg = render_timeline(Timeline{}, meta);
    for (char lane = 'a'; lane <= 'g'; ++lane) {
      CHECK(svg.find(std::string("(") + lane + ")") != std::string::npos);
    }
    CHECK(svg.find("grasper") != std::string::npos);
    CHECK(svg.find("specimen_bag") != std::string::npos);
    CHECK(svg.find("minutes") != std::string::npos);
  }
  SUBCASE("one interval spanning the video covers the full lane") {
    Timeline t;
    t.per_class[0] = {{0, 59}};
    const std::string svg = render_timeline(t, meta);
    CHECK(svg.find("fill=\"red\"") != std::string::npos);   // grasper lane color
    CHECK(svg.find("width=\"720\"") != std::string::npos);  // full plot width bar
  }
  SUBCASE("byte determinism") {
    Timeline t;
    t.per_class[2] = {{5, 20}, {30, 41}};
    t.per_class[4] = {{21, 29}};
    CHECK(render_timeline(t, meta) == render_timeline(t, meta));
  }
}

TEST_CASE("trajectory SVG") {
  const VideoMeta meta{"v", 640, 480, 20};
  Track a;
  a.tool = ToolClass::kGrasper;
  a.track_id = 0;
  a.points = {{0, Point2(10, 10), BBox(5, 5, 15, 15)}, {1, Point2(20, 20), BBox(15, 15, 25, 25)}};
  Track b;
  b.tool = ToolClass::kClipper;
  b.track_id = 1;
  b.points = {{0, Point2(100, 100), BBox(95, 95, 105, 105)},
              {1, Point2(110, 100), BBox(105, 95, 115, 105)}};

  const std::string svg = render_trajectories({a, b}, PhaseWindow{"full", 0, 19}, meta);
  CHECK(count_occurrences(svg, "<polyline") == 2);
  CHECK(svg.find("stroke=\"red\"") != std::string::npos);
  CHECK(svg.find("stroke=\"blue\"") != std::string::npos);
  CHECK(svg.find("stroke=\"red\"") < svg.find("stroke=\"blue\""));  // track-id order

  // a window keeping one point degrades to a dot
  const std::string dot = render_trajectories({a}, PhaseWindow{"w", 1, 1}, meta);
  CHECK(count_occurrences(dot, "<polyline") == 0);
  CHECK(count_occurrences(dot, "<circle") == 1);
}

TEST_CASE("report round trip re-renders identically") {
  synth::ScenarioConfig cfg;
  cfg.seed = 9;
  cfg.video_id = "rt";
  cfg.n_frames = 40;
  synth::ToolScript script;
  script.tool = ToolClass::kHook;
  script.start_frame = 0;
  script.end_frame = 39;
  script.waypoints = {{100, 100}, {300, 250}};
  script.box_width = 30;
  script.box_height = 30;
  cfg.script.push_back(script);
  cfg.noise = {2.0, 0.1, 0.1};
  cfg.phases.push_back(PhaseWindow{"clipping", 10, 30});

  const synth::Scenario scenario = synth::gen_scenario(cfg);
  const SkillReport report =
      build_report(scenario.detections.detections, scenario.meta, cfg.phases, {});

  const std::string text = serialize_report(report);
  const SkillReport parsed = parse_report(text);
  CHECK(serialize_report(parsed) == text);

  CHECK(render_timeline(parsed.timeline, parsed.meta) ==
        render_timeline(report.timeline, report.meta));
  CHECK(render_heatmap(parsed.combined_heatmap) == render_heatmap(report.combined_heatmap));
  for (const MotionMetrics& metrics : report.motion) {
    CHECK(render_trajectories(parsed.tracks, metrics.phase, parsed.meta) ==
          render_trajectories(report.tracks, metrics.phase, report.meta));
  }
}

TEST_CASE("report schema is enforced") {
  CHECK_THROWS_WITH_AS(parse_report("{}"), doctest::Contains("invalid_report"), ValidationError);
  CHECK_THROWS_WITH_AS(parse_report("not json"), doctest::Contains("invalid_report"),
                       ValidationError);
}
