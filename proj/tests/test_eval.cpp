#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "scopemetrics/eval.hpp"
#include "scopemetrics/synth.hpp"
#include "support.hpp"

using namespace scopemetrics;

namespace {

Detection det(double conf, const BBox& box, ToolClass tool = ToolClass::kHook, long frame = 0,
              const std::string& video = "v") {
  return Detection{video, frame, tool, box, conf};
}

GroundTruthBox gt(const BBox& box, ToolClass tool = ToolClass::kHook, long frame = 0,
                  const std::string& video = "v") {
  return GroundTruthBox{video, frame, tool, box};
}

std::vector<MatchOutcome> outcomes_from(const std::vector<bool>& flags) {
  std::vector<MatchOutcome> outcomes;
  for (std::size_t i = 0; i < flags.size(); ++i) {
    MatchOutcome o;
    o.detection_index = static_cast<int>(i);
    o.is_true_positive = flags[i];
    outcomes.push_back(o);
  }
  return outcomes;
}

}  // namespace

TEST_CASE("match_spatial basics") {
  SUBCASE("single detection above the threshold is a true positive") {
    const auto outcomes = match_spatial({det(0.9, BBox(0, 0, 10, 9))}, {gt(BBox(0, 0, 10, 10))});
    REQUIRE(outcomes.size() == 1);
    CHECK(outcomes[0].is_true_positive);
    CHECK(outcomes[0].matched_gt == 0);
  }
  SUBCASE("greedy consumes the ground truth; the weaker duplicate is an FP") {
    const auto outcomes = match_spatial(
        {det(0.9, BBox(0, 0, 10, 6)), det(0.8, BBox(0, 0, 10, 5.5))}, {gt(BBox(0, 0, 10, 10))});
    REQUIRE(outcomes.size() == 2);
    CHECK(outcomes[0].is_true_positive);
    CHECK(!outcomes[1].is_true_positive);
  }
  SUBCASE("the 0.5 threshold is inclusive") {
    CHECK(match_spatial({det(0.9, BBox(0, 0, 10, 5))}, {gt(BBox(0, 0, 10, 10))})[0]
              .is_true_positive);  // IoU exactly 0.5
    CHECK(!match_spatial({det(0.9, BBox(0, 0, 10, 4.9))}, {gt(BBox(0, 0, 10, 10))})[0]
               .is_true_positive);  // IoU 0.49
  }
  SUBCASE("never matches across class, frame, or video") {
    const std::vector<GroundTruthBox> gts = {
        gt(BBox(0, 0, 10, 10), ToolClass::kGrasper, 0, "v"),
        gt(BBox(0, 0, 10, 10), ToolClass::kHook, 1, "v"),
        gt(BBox(0, 0, 10, 10), ToolClass::kHook, 0, "w"),
    };
    const auto outcomes = match_spatial({det(0.9, BBox(0, 0, 10, 10), ToolClass::kHook, 0, "v")},
                                        gts);
    CHECK(!outcomes[0].is_true_positive);
  }
  SUBCASE("threshold validation") {
    CHECK_THROWS_WITH_AS(match_spatial({}, {}, 1.5), doctest::Contains("threshold_out_of_range"),
                         ValidationError);
  }
}

TEST_CASE("ap_from_matches on the toy curves") {
  CHECK(ap_from_matches(outcomes_from({true}), 1) == 1.0);
  CHECK(ap_from_matches(outcomes_from({true, false, true}), 2) ==
        doctest::Approx(5.0 / 6.0).epsilon(1e-12));
  CHECK(ap_from_matches(outcomes_from({false, false}), 3) == 0.0);
  CHECK_THROWS_WITH_AS(ap_from_matches({}, 0), doctest::Contains("undefined_ap"), ValidationError);
}

TEST_CASE("pr curve recall is non-decreasing") {
  std::mt19937_64 rng(3);
  std::vector<bool> flags;
  for (int i = 0; i < 50; ++i) flags.push_back((rng() & 1) != 0);
  const PRCurve curve = pr_curve(outcomes_from(flags), 20);
  for (std::size_t k = 1; k < curve.points.size(); ++k) {
    CHECK(curve.points[k].first >= curve.points[k - 1].first);
    CHECK(curve.points[k].second >= 0.0);
    CHECK(curve.points[k].second <= 1.0);
  }
}

TEST_CASE("mean_ap reproduces the reference tables") {
  PerClassAP spatial = {48.3, 67.0, 78.4, 67.7, 86.3, 17.5, 76.3};
  CHECK(mean_ap(spatial) == doctest::Approx(63.07).epsilon(1e-4));
  PerClassAP presence = {87.2, 75.1, 95.3, 70.8, 88.4, 73.5, 82.1};
  CHECK(mean_ap(presence) == doctest::Approx(81.77).epsilon(1e-4));

  PerClassAP single{};
  single[3] = 0.5;
  CHECK(mean_ap(single) == 0.5);

  PerClassAP identical;
  identical.fill(0.1);
  CHECK(mean_ap(identical) == 0.1);  // exact, not approximate

  CHECK_THROWS_WITH_AS(mean_ap(PerClassAP{}), doctest::Contains("no_defined_classes"),
                       ValidationError);
}

TEST_CASE("AP depends on ranking only") {
  std::mt19937_64 rng(13);
  for (int round = 0; round < 50; ++round) {
    auto scenario = test_support::random_ap_scenario(rng);
    const APResult base = evaluate_spatial(scenario.dets, scenario.gts, 0.5);

    auto transformed = scenario.dets;
    for (Detection& d : transformed) d.confidence = d.confidence * d.confidence;  // monotone
    const APResult squared = evaluate_spatial(transformed, scenario.gts, 0.5);

    for (int c = 0; c < kToolCount; ++c) {
      REQUIRE(base.per_class[c].has_value() == squared.per_class[c].has_value());
      if (base.per_class[c]) {
        CHECK(*base.per_class[c] == doctest::Approx(*squared.per_class[c]).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("appending a weakest false positive never increases AP") {
  std::mt19937_64 rng(19);
  for (int round = 0; round < 50; ++round) {
    auto scenario = test_support::random_ap_scenario(rng);
    const APResult base = evaluate_spatial(scenario.dets, scenario.gts, 0.5);

    double weakest = 1.0;
    for (const Detection& d : scenario.dets) weakest = std::min(weakest, d.confidence);
    scenario.dets.push_back(det(weakest / 2.0, BBox(190, 190, 199, 199), ToolClass::kGrasper));
    const APResult extended = evaluate_spatial(scenario.dets, scenario.gts, 0.5);

    const int c = tool_index(ToolClass::kGrasper);
    REQUIRE(base.per_class[c].has_value());
    CHECK(*extended.per_class[c] <= *base.per_class[c] + 1e-12);
  }
}

TEST_CASE("evaluation matches the brute-force oracle") {
  std::mt19937_64 rng(97);
  for (int round = 0; round < 150; ++round) {
    const auto scenario = test_support::random_ap_scenario(rng);
    const APResult fast = evaluate_spatial(scenario.dets, scenario.gts, 0.5);
    const PerClassAP oracle = synth::oracle_spatial_ap(scenario.dets, scenario.gts, 0.5);
    for (int c = 0; c < kToolCount; ++c) {
      REQUIRE(fast.per_class[c].has_value() == oracle[c].has_value());
      if (fast.per_class[c]) {
        CHECK(std::abs(*fast.per_class[c] - *oracle[c]) <= 1e-9);
      }
    }
  }
}

TEST_CASE("to_presence reduces frames by max confidence") {
  const VideoMeta meta{"v", 640, 480, 3};
  const std::vector<Detection> dets = {
      det(0.9, BBox(0, 0, 10, 10), ToolClass::kGrasper, 0),
      det(0.7, BBox(20, 20, 30, 30), ToolClass::kGrasper, 0),
      det(0.6, BBox(40, 40, 50, 50), ToolClass::kHook, 0),
      det(0.4, BBox(40, 40, 50, 50), ToolClass::kClipper, 2),
  };
  const PresenceScores scores = to_presence(dets, meta);
  CHECK(scores.scores(0, tool_index(ToolClass::kGrasper)) == 0.9);
  CHECK(scores.scores(0, tool_index(ToolClass::kHook)) == 0.6);
  CHECK(scores.scores(0, tool_index(ToolClass::kScissors)) == 0.0);
  CHECK(scores.scores.row(1).sum() == 0.0);  // no detections
  CHECK(scores.scores(2, tool_index(ToolClass::kClipper)) == 0.4);

  CHECK_THROWS_WITH_AS(to_presence({det(0.9, BBox(0, 0, 5, 5), ToolClass::kHook, 0, "w")}, meta),
                       doctest::Contains("foreign_video"), ValidationError);
}

TEST_CASE("presence_ap") {
  const VideoMeta meta{"v", 100, 100, 3};
  auto labels = [&](std::array<int, 3> hook_flags) {
    std::vector<PresenceRecord> records;
    for (long f = 0; f < 3; ++f) {
      PresenceRecord rec{"v", f, {}};
      rec.flags[tool_index(ToolClass::kHook)] = hook_flags[static_cast<std::size_t>(f)];
      records.push_back(rec);
    }
    return records;
  };

  SUBCASE("perfect ranking") {
    const PresenceScores scores =
        to_presence({det(0.9, BBox(0, 0, 10, 10), ToolClass::kHook, 0)}, meta);
    const APResult result = presence_ap(scores, labels({1, 0, 0}));
    CHECK(result.per_class[tool_index(ToolClass::kHook)] == 1.0);
    CHECK(result.map == 1.0);
  }
  SUBCASE("toy curve 0.9/0.8/0.7 against labels 1/0/1") {
    const PresenceScores scores = to_presence(
        {det(0.9, BBox(0, 0, 10, 10), ToolClass::kHook, 0),
         det(0.8, BBox(0, 0, 10, 10), ToolClass::kHook, 1),
         det(0.7, BBox(0, 0, 10, 10), ToolClass::kHook, 2)},
        meta);
    const APResult result = presence_ap(scores, labels({1, 0, 1}));
    CHECK(*result.per_class[tool_index(ToolClass::kHook)] ==
          doctest::Approx(5.0 / 6.0).epsilon(1e-12));
  }
  SUBCASE("all-zero classes are undefined and excluded from the mean") {
    const PresenceScores scores =
        to_presence({det(0.9, BBox(0, 0, 10, 10), ToolClass::kHook, 0)}, meta);
    const APResult result = presence_ap(scores, labels({1, 1, 0}));
    CHECK(!result.per_class[tool_index(ToolClass::kGrasper)].has_value());
    CHECK(result.per_class[tool_index(ToolClass::kHook)].has_value());
  }
  SUBCASE("frame set mismatch") {
    const PresenceScores scores =
        to_presence({det(0.9, BBox(0, 0, 10, 10), ToolClass::kHook, 0)}, meta);
    auto short_labels = labels({1, 0, 0});
    short_labels.pop_back();
    CHECK_THROWS_WITH_AS(presence_ap(scores, short_labels),
                         doctest::Contains("frame_set_mismatch"), ValidationError);
  }
}
