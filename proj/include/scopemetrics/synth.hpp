#pragma once

#include <cstdint>
#include <istream>
#include <optional>
#include <string>
#include <vector>

#include "scopemetrics/analytics.hpp"
#include "scopemetrics/dataset.hpp"
#include "scopemetrics/eval.hpp"

namespace scopemetrics::synth {

// xorshift64* generator, pinned bit-exactly so fixtures are portable:
//   s ^= s >> 12; s ^= s << 25; s ^= s >> 27; output = s * 0x2545F4914F6CDD1D
// A zero seed is remapped to 0x9E3779B97F4A7C15. uniform01() takes the top
// 53 output bits as a double in [0, 1).
class Xorshift64Star {
 public:
  explicit Xorshift64Star(std::uint64_t seed)
      : state_(seed != 0 ? seed : 0x9E3779B97F4A7C15ULL) {}

  std::uint64_t next() {
    state_ ^= state_ >> 12;
    state_ ^= state_ << 25;
    state_ ^= state_ >> 27;
    return state_ * 0x2545F4914F6CDD1DULL;
  }

  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

 private:
  std::uint64_t state_;
};

// One scripted tool: present on [start_frame, end_frame], centroid moving
// along the waypoint polyline with one segment per (end - start)/(K - 1)
// frames, so waypoints land on integer frames. Box size is fixed.
struct ToolScript {
  ToolClass tool = ToolClass::kGrasper;
  long start_frame = 0;
  long end_frame = 0;
  std::vector<Point2> waypoints;
  double box_width = 0.0;
  double box_height = 0.0;
};

struct NoiseConfig {
  double centroid_jitter_px = 0.0;  // Gaussian sigma
  double drop_rate = 0.0;
  double fp_rate_per_frame = 0.0;
};

struct ScenarioConfig {
  std::uint64_t seed = 0;
  std::string video_id = "synth";
  double width = 640.0;
  double height = 480.0;
  double fps = 1.0;
  long n_frames = 0;
  std::vector<ToolScript> script;
  NoiseConfig noise;
  std::vector<PhaseWindow> phases;  // optional; truth always includes "full"
};

// Script-level truth: exact usage seconds, exact switch count, and exact
// polyline path lengths per window, independent of any detector noise.
struct TrueMetrics {
  std::array<double, kToolCount> usage_seconds{};
  int switches = 0;
  std::vector<MotionMetrics> motion;  // "full" window first, then each phase
};

struct Scenario {
  GroundTruthSet ground_truth;
  DetectionSet detections;
  VideoMeta meta;
  TrueMetrics truth;
};

// Deterministic generation: ground truth follows the script exactly; with
// all noise parameters zero the detections equal the ground truth with
// confidence 1.0 and no random draws are made. Otherwise, per frame and per
// script entry in config order: one uniform for the drop decision, two for
// the jitter Gaussian (Box-Muller, only when sigma > 0), one for the
// true-positive confidence ~ U[0.6, 1.0]; then per frame one uniform for
// the false-positive decision and, when it fires, one next() for the class,
// four uniforms for the box, and one for the confidence ~ U[0.1, 0.6].
Scenario gen_scenario(const ScenarioConfig& cfg);

// Scenario configuration as a single JSON document; see README for the schema.
ScenarioConfig parse_scenario_config(std::istream& in);
std::string serialize_true_metrics(const TrueMetrics& truth, const std::string& video_id);

Point2 script_position(const ToolScript& script, long frame);

// Exact polyline arc length inside the window, computed segment-wise with
// fractional clipping; this is the independent check for the tracker's
// step-sum route.
double oracle_path_length(const ToolScript& script, const PhaseWindow& phase);
std::array<double, kToolCount> oracle_path_length(const std::vector<ToolScript>& script,
                                                  const PhaseWindow& phase);

// Brute-force AP: enumerates the precision-recall point at every confidence
// cut with a from-scratch greedy matcher, then integrates the envelope with
// a quadratic max. Intentionally independent of the evaluation module.
// Intended for small instances (<= 50 detections per class).
PerClassAP oracle_spatial_ap(const std::vector<Detection>& dets,
                             const std::vector<GroundTruthBox>& gts, double iou_threshold);

}  // namespace scopemetrics::synth
