#pragma once

#include <Eigen/Core>

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "scopemetrics/dataset.hpp"
#include "scopemetrics/geometry.hpp"

namespace scopemetrics {

struct MatchOutcome {
  int detection_index = 0;  // index into the caller's detection list
  bool is_true_positive = false;
  std::optional<int> matched_gt;  // index into the caller's ground-truth list
};

// Greedy matching within identical (video, frame, class) groups. Detections
// are processed in descending confidence (ties keep input order); each takes
// the unmatched ground truth of highest IoU when that IoU >= threshold
// (inclusive), otherwise it is a false positive. Outcomes are returned in
// processing order.
std::vector<MatchOutcome> match_spatial(const std::vector<Detection>& dets,
                                        const std::vector<GroundTruthBox>& gts,
                                        double iou_threshold = 0.5);

struct PRCurve {
  std::vector<std::pair<double, double>> points;  // (recall, precision), recall non-decreasing
  long n_gt = 0;
};

PRCurve pr_curve(const std::vector<MatchOutcome>& outcomes, long n_gt);

// All-point interpolated area under the precision-recall curve:
// sum over recall increments of the maximum precision at or beyond that
// recall. Throws undefined_ap when n_gt is zero.
double ap_from_matches(const std::vector<MatchOutcome>& outcomes, long n_gt);

using PerClassAP = std::array<std::optional<double>, kToolCount>;

// Arithmetic mean over classes with a defined AP; exact when all defined
// values are equal. Throws no_defined_classes when none is defined.
double mean_ap(const PerClassAP& per_class);

struct APResult {
  PerClassAP per_class;
  double map = 0.0;
};

APResult evaluate_spatial(const std::vector<Detection>& dets,
                          const std::vector<GroundTruthBox>& gts, double iou_threshold = 0.5);

// One score per (frame, class): the maximum confidence among that frame's
// detections of the class, zero when there is none.
struct PresenceScores {
  std::string video_id;
  Eigen::Matrix<double, Eigen::Dynamic, kToolCount> scores;  // row per frame
};

PresenceScores to_presence(const std::vector<Detection>& dets, const VideoMeta& meta);

// Ranks frames per class by score (ties by frame index) against binary
// labels; labels must cover exactly the score grid's frames. Classes whose
// labels are all zero have undefined AP and are excluded from the mean.
APResult presence_ap(const PresenceScores& scores, const std::vector<PresenceRecord>& labels);

}  // namespace scopemetrics
