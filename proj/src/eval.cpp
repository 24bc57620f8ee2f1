#include "scopemetrics/eval.hpp"

#include <algorithm>
#include <numeric>
#include <tuple>

namespace scopemetrics {

namespace {

void check_threshold(double iou_threshold) {
  if (!(iou_threshold >= 0.0) || !(iou_threshold <= 1.0)) {
    throw ValidationError("threshold_out_of_range",
                          "IoU threshold " + std::to_string(iou_threshold) + " outside [0, 1]");
  }
}

std::vector<int> confidence_order(const std::vector<Detection>& dets) {
  std::vector<int> order(dets.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&dets](int a, int b) {
    return dets[static_cast<std::size_t>(a)].confidence >
           dets[static_cast<std::size_t>(b)].confidence;
  });
  return order;
}

}  // namespace

std::vector<MatchOutcome> match_spatial(const std::vector<Detection>& dets,
                                        const std::vector<GroundTruthBox>& gts,
                                        double iou_threshold) {
  check_threshold(iou_threshold);

  std::vector<bool> gt_taken(gts.size(), false);
  std::vector<MatchOutcome> outcomes;
  outcomes.reserve(dets.size());
  for (int det_index : confidence_order(dets)) {
    const Detection& det = dets[static_cast<std::size_t>(det_index)];
    int best_gt = -1;
    double best_iou = 0.0;
    for (std::size_t j = 0; j < gts.size(); ++j) {
      const GroundTruthBox& gt = gts[j];
      if (gt_taken[j] || gt.tool != det.tool || gt.frame_index != det.frame_index ||
          gt.video_id != det.video_id) {
        continue;
      }
      const double overlap = iou(det.box, gt.box);
      if (overlap > best_iou) {
        best_iou = overlap;
        best_gt = static_cast<int>(j);
      }
    }
    MatchOutcome outcome;
    outcome.detection_index = det_index;
    if (best_gt >= 0 && best_iou >= iou_threshold) {
      outcome.is_true_positive = true;
      outcome.matched_gt = best_gt;
      gt_taken[static_cast<std::size_t>(best_gt)] = true;
    }
    outcomes.push_back(outcome);
  }
  return outcomes;
}

PRCurve pr_curve(const std::vector<MatchOutcome>& outcomes, long n_gt) {
  if (n_gt <= 0) {
    throw ValidationError("undefined_ap", "AP is undefined without ground-truth instances");
  }
  PRCurve curve;
  curve.n_gt = n_gt;
  curve.points.reserve(outcomes.size());
  long tp = 0;
  long fp = 0;
  for (const MatchOutcome& outcome : outcomes) {
    outcome.is_true_positive ? ++tp : ++fp;
    curve.points.emplace_back(static_cast<double>(tp) / static_cast<double>(n_gt),
                              static_cast<double>(tp) / static_cast<double>(tp + fp));
  }
  return curve;
}

double ap_from_matches(const std::vector<MatchOutcome>& outcomes, long n_gt) {
  const PRCurve curve = pr_curve(outcomes, n_gt);
  const auto n = curve.points.size();

  std::vector<double> envelope(n);  // max precision at recall >= r_k
  double running = 0.0;
  for (std::size_t k = n; k-- > 0;) {
    running = std::max(running, curve.points[k].second);
    envelope[k] = running;
  }

  double ap = 0.0;
  double prev_recall = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double recall = curve.points[k].first;
    if (recall > prev_recall) {
      ap += (recall - prev_recall) * envelope[k];
      prev_recall = recall;
    }
  }
  return ap;
}

double mean_ap(const PerClassAP& per_class) {
  // Shifted mean: exact for identical inputs, well-conditioned in general.
  std::optional<double> base;
  int defined = 0;
  double shifted_sum = 0.0;
  for (const auto& ap : per_class) {
    if (!ap) continue;
    if (!base) base = *ap;
    ++defined;
    shifted_sum += *ap - *base;
  }
  if (defined == 0) {
    throw ValidationError("no_defined_classes", "no class has a defined AP");
  }
  return *base + shifted_sum / defined;
}

APResult evaluate_spatial(const std::vector<Detection>& dets,
                          const std::vector<GroundTruthBox>& gts, double iou_threshold) {
  check_threshold(iou_threshold);
  APResult result;
  for (ToolClass tool : all_tool_classes()) {
    std::vector<Detection> class_dets;
    std::vector<GroundTruthBox> class_gts;
    for (const Detection& d : dets) {
      if (d.tool == tool) class_dets.push_back(d);
    }
    for (const GroundTruthBox& g : gts) {
      if (g.tool == tool) class_gts.push_back(g);
    }
    if (class_gts.empty()) continue;
    const auto outcomes = match_spatial(class_dets, class_gts, iou_threshold);
    result.per_class[tool_index(tool)] = ap_from_matches(outcomes, static_cast<long>(class_gts.size()));
  }
  result.map = mean_ap(result.per_class);
  return result;
}

PresenceScores to_presence(const std::vector<Detection>& dets, const VideoMeta& meta) {
  validate(meta);
  PresenceScores presence;
  presence.video_id = meta.video_id;
  presence.scores.setZero(meta.n_frames, kToolCount);
  for (const Detection& det : dets) {
    validate(det, meta);
    double& cell = presence.scores(det.frame_index, tool_index(det.tool));
    cell = std::max(cell, det.confidence);
  }
  return presence;
}

APResult presence_ap(const PresenceScores& scores, const std::vector<PresenceRecord>& labels) {
  const long n_frames = scores.scores.rows();
  std::vector<const PresenceRecord*> by_frame(static_cast<std::size_t>(n_frames), nullptr);
  for (const PresenceRecord& label : labels) {
    if (label.video_id != scores.video_id) {
      throw ValidationError("frame_set_mismatch", "label for video '" + label.video_id +
                                                      "' does not match scores for '" +
                                                      scores.video_id + "'");
    }
    if (label.frame_index < 0 || label.frame_index >= n_frames ||
        by_frame[static_cast<std::size_t>(label.frame_index)] != nullptr) {
      throw ValidationError("frame_set_mismatch",
                            "labels must cover each scored frame exactly once");
    }
    by_frame[static_cast<std::size_t>(label.frame_index)] = &label;
  }
  if (static_cast<long>(labels.size()) != n_frames) {
    throw ValidationError("frame_set_mismatch", "labels cover " + std::to_string(labels.size()) +
                                                    " frames, scores cover " +
                                                    std::to_string(n_frames));
  }

  APResult result;
  for (int c = 0; c < kToolCount; ++c) {
    long positives = 0;
    for (const PresenceRecord* label : by_frame) positives += label->flags[c];
    if (positives == 0) continue;

    std::vector<long> order(static_cast<std::size_t>(n_frames));
    std::iota(order.begin(), order.end(), 0L);
    std::stable_sort(order.begin(), order.end(), [&](long a, long b) {
      return scores.scores(a, c) > scores.scores(b, c);
    });

    std::vector<MatchOutcome> outcomes;
    outcomes.reserve(order.size());
    for (long frame : order) {
      MatchOutcome outcome;
      outcome.detection_index = static_cast<int>(frame);
      outcome.is_true_positive = by_frame[static_cast<std::size_t>(frame)]->flags[c] == 1;
      outcomes.push_back(outcome);
    }
    result.per_class[c] = ap_from_matches(outcomes, positives);
  }
  result.map = mean_ap(result.per_class);
  return result;
}

}  // namespace scopemetrics
