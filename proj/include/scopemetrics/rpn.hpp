#pragma once

#include <Eigen/Core>

#include <optional>
#include <vector>

#include "scopemetrics/geometry.hpp"

namespace scopemetrics {

// Objectness probabilities are clamped into [kProbEps, 1 - kProbEps] when a
// batch is assembled, so the log loss stays finite. The clamp count is
// reported on the batch rather than applied silently.
inline constexpr double kProbEps = 1e-7;

// IoU ties for the per-ground-truth argmax fallback are taken within this
// tolerance; exact float ties are the intended case, the slack only absorbs
// accumulated arithmetic error.
inline constexpr double kArgmaxTieTolerance = 1e-12;

struct AnchorConfig {
  double stride = 16.0;
  std::vector<double> scales = {128.0, 256.0, 512.0};  // side length of a square anchor
  std::vector<double> aspect_ratios = {0.5, 1.0, 2.0};  // width : height
  double pos_iou = 0.8;
  double neg_iou = 0.3;
};

void validate(const AnchorConfig& cfg);

enum class AnchorLabelValue { kPositive, kNegative, kIgnore };

struct AnchorLabel {
  AnchorLabelValue value = AnchorLabelValue::kIgnore;
  std::optional<int> matched_gt;  // present iff positive
};

// Anchors on a regular grid with centers at (stride*j + stride/2), one per
// (grid position, scale, ratio), ordered row-major then scale then ratio.
// Anchors are clipped to the image; clipping never empties them here because
// every grid center is interior. Throws empty_grid when either axis has no
// grid positions.
std::vector<BBox> generate_anchors(const VideoMeta& meta, const AnchorConfig& cfg);

// Grid position count for the same meta/config; the conventional
// normalization base for the regression term.
long anchor_grid_positions(const VideoMeta& meta, const AnchorConfig& cfg);

// Label rule: positive when max IoU over ground truth exceeds pos_iou; when
// a ground-truth box has no anchor above pos_iou, every anchor tying its
// best IoU (within kArgmaxTieTolerance) is positive instead; negative when
// max IoU < neg_iou and not force-positived; ignore otherwise. matched_gt is
// the anchor's own argmax ground truth, lowest index on ties. Empty ground
// truth labels every anchor negative.
std::vector<AnchorLabel> assign_labels(const std::vector<BBox>& anchors,
                                       const std::vector<BBox>& gts, const AnchorConfig& cfg);

// Center/size offsets: tx = (xg - xa)/wa, ty = (yg - ya)/ha,
// tw = ln(wg/wa), th = ln(hg/ha).
struct BoxDelta {
  double tx = 0.0;
  double ty = 0.0;
  double tw = 0.0;
  double th = 0.0;
};

BoxDelta encode_delta(const BBox& anchor, const BBox& gt);
BBox decode_delta(const BBox& anchor, const BoxDelta& delta);

using DeltaMatrix = Eigen::Matrix<double, Eigen::Dynamic, 4>;

// One image's anchors with labels, predictions, and regression targets.
// target rows are meaningful at positive anchors only.
struct RpnBatch {
  std::vector<BBox> anchors;
  std::vector<AnchorLabel> labels;
  Eigen::ArrayXd objectness;  // clamped into [kProbEps, 1 - kProbEps]
  DeltaMatrix predicted;
  DeltaMatrix target;
  double lambda = 10.0;
  double n_cls = 1.0;
  double n_reg = 1.0;
  int n_clamped = 0;
};

// Validates list lengths, clamps objectness, and resolves normalizers:
// n_cls <= 0 means "number of labeled anchors", n_reg <= 0 means "number of
// anchors" (pass anchor_grid_positions() for the grid-position convention).
RpnBatch make_batch(std::vector<BBox> anchors, std::vector<AnchorLabel> labels,
                    Eigen::ArrayXd objectness, DeltaMatrix predicted, DeltaMatrix target,
                    double lambda = 10.0, double n_cls = 0.0, double n_reg = 0.0);

// Regression targets for a labeled anchor set: encode_delta against the
// matched ground truth at positives, zero rows elsewhere.
DeltaMatrix target_deltas_for(const std::vector<BBox>& anchors,
                              const std::vector<AnchorLabel>& labels,
                              const std::vector<BBox>& gts);

// cls_term = (1/n_cls) * sum of binary cross-entropy over labeled anchors;
// reg_term = (lambda/n_reg) * sum of smooth-L1 over the four delta
// components at positives; total = cls_term + reg_term.
struct LossBreakdown {
  double cls_term = 0.0;
  double reg_term = 0.0;
  double total = 0.0;
};

LossBreakdown rpn_loss(const RpnBatch& batch);

struct LossGradient {
  Eigen::ArrayXd d_objectness;  // zero at ignored anchors
  DeltaMatrix d_deltas;         // zero rows off positives
};

LossGradient rpn_loss_gradient(const RpnBatch& batch);

double smooth_l1(double d);

// Greedy non-maximum suppression. Detections are ranked by descending
// confidence (ties by video, frame, class index, then box corners);
// suppression applies only within the same video and frame, and within the
// same class when per_class is set.
std::vector<Detection> nms(std::vector<Detection> dets, double iou_threshold,
                           bool per_class = true);

}  // namespace scopemetrics
