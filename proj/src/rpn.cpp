#include "scopemetrics/rpn.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

namespace scopemetrics {

namespace {

bool is_labeled(const AnchorLabel& label) { return label.value != AnchorLabelValue::kIgnore; }

std::tuple<double, double, double, double> center_size(const BBox& box) {
  return {(box.x_min + box.x_max) / 2.0, (box.y_min + box.y_max) / 2.0, box.width(), box.height()};
}

}  // namespace

void validate(const AnchorConfig& cfg) {
  if (!(cfg.stride >= 1.0)) throw ValidationError("invalid_config", "stride must be >= 1");
  if (cfg.scales.empty() || cfg.aspect_ratios.empty()) {
    throw ValidationError("invalid_config", "scales and aspect_ratios must be non-empty");
  }
  for (double s : cfg.scales) {
    if (!(s > 0.0)) throw ValidationError("invalid_config", "scales must be positive");
  }
  for (double r : cfg.aspect_ratios) {
    if (!(r > 0.0)) throw ValidationError("invalid_config", "aspect ratios must be positive");
  }
  if (!(cfg.neg_iou >= 0.0) || !(cfg.neg_iou < cfg.pos_iou) || !(cfg.pos_iou <= 1.0)) {
    throw ValidationError("invalid_config", "need 0 <= neg_iou < pos_iou <= 1");
  }
}

long anchor_grid_positions(const VideoMeta& meta, const AnchorConfig& cfg) {
  validate(meta);
  validate(cfg);
  const long cols = static_cast<long>(std::floor(meta.width / cfg.stride));
  const long rows = static_cast<long>(std::floor(meta.height / cfg.stride));
  if (cols <= 0 || rows <= 0) {
    throw ValidationError("empty_grid", "stride " + std::to_string(cfg.stride) +
                                            " leaves no grid positions on a " +
                                            std::to_string(meta.width) + "x" +
                                            std::to_string(meta.height) + " image");
  }
  return cols * rows;
}

std::vector<BBox> generate_anchors(const VideoMeta& meta, const AnchorConfig& cfg) {
  const long positions = anchor_grid_positions(meta, cfg);
  const long cols = static_cast<long>(std::floor(meta.width / cfg.stride));
  const long rows = positions / cols;

  std::vector<BBox> anchors;
  anchors.reserve(static_cast<std::size_t>(positions) * cfg.scales.size() *
                  cfg.aspect_ratios.size());
  for (long r = 0; r < rows; ++r) {
    const double cy = cfg.stride * static_cast<double>(r) + cfg.stride / 2.0;
    for (long c = 0; c < cols; ++c) {
      const double cx = cfg.stride * static_cast<double>(c) + cfg.stride / 2.0;
      for (double scale : cfg.scales) {
        for (double ratio : cfg.aspect_ratios) {
          const double w = scale * std::sqrt(ratio);
          const double h = scale / std::sqrt(ratio);
          const double x0 = std::clamp(cx - w / 2.0, 0.0, meta.width);
          const double y0 = std::clamp(cy - h / 2.0, 0.0, meta.height);
          const double x1 = std::clamp(cx + w / 2.0, 0.0, meta.width);
          const double y1 = std::clamp(cy + h / 2.0, 0.0, meta.height);
          if (x0 < x1 && y0 < y1) anchors.emplace_back(x0, y0, x1, y1);
        }
      }
    }
  }
  return anchors;
}

std::vector<AnchorLabel> assign_labels(const std::vector<BBox>& anchors,
                                       const std::vector<BBox>& gts, const AnchorConfig& cfg) {
  validate(cfg);
  if (anchors.empty()) throw ValidationError("length_mismatch", "anchor list is empty");

  const auto n_anchors = static_cast<Eigen::Index>(anchors.size());
  std::vector<AnchorLabel> labels(anchors.size());
  if (gts.empty()) {
    for (AnchorLabel& label : labels) label.value = AnchorLabelValue::kNegative;
    return labels;
  }

  const auto n_gts = static_cast<Eigen::Index>(gts.size());
  Eigen::MatrixXd overlap(n_anchors, n_gts);
  for (Eigen::Index i = 0; i < n_anchors; ++i) {
    for (Eigen::Index j = 0; j < n_gts; ++j) {
      overlap(i, j) = iou(anchors[i], gts[j]);
    }
  }

  for (Eigen::Index i = 0; i < n_anchors; ++i) {
    Eigen::Index best_gt = 0;
    const double best = overlap.row(i).maxCoeff(&best_gt);  // first (lowest) index on ties
    if (best > cfg.pos_iou) {
      labels[i] = {AnchorLabelValue::kPositive, static_cast<int>(best_gt)};
    } else if (best < cfg.neg_iou) {
      labels[i].value = AnchorLabelValue::kNegative;
    }
  }

  // Fallback: a ground truth with no anchor above pos_iou claims every
  // anchor that ties its best IoU.
  for (Eigen::Index j = 0; j < n_gts; ++j) {
    const double gt_best = overlap.col(j).maxCoeff();
    if (gt_best > cfg.pos_iou) continue;
    for (Eigen::Index i = 0; i < n_anchors; ++i) {
      if (overlap(i, j) >= gt_best - kArgmaxTieTolerance &&
          labels[i].value != AnchorLabelValue::kPositive) {
        Eigen::Index best_gt = 0;
        overlap.row(i).maxCoeff(&best_gt);
        labels[i] = {AnchorLabelValue::kPositive, static_cast<int>(best_gt)};
      }
    }
  }
  return labels;
}

BoxDelta encode_delta(const BBox& anchor, const BBox& gt) {
  const auto [xa, ya, wa, ha] = center_size(anchor);
  const auto [xg, yg, wg, hg] = center_size(gt);
  return BoxDelta{(xg - xa) / wa, (yg - ya) / ha, std::log(wg / wa), std::log(hg / ha)};
}

BBox decode_delta(const BBox& anchor, const BoxDelta& delta) {
  const auto [xa, ya, wa, ha] = center_size(anchor);
  const double x = delta.tx * wa + xa;
  const double y = delta.ty * ha + ya;
  const double w = wa * std::exp(delta.tw);
  const double h = ha * std::exp(delta.th);
  return BBox(x - w / 2.0, y - h / 2.0, x + w / 2.0, y + h / 2.0);
}

RpnBatch make_batch(std::vector<BBox> anchors, std::vector<AnchorLabel> labels,
                    Eigen::ArrayXd objectness, DeltaMatrix predicted, DeltaMatrix target,
                    double lambda, double n_cls, double n_reg) {
  const auto n = static_cast<Eigen::Index>(anchors.size());
  if (static_cast<Eigen::Index>(labels.size()) != n || objectness.size() != n ||
      predicted.rows() != n || target.rows() != n) {
    throw ValidationError("length_mismatch", "anchors, labels, objectness, and deltas must align");
  }
  if (!(lambda >= 0.0)) throw ValidationError("invalid_config", "lambda must be >= 0");
  for (const AnchorLabel& label : labels) {
    if ((label.value == AnchorLabelValue::kPositive) != label.matched_gt.has_value()) {
      throw ValidationError("invalid_label", "matched_gt must be present exactly at positives");
    }
  }

  RpnBatch batch;
  batch.n_clamped = static_cast<int>(
      (objectness < kProbEps).count() + (objectness > 1.0 - kProbEps).count());
  batch.objectness = objectness.max(kProbEps).min(1.0 - kProbEps);
  batch.anchors = std::move(anchors);
  batch.labels = std::move(labels);
  batch.predicted = std::move(predicted);
  batch.target = std::move(target);
  batch.lambda = lambda;

  long labeled = 0;
  for (const AnchorLabel& label : batch.labels) labeled += is_labeled(label) ? 1 : 0;
  batch.n_cls = n_cls > 0.0 ? n_cls : static_cast<double>(std::max(labeled, 1L));
  batch.n_reg = n_reg > 0.0 ? n_reg : static_cast<double>(std::max(n, Eigen::Index{1}));
  return batch;
}

DeltaMatrix target_deltas_for(const std::vector<BBox>& anchors,
                              const std::vector<AnchorLabel>& labels,
                              const std::vector<BBox>& gts) {
  if (anchors.size() != labels.size()) {
    throw ValidationError("length_mismatch", "anchors and labels must align");
  }
  DeltaMatrix target = DeltaMatrix::Zero(static_cast<Eigen::Index>(anchors.size()), 4);
  for (std::size_t i = 0; i < anchors.size(); ++i) {
    if (labels[i].value != AnchorLabelValue::kPositive) continue;
    const int j = *labels[i].matched_gt;
    if (j < 0 || j >= static_cast<int>(gts.size())) {
      throw ValidationError("invalid_label", "matched_gt index out of range");
    }
    const BoxDelta d = encode_delta(anchors[i], gts[j]);
    target.row(static_cast<Eigen::Index>(i)) << d.tx, d.ty, d.tw, d.th;
  }
  return target;
}

double smooth_l1(double d) {
  const double a = std::abs(d);
  return a < 1.0 ? 0.5 * d * d : a - 0.5;
}

LossBreakdown rpn_loss(const RpnBatch& batch) {
  double cls_sum = 0.0;
  double reg_sum = 0.0;
  long labeled = 0;
  for (std::size_t i = 0; i < batch.labels.size(); ++i) {
    const AnchorLabel& label = batch.labels[i];
    if (!is_labeled(label)) continue;
    ++labeled;
    const double p = batch.objectness[static_cast<Eigen::Index>(i)];
    if (label.value == AnchorLabelValue::kPositive) {
      cls_sum -= std::log(p);
      const auto diff =
          batch.predicted.row(static_cast<Eigen::Index>(i)) - batch.target.row(static_cast<Eigen::Index>(i));
      for (int c = 0; c < 4; ++c) reg_sum += smooth_l1(diff[c]);
    } else {
      cls_sum -= std::log(1.0 - p);
    }
  }
  if (labeled == 0) {
    throw ValidationError("no_anchors", "every anchor is ignored; loss is undefined");
  }
  LossBreakdown loss;
  loss.cls_term = cls_sum / batch.n_cls;
  loss.reg_term = batch.lambda / batch.n_reg * reg_sum;
  loss.total = loss.cls_term + loss.reg_term;
  return loss;
}

LossGradient rpn_loss_gradient(const RpnBatch& batch) {
  long labeled = 0;
  for (const AnchorLabel& label : batch.labels) labeled += is_labeled(label) ? 1 : 0;
  if (labeled == 0) {
    throw ValidationError("no_anchors", "every anchor is ignored; loss is undefined");
  }

  LossGradient grad;
  grad.d_objectness = Eigen::ArrayXd::Zero(batch.objectness.size());
  grad.d_deltas = DeltaMatrix::Zero(batch.predicted.rows(), 4);
  for (std::size_t i = 0; i < batch.labels.size(); ++i) {
    const AnchorLabel& label = batch.labels[i];
    if (!is_labeled(label)) continue;
    const auto row = static_cast<Eigen::Index>(i);
    const double p = batch.objectness[row];
    const double target = label.value == AnchorLabelValue::kPositive ? 1.0 : 0.0;
    grad.d_objectness[row] = (p - target) / (p * (1.0 - p)) / batch.n_cls;
    if (label.value == AnchorLabelValue::kPositive) {
      const Eigen::Array4d diff =
          (batch.predicted.row(row) - batch.target.row(row)).transpose().array();
      grad.d_deltas.row(row) =
          (batch.lambda / batch.n_reg * diff.max(-1.0).min(1.0)).matrix().transpose();
    }
  }
  return grad;
}

std::vector<Detection> nms(std::vector<Detection> dets, double iou_threshold, bool per_class) {
  if (!(iou_threshold >= 0.0) || !(iou_threshold <= 1.0)) {
    throw ValidationError("threshold_out_of_range",
                          "IoU threshold " + std::to_string(iou_threshold) + " outside [0, 1]");
  }
  std::sort(dets.begin(), dets.end(), [](const Detection& a, const Detection& b) {
    if (a.confidence != b.confidence) return a.confidence > b.confidence;
    return std::tie(a.video_id, a.frame_index, a.tool, a.box.x_min, a.box.y_min, a.box.x_max,
                    a.box.y_max) < std::tie(b.video_id, b.frame_index, b.tool, b.box.x_min,
                                            b.box.y_min, b.box.x_max, b.box.y_max);
  });

  std::vector<Detection> kept;
  for (const Detection& det : dets) {
    bool suppressed = false;
    for (const Detection& k : kept) {
      if (k.video_id != det.video_id || k.frame_index != det.frame_index) continue;
      if (per_class && k.tool != det.tool) continue;
      const double overlap = iou(k.box, det.box);
      // disjoint boxes never suppress each other, even at threshold 0
      if (overlap > 0.0 && overlap >= iou_threshold) {
        suppressed = true;
        break;
      }
    }
    if (!suppressed) kept.push_back(det);
  }
  return kept;
}

}  // namespace scopemetrics
