#include "scopemetrics/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace scopemetrics {

namespace {

bool finite_nonneg(double v) { return std::isfinite(v) && v >= 0.0; }

void check_box_in_frame(const BBox& box, const VideoMeta& meta, long frame_index) {
  if (box.x_max > meta.width || box.y_max > meta.height) {
    throw ValidationError("box_out_of_bounds",
                          "frame " + std::to_string(frame_index) + ": box exceeds " +
                              std::to_string(meta.width) + "x" + std::to_string(meta.height) +
                              " frame of video '" + meta.video_id + "'");
  }
}

void check_frame_in_video(long frame_index, const VideoMeta& meta) {
  if (frame_index >= meta.n_frames) {
    throw ValidationError("frame_out_of_range",
                          "frame " + std::to_string(frame_index) + " outside video '" +
                              meta.video_id + "' with " + std::to_string(meta.n_frames) +
                              " frames");
  }
}

}  // namespace

const std::array<ToolClass, kToolCount>& all_tool_classes() {
  static const std::array<ToolClass, kToolCount> classes = {
      ToolClass::kGrasper,  ToolClass::kBipolar,   ToolClass::kHook,       ToolClass::kScissors,
      ToolClass::kClipper,  ToolClass::kIrrigator, ToolClass::kSpecimenBag};
  return classes;
}

std::string_view tool_name(ToolClass tool) {
  static constexpr std::array<std::string_view, kToolCount> names = {
      "grasper", "bipolar", "hook", "scissors", "clipper", "irrigator", "specimen_bag"};
  return names[static_cast<std::size_t>(tool)];
}

std::optional<ToolClass> tool_from_name(std::string_view name) {
  for (ToolClass tool : all_tool_classes()) {
    if (tool_name(tool) == name) return tool;
  }
  return std::nullopt;
}

ToolClass tool_from_index(int index) {
  if (index < 0 || index >= kToolCount) {
    throw ValidationError("unknown_class", "tool index " + std::to_string(index) + " out of range");
  }
  return static_cast<ToolClass>(index);
}

BBox::BBox(double x_min, double y_min, double x_max, double y_max)
    : x_min(x_min), y_min(y_min), x_max(x_max), y_max(y_max) {
  if (!finite_nonneg(x_min) || !finite_nonneg(y_min) || !std::isfinite(x_max) ||
      !std::isfinite(y_max)) {
    throw ValidationError("invalid_bbox", "coordinates must be finite and non-negative");
  }
  if (!(x_min < x_max) || !(y_min < y_max)) {
    throw ValidationError("invalid_bbox", "box must have strictly positive area");
  }
}

bool operator==(const BBox& a, const BBox& b) {
  return a.x_min == b.x_min && a.y_min == b.y_min && a.x_max == b.x_max && a.y_max == b.y_max;
}

double iou(const BBox& a, const BBox& b) {
  const double iw = std::min(a.x_max, b.x_max) - std::max(a.x_min, b.x_min);
  const double ih = std::min(a.y_max, b.y_max) - std::max(a.y_min, b.y_min);
  if (iw <= 0.0 || ih <= 0.0) return 0.0;
  const double inter = iw * ih;
  return inter / (a.area() + b.area() - inter);
}

Point2 centroid(const BBox& box) {
  return Point2((box.x_min + box.x_max) / 2.0, (box.y_min + box.y_max) / 2.0);
}

void validate(const VideoMeta& meta) {
  if (meta.video_id.empty()) throw ValidationError("invalid_meta", "video_id must be non-empty");
  if (!(meta.width > 0.0) || !(meta.height > 0.0) || !std::isfinite(meta.width) ||
      !std::isfinite(meta.height)) {
    throw ValidationError("invalid_meta",
                          "video '" + meta.video_id + "': width and height must be positive");
  }
  if (meta.n_frames <= 0) {
    throw ValidationError("invalid_meta", "video '" + meta.video_id + "': n_frames must be > 0");
  }
  if (!(meta.fps > 0.0) || !std::isfinite(meta.fps)) {
    throw ValidationError("invalid_meta", "video '" + meta.video_id + "': fps must be > 0");
  }
}

double frame_diagonal(const VideoMeta& meta) {
  validate(meta);
  return std::hypot(meta.width, meta.height);
}

void validate(const PhaseWindow& phase, const VideoMeta& meta) {
  if (phase.name.empty()) throw ValidationError("invalid_phase", "phase name must be non-empty");
  if (phase.start_frame < 0 || phase.start_frame > phase.end_frame ||
      phase.end_frame >= meta.n_frames) {
    throw ValidationError("invalid_phase",
                          "phase '" + phase.name + "' [" + std::to_string(phase.start_frame) +
                              ", " + std::to_string(phase.end_frame) + "] outside video '" +
                              meta.video_id + "' with " + std::to_string(meta.n_frames) +
                              " frames");
  }
}

void validate(const Detection& det) {
  if (det.frame_index < 0) throw ValidationError("invalid_record", "frame_index must be >= 0");
  if (!(det.confidence >= 0.0) || !(det.confidence <= 1.0)) {
    throw ValidationError("confidence_out_of_range",
                          "confidence " + std::to_string(det.confidence) + " outside [0, 1]");
  }
}

void validate(const GroundTruthBox& gt) {
  if (gt.frame_index < 0) throw ValidationError("invalid_record", "frame_index must be >= 0");
}

void validate(const Detection& det, const VideoMeta& meta) {
  validate(det);
  if (det.video_id != meta.video_id) {
    throw ValidationError("foreign_video",
                          "detection belongs to '" + det.video_id + "', not '" + meta.video_id + "'");
  }
  check_frame_in_video(det.frame_index, meta);
  check_box_in_frame(det.box, meta, det.frame_index);
}

void validate(const GroundTruthBox& gt, const VideoMeta& meta) {
  validate(gt);
  if (gt.video_id != meta.video_id) {
    throw ValidationError("foreign_video",
                          "box belongs to '" + gt.video_id + "', not '" + meta.video_id + "'");
  }
  check_frame_in_video(gt.frame_index, meta);
  check_box_in_frame(gt.box, meta, gt.frame_index);
}

}  // namespace scopemetrics
