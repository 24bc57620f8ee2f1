#pragma once

#include <Eigen/Core>

#include <array>
#include <optional>
#include <string>
#include <string_view>

#include "scopemetrics/errors.hpp"

namespace scopemetrics {

using Point2 = Eigen::Vector2d;

// The seven instrument classes in their canonical index order. Every
// per-class array, file column, and report key follows this order.
enum class ToolClass : int {
  kGrasper = 0,
  kBipolar = 1,
  kHook = 2,
  kScissors = 3,
  kClipper = 4,
  kIrrigator = 5,
  kSpecimenBag = 6,
};

inline constexpr int kToolCount = 7;

const std::array<ToolClass, kToolCount>& all_tool_classes();
std::string_view tool_name(ToolClass tool);
std::optional<ToolClass> tool_from_name(std::string_view name);
ToolClass tool_from_index(int index);  // throws unknown_class on out-of-range

inline int tool_index(ToolClass tool) { return static_cast<int>(tool); }

// Axis-aligned box in pixel coordinates, origin top-left, corner form.
// area() = (x_max - x_min) * (y_max - y_min). Construction rejects
// non-finite or negative coordinates and zero-area boxes; a degenerate box
// signals corrupt upstream data, not an IoU-0 case.
struct BBox {
  BBox(double x_min, double y_min, double x_max, double y_max);

  double x_min;
  double y_min;
  double x_max;
  double y_max;

  double width() const { return x_max - x_min; }
  double height() const { return y_max - y_min; }
  double area() const { return width() * height(); }
};

bool operator==(const BBox& a, const BBox& b);

// Intersection over union. Symmetric, in [0, 1], exactly 1.0 for a == b and
// exactly 0.0 for disjoint boxes.
double iou(const BBox& a, const BBox& b);

Point2 centroid(const BBox& box);

struct VideoMeta {
  std::string video_id;
  double width = 0.0;
  double height = 0.0;
  long n_frames = 0;
  double fps = 1.0;
};

void validate(const VideoMeta& meta);
double frame_diagonal(const VideoMeta& meta);

// Inclusive frame range of a named procedure phase.
struct PhaseWindow {
  std::string name;
  long start_frame = 0;
  long end_frame = 0;
};

void validate(const PhaseWindow& phase, const VideoMeta& meta);

struct Detection {
  std::string video_id;
  long frame_index = 0;
  ToolClass tool = ToolClass::kGrasper;
  BBox box;
  double confidence = 0.0;
};

struct GroundTruthBox {
  std::string video_id;
  long frame_index = 0;
  ToolClass tool = ToolClass::kGrasper;
  BBox box;
};

void validate(const Detection& det);
void validate(const GroundTruthBox& gt);

// Checks frame range and box bounds against the video the record claims.
void validate(const Detection& det, const VideoMeta& meta);
void validate(const GroundTruthBox& gt, const VideoMeta& meta);

}  // namespace scopemetrics
