#pragma once

#include <Eigen/Core>

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "scopemetrics/dataset.hpp"
#include "scopemetrics/geometry.hpp"

namespace scopemetrics {

// Per-frame 0/1 presence, one row per frame, one column per tool class.
using PresenceMatrix = Eigen::Matrix<int, Eigen::Dynamic, kToolCount>;

PresenceMatrix presence_from_detections(const std::vector<Detection>& dets, const VideoMeta& meta,
                                        double min_confidence);

PresenceMatrix presence_from_records(const std::vector<PresenceRecord>& records,
                                     const VideoMeta& meta);

// Sliding-window majority vote per class; edge frames vote over the
// truncated window, and ties (possible only there) keep the original flag.
// window must be odd; window 1 is the identity.
PresenceMatrix smooth_presence(const PresenceMatrix& presence, int window = 3);

struct Interval {
  long start_frame = 0;
  long end_frame = 0;  // inclusive
};

struct Timeline {
  std::array<std::vector<Interval>, kToolCount> per_class;
};

// Maximal runs of 1s per class. Row count must equal meta.n_frames.
Timeline build_timeline(const PresenceMatrix& presence, const VideoMeta& meta);

struct UsageTotals {
  std::array<double, kToolCount> seconds{};
};

UsageTotals usage_totals(const Timeline& timeline, const VideoMeta& meta);

// Exchange events: frames where some class appears (0 -> 1) while a
// different class disappears (1 -> 0) within +/- pair_window frames. A
// frame counts once no matter how many tools change hands on it; a class
// pairing with its own dropout does not count.
int switch_count(const PresenceMatrix& presence, bool smooth_first = false, int pair_window = 2,
                 int smoothing_window = 3);

struct HeatMap {
  Eigen::MatrixXi grid;  // rows x cols, counts
  double frame_width = 0.0;
  double frame_height = 0.0;
};

// Cell (r, c) counts the boxes containing that cell's center point
// ((c + 0.5) * width / cols, (r + 0.5) * height / rows); containment is
// half-open, [min, max).
HeatMap build_heatmap(const std::vector<BBox>& boxes, const VideoMeta& meta, int rows = 32,
                      int cols = 32);

struct TrackPoint {
  long frame_index = 0;
  Point2 center = Point2::Zero();
  BBox box;
};

struct Track {
  ToolClass tool = ToolClass::kGrasper;
  int track_id = 0;
  std::vector<TrackPoint> points;  // strictly increasing frame indices
};

struct TrackingConfig {
  double min_confidence = 0.5;
  double max_jump_frac = 0.15;  // of the frame diagonal
  int max_gap = 3;              // max frame distance between consecutive points
};

void validate(const TrackingConfig& cfg);

// Greedy per-class nearest-centroid association, frame by frame. Within a
// frame, (track, detection) candidates are taken in ascending (distance,
// detection x_min, track id) order; each track extends at most once per
// frame; unmatched detections open new tracks. The ordering makes the track
// partition invariant under within-frame permutation of the input.
std::vector<Track> build_tracks(const std::vector<Detection>& dets, const VideoMeta& meta,
                                const TrackingConfig& cfg = {});

struct ClassMotion {
  double path_length_px = 0.0;
  double path_length_normalized = 0.0;  // divided by the frame diagonal
  int n_tracks = 0;                     // tracks with at least one point in the window
};

struct MotionMetrics {
  PhaseWindow phase;
  std::array<ClassMotion, kToolCount> per_class;
};

// Sum of Euclidean centroid steps between consecutive track points whose
// frames both lie inside the window. A window with no tracked points yields
// zeros, not an error.
MotionMetrics path_length(const std::vector<Track>& tracks, const PhaseWindow& phase,
                          const VideoMeta& meta);

struct SpearmanResult {
  double rho = 0.0;
  int n = 0;
};

// Spearman rank correlation between a per-video metric and per-video GOALS
// totals (ratings averaged across raters first). Ties use average ranks.
// Requires at least 3 videos common to both sides.
SpearmanResult goals_correlation(const std::map<std::string, double>& metric_per_video,
                                 const std::vector<GoalsRating>& ratings);

SpearmanResult spearman(const std::vector<double>& x, const std::vector<double>& y);

struct AnalyticsConfig {
  double min_confidence = 0.5;
  int smoothing_window = 3;
  int switch_pair_window = 2;
  TrackingConfig tracking;
  int heatmap_rows = 32;
  int heatmap_cols = 32;
};

struct GoalsSummary {
  double depth_perception = 0.0;
  double bimanual_dexterity = 0.0;
  double efficiency = 0.0;
  double tissue_handling = 0.0;
  double total = 0.0;
  int n_raters = 0;
};

struct SkillReport {
  std::string video_id;
  VideoMeta meta;
  AnalyticsConfig config;
  Timeline timeline;
  UsageTotals usage;
  int switches = 0;
  std::array<HeatMap, kToolCount> heatmaps;
  HeatMap combined_heatmap;
  std::vector<Track> tracks;
  std::vector<MotionMetrics> motion;  // full-video window first, then each phase
  std::optional<GoalsSummary> goals;
};

// Deterministic composition of the analytics above. The motion list always
// starts with a "full" whole-video window, followed by the given phases.
SkillReport build_report(const std::vector<Detection>& dets, const VideoMeta& meta,
                         const std::vector<PhaseWindow>& phases,
                         const std::vector<GoalsRating>& ratings,
                         const AnalyticsConfig& config = {});

}  // namespace scopemetrics
