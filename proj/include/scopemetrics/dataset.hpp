#pragma once

#include <array>
#include <istream>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "scopemetrics/geometry.hpp"

namespace scopemetrics {

// Per-class annotated-instance counts over a ground-truth set.
struct DatasetManifest {
  std::array<long, kToolCount> per_class{};
  long total_instances = 0;
  long n_annotated_frames = 0;  // distinct (video_id, frame_index) pairs
};

struct PresenceRecord {
  std::string video_id;
  long frame_index = 0;
  std::array<int, kToolCount> flags{};  // canonical class order, each 0 or 1
};

// One rater's scores for one video. Domain scores live on the 1-5 GOALS
// scale; `total` is the sum of the four domains. Scores are stored in their
// underlying form: a two-decimal value consistent with a multiple of 1/3
// (a three-rater average) is snapped back to that multiple, so totals like
// 4*14/3 = 18.666... survive the source's two-decimal rounding.
struct GoalsRating {
  std::string video_id;
  std::string rater_id;
  double depth_perception = 0.0;
  double bimanual_dexterity = 0.0;
  double efficiency = 0.0;
  double tissue_handling = 0.0;
  double total = 0.0;
};

struct GroundTruthSet {
  std::vector<GroundTruthBox> boxes;  // sorted by (video_id, frame_index)
  std::vector<VideoMeta> videos;      // sorted by video_id; n_frames inferred, fps 1.0
  // Frame records present in the source, per video, sorted. Covers frames
  // annotated as empty as well, so serialization round-trips them.
  std::map<std::string, std::vector<long>> frames;
};

struct DetectionSet {
  std::vector<Detection> detections;
  std::vector<VideoMeta> videos;
  std::map<std::string, std::vector<long>> frames;
};

// JSON Lines, one frame record per line:
//   {"video_id": "v01", "frame_index": 42, "width": 640.0, "height": 480.0,
//    "boxes": [{"class": "grasper", "bbox": [x_min, y_min, x_max, y_max],
//               "confidence": 0.93}]}
// `confidence` is forbidden in ground-truth files and required in detection
// files. Every malformed input maps to one typed error naming the line.
GroundTruthSet parse_ground_truth(std::istream& in);
DetectionSet parse_detections(std::istream& in);

// CSV with header `frame_index,grasper,bipolar,hook,scissors,clipper,
// irrigator,specimen_bag`. The file carries no video id; callers pass the
// one the file describes (may stay empty for single-video contexts).
std::vector<PresenceRecord> parse_presence_csv(std::istream& in, std::string_view video_id = {});

// CSV with header `video_id,rater_id,depth_perception,bimanual_dexterity,
// efficiency,tissue_handling,total`; the total column may be absent or
// blank. A stored total must agree with the recomputed one within 0.005.
std::vector<GoalsRating> parse_goals_csv(std::istream& in);

// JSON Lines, one video per line:
//   {"video_id": "v01", "width": 640.0, "height": 480.0, "n_frames": 4500, "fps": 1.0}
std::vector<VideoMeta> parse_video_meta(std::istream& in);

// CSV with header `video_id,phase,start_frame,end_frame`, frames inclusive.
std::map<std::string, std::vector<PhaseWindow>> parse_phases_csv(std::istream& in);

// Canonical serializers: sorted records, fixed key order, shortest
// round-trip number formatting. serialize(parse(x)) is a fixed point.
std::string serialize_ground_truth(const GroundTruthSet& set);
std::string serialize_detections(const DetectionSet& set);
std::string serialize_presence_csv(const std::vector<PresenceRecord>& records);
std::string serialize_goals_csv(const std::vector<GoalsRating>& ratings);
std::string serialize_video_meta(const std::vector<VideoMeta>& metas);

DatasetManifest build_manifest(const std::vector<GroundTruthBox>& gts);

// Nearest multiple of 1/3 when the value rounds to the same two decimals,
// otherwise the value unchanged.
double snap_to_third(double value);

const VideoMeta& find_video(const std::vector<VideoMeta>& metas, std::string_view video_id);

}  // namespace scopemetrics
