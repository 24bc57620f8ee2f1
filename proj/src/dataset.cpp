#include "scopemetrics/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <set>
#include <sstream>
#include <utility>

#include "json.hpp"
#include "scopemetrics/format.hpp"

namespace scopemetrics {

namespace {

using json = nlohmann::ordered_json;

[[noreturn]] void malformed(long line_no, const std::string& what) {
  throw ValidationError("malformed_line", "line " + std::to_string(line_no) + ": " + what);
}

const json& require_field(const json& obj, const char* key, long line_no) {
  auto it = obj.find(key);
  if (it == obj.end()) malformed(line_no, std::string("missing field '") + key + "'");
  return *it;
}

double require_number(const json& obj, const char* key, long line_no) {
  const json& v = require_field(obj, key, line_no);
  if (!v.is_number()) malformed(line_no, std::string("field '") + key + "' must be a number");
  return v.get<double>();
}

long require_integer(const json& obj, const char* key, long line_no) {
  const json& v = require_field(obj, key, line_no);
  if (!v.is_number_integer()) malformed(line_no, std::string("field '") + key + "' must be an integer");
  return v.get<long>();
}

std::string require_string(const json& obj, const char* key, long line_no) {
  const json& v = require_field(obj, key, line_no);
  if (!v.is_string()) malformed(line_no, std::string("field '") + key + "' must be a string");
  return v.get<std::string>();
}

struct RawBox {
  ToolClass tool;
  BBox box;
  std::optional<double> confidence;
};

struct FrameRecord {
  long line_no;
  std::string video_id;
  long frame_index;
  double width;
  double height;
  std::vector<RawBox> boxes;
};

ToolClass parse_tool(const json& box_obj, long line_no) {
  const std::string name = require_string(box_obj, "class", line_no);
  auto tool = tool_from_name(name);
  if (!tool) throw ValidationError("unknown_class", "line " + std::to_string(line_no) + ": '" + name + "'");
  return *tool;
}

BBox parse_bbox(const json& box_obj, long line_no) {
  const json& arr = require_field(box_obj, "bbox", line_no);
  if (!arr.is_array() || arr.size() != 4) malformed(line_no, "'bbox' must be an array of 4 numbers");
  double c[4];
  for (int i = 0; i < 4; ++i) {
    if (!arr[i].is_number()) malformed(line_no, "'bbox' must be an array of 4 numbers");
    c[i] = arr[i].get<double>();
  }
  try {
    return BBox(c[0], c[1], c[2], c[3]);
  } catch (const ValidationError& e) {
    throw ValidationError(e.code(), "line " + std::to_string(line_no) + ": " + e.message());
  }
}

// Shared line-by-line reader for ground-truth and detection streams.
std::vector<FrameRecord> read_frame_records(std::istream& in, bool with_confidence) {
  std::vector<FrameRecord> records;
  std::map<std::string, std::pair<double, double>> dims;
  std::set<std::pair<std::string, long>> seen;

  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;

    json obj;
    try {
      obj = json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      malformed(line_no, std::string("invalid JSON (") + e.what() + ")");
    }
    if (!obj.is_object()) malformed(line_no, "expected a JSON object");

    FrameRecord rec;
    rec.line_no = line_no;
    rec.video_id = require_string(obj, "video_id", line_no);
    rec.frame_index = require_integer(obj, "frame_index", line_no);
    rec.width = require_number(obj, "width", line_no);
    rec.height = require_number(obj, "height", line_no);
    if (rec.video_id.empty()) malformed(line_no, "video_id must be non-empty");
    if (rec.frame_index < 0) malformed(line_no, "frame_index must be >= 0");
    if (!(rec.width > 0.0) || !(rec.height > 0.0)) malformed(line_no, "width and height must be positive");

    auto [it, inserted] = dims.emplace(rec.video_id, std::make_pair(rec.width, rec.height));
    if (!inserted && (it->second.first != rec.width || it->second.second != rec.height)) {
      malformed(line_no, "frame dimensions conflict with an earlier record of video '" + rec.video_id + "'");
    }
    if (!seen.emplace(rec.video_id, rec.frame_index).second) {
      throw ValidationError("duplicate_frame",
                            "line " + std::to_string(line_no) + ": frame " +
                                std::to_string(rec.frame_index) + " of video '" + rec.video_id +
                                "' already defined");
    }

    const json& boxes = require_field(obj, "boxes", line_no);
    if (!boxes.is_array()) malformed(line_no, "'boxes' must be an array");
    for (const json& b : boxes) {
      if (!b.is_object()) malformed(line_no, "each box must be a JSON object");
      RawBox raw{parse_tool(b, line_no), parse_bbox(b, line_no), std::nullopt};
      const bool has_conf = b.contains("confidence");
      if (with_confidence) {
        if (!has_conf) malformed(line_no, "detection box is missing 'confidence'");
        if (!b["confidence"].is_number()) malformed(line_no, "'confidence' must be a number");
        const double conf = b["confidence"].get<double>();
        if (!(conf >= 0.0) || !(conf <= 1.0)) {
          throw ValidationError("confidence_out_of_range",
                                "line " + std::to_string(line_no) + ": confidence " +
                                    format_double(conf) + " outside [0, 1]");
        }
        raw.confidence = conf;
      } else if (has_conf) {
        malformed(line_no, "'confidence' is not allowed in ground-truth files");
      }
      if (raw.box.x_max > rec.width || raw.box.y_max > rec.height) {
        throw ValidationError("box_out_of_bounds",
                              "line " + std::to_string(line_no) + ": frame " +
                                  std::to_string(rec.frame_index) + ": box exceeds " +
                                  format_double(rec.width) + "x" + format_double(rec.height));
      }
      rec.boxes.push_back(std::move(raw));
    }
    records.push_back(std::move(rec));
  }

  std::stable_sort(records.begin(), records.end(), [](const FrameRecord& a, const FrameRecord& b) {
    return std::tie(a.video_id, a.frame_index) < std::tie(b.video_id, b.frame_index);
  });
  return records;
}

std::vector<VideoMeta> infer_metas(const std::vector<FrameRecord>& records) {
  std::map<std::string, VideoMeta> metas;
  for (const FrameRecord& rec : records) {
    VideoMeta& m = metas[rec.video_id];
    m.video_id = rec.video_id;
    m.width = rec.width;
    m.height = rec.height;
    m.n_frames = std::max(m.n_frames, rec.frame_index + 1);
    m.fps = 1.0;
  }
  std::vector<VideoMeta> out;
  out.reserve(metas.size());
  for (auto& [id, m] : metas) out.push_back(std::move(m));
  return out;
}

std::map<std::string, std::vector<long>> covered_frames(const std::vector<FrameRecord>& records) {
  std::map<std::string, std::vector<long>> frames;
  for (const FrameRecord& rec : records) frames[rec.video_id].push_back(rec.frame_index);
  return frames;  // records are sorted, so each list is already sorted
}

std::vector<std::string> split_csv_row(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

std::optional<std::string> next_csv_line(std::istream& in, long& line_no) {
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) return line;
  }
  return std::nullopt;
}

double parse_csv_double(const std::string& field, long line_no) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(field, &pos);
    if (pos != field.size()) malformed(line_no, "'" + field + "' is not a number");
    return v;
  } catch (const std::logic_error&) {
    malformed(line_no, "'" + field + "' is not a number");
  }
}

long parse_csv_long(const std::string& field, long line_no) {
  try {
    std::size_t pos = 0;
    const long v = std::stol(field, &pos);
    if (pos != field.size()) malformed(line_no, "'" + field + "' is not an integer");
    return v;
  } catch (const std::logic_error&) {
    malformed(line_no, "'" + field + "' is not an integer");
  }
}

constexpr const char* kPresenceHeader =
    "frame_index,grasper,bipolar,hook,scissors,clipper,irrigator,specimen_bag";
constexpr const char* kGoalsHeader =
    "video_id,rater_id,depth_perception,bimanual_dexterity,efficiency,tissue_handling,total";
constexpr const char* kGoalsHeaderNoTotal =
    "video_id,rater_id,depth_perception,bimanual_dexterity,efficiency,tissue_handling";
constexpr const char* kPhasesHeader = "video_id,phase,start_frame,end_frame";

json frame_line_json(const std::string& video_id, long frame_index, double width, double height) {
  json obj;
  obj["video_id"] = video_id;
  obj["frame_index"] = frame_index;
  obj["width"] = width;
  obj["height"] = height;
  obj["boxes"] = json::array();
  return obj;
}

json box_json(ToolClass tool, const BBox& box) {
  json obj;
  obj["class"] = std::string(tool_name(tool));
  obj["bbox"] = {box.x_min, box.y_min, box.x_max, box.y_max};
  return obj;
}

// Frame lists may omit frames that only exist as box records (hand-built
// sets); merge the two sources so nothing is dropped.
template <typename Record>
std::map<std::string, std::vector<long>> merged_frames(
    const std::map<std::string, std::vector<long>>& frames, const std::vector<Record>& records) {
  std::map<std::string, std::set<long>> merged;
  for (const auto& [video, list] : frames) merged[video].insert(list.begin(), list.end());
  for (const Record& r : records) merged[r.video_id].insert(r.frame_index);
  std::map<std::string, std::vector<long>> out;
  for (const auto& [video, set] : merged) out[video] = std::vector<long>(set.begin(), set.end());
  return out;
}

}  // namespace

GroundTruthSet parse_ground_truth(std::istream& in) {
  const auto records = read_frame_records(in, /*with_confidence=*/false);
  GroundTruthSet set;
  set.videos = infer_metas(records);
  set.frames = covered_frames(records);
  for (const FrameRecord& rec : records) {
    for (const RawBox& raw : rec.boxes) {
      set.boxes.push_back(GroundTruthBox{rec.video_id, rec.frame_index, raw.tool, raw.box});
    }
  }
  return set;
}

DetectionSet parse_detections(std::istream& in) {
  const auto records = read_frame_records(in, /*with_confidence=*/true);
  DetectionSet set;
  set.videos = infer_metas(records);
  set.frames = covered_frames(records);
  for (const FrameRecord& rec : records) {
    for (const RawBox& raw : rec.boxes) {
      set.detections.push_back(
          Detection{rec.video_id, rec.frame_index, raw.tool, raw.box, *raw.confidence});
    }
  }
  return set;
}

std::vector<PresenceRecord> parse_presence_csv(std::istream& in, std::string_view video_id) {
  long line_no = 0;
  const auto header = next_csv_line(in, line_no);
  if (!header || *header != kPresenceHeader) {
    throw ValidationError("bad_header",
                          std::string("presence CSV must start with '") + kPresenceHeader + "'");
  }
  std::vector<PresenceRecord> records;
  std::set<long> seen;
  while (auto line = next_csv_line(in, line_no)) {
    const auto fields = split_csv_row(*line);
    if (fields.size() != 1 + kToolCount) {
      malformed(line_no, "expected " + std::to_string(1 + kToolCount) + " columns");
    }
    PresenceRecord rec;
    rec.video_id = std::string(video_id);
    rec.frame_index = parse_csv_long(fields[0], line_no);
    if (rec.frame_index < 0) malformed(line_no, "frame_index must be >= 0");
    if (!seen.insert(rec.frame_index).second) {
      throw ValidationError("duplicate_frame", "line " + std::to_string(line_no) + ": frame " +
                                                   std::to_string(rec.frame_index) + " repeated");
    }
    for (int c = 0; c < kToolCount; ++c) {
      const std::string& f = fields[1 + c];
      if (f != "0" && f != "1") {
        throw ValidationError("bad_flag", "line " + std::to_string(line_no) + ", column '" +
                                              std::string(tool_name(tool_from_index(c))) + "': '" +
                                              f + "' is not 0 or 1");
      }
      rec.flags[c] = f == "1" ? 1 : 0;
    }
    records.push_back(std::move(rec));
  }
  std::sort(records.begin(), records.end(),
            [](const PresenceRecord& a, const PresenceRecord& b) {
              return a.frame_index < b.frame_index;
            });
  return records;
}

std::vector<GoalsRating> parse_goals_csv(std::istream& in) {
  long line_no = 0;
  const auto header = next_csv_line(in, line_no);
  bool has_total_column = false;
  if (header && *header == kGoalsHeader) {
    has_total_column = true;
  } else if (!header || *header != kGoalsHeaderNoTotal) {
    throw ValidationError("bad_header",
                          std::string("GOALS CSV must start with '") + kGoalsHeader + "'");
  }
  const std::size_t n_columns = has_total_column ? 7 : 6;

  std::vector<GoalsRating> ratings;
  while (auto line = next_csv_line(in, line_no)) {
    const auto fields = split_csv_row(*line);
    if (fields.size() != n_columns) {
      malformed(line_no, "expected " + std::to_string(n_columns) + " columns");
    }
    GoalsRating r;
    r.video_id = fields[0];
    r.rater_id = fields[1];
    if (r.video_id.empty()) malformed(line_no, "video_id must be non-empty");
    double* scores[4] = {&r.depth_perception, &r.bimanual_dexterity, &r.efficiency,
                         &r.tissue_handling};
    for (int i = 0; i < 4; ++i) {
      const double v = parse_csv_double(fields[2 + i], line_no);
      if (!(v >= 1.0) || !(v <= 5.0)) {
        throw ValidationError("score_out_of_range", "line " + std::to_string(line_no) + ": score " +
                                                        format_double(v) + " outside [1, 5]");
      }
      *scores[i] = snap_to_third(v);
    }
    r.total = r.depth_perception + r.bimanual_dexterity + r.efficiency + r.tissue_handling;
    if (has_total_column && !fields[6].empty()) {
      const double stored = parse_csv_double(fields[6], line_no);
      if (std::abs(stored - r.total) > 0.005 + 1e-12) {
        throw ValidationError("total_mismatch",
                              "line " + std::to_string(line_no) + ": stored total " +
                                  format_double(stored) + " disagrees with component sum " +
                                  format_double(r.total));
      }
    }
    ratings.push_back(std::move(r));
  }
  return ratings;
}

std::vector<VideoMeta> parse_video_meta(std::istream& in) {
  std::vector<VideoMeta> metas;
  std::set<std::string> seen;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    json obj;
    try {
      obj = json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      malformed(line_no, std::string("invalid JSON (") + e.what() + ")");
    }
    if (!obj.is_object()) malformed(line_no, "expected a JSON object");
    VideoMeta m;
    m.video_id = require_string(obj, "video_id", line_no);
    m.width = require_number(obj, "width", line_no);
    m.height = require_number(obj, "height", line_no);
    m.n_frames = require_integer(obj, "n_frames", line_no);
    m.fps = obj.contains("fps") ? require_number(obj, "fps", line_no) : 1.0;
    try {
      validate(m);
    } catch (const ValidationError& e) {
      throw ValidationError(e.code(), "line " + std::to_string(line_no) + ": " + e.message());
    }
    if (!seen.insert(m.video_id).second) {
      throw ValidationError("duplicate_video", "line " + std::to_string(line_no) + ": video '" +
                                                   m.video_id + "' already defined");
    }
    metas.push_back(std::move(m));
  }
  std::sort(metas.begin(), metas.end(),
            [](const VideoMeta& a, const VideoMeta& b) { return a.video_id < b.video_id; });
  return metas;
}

std::map<std::string, std::vector<PhaseWindow>> parse_phases_csv(std::istream& in) {
  long line_no = 0;
  const auto header = next_csv_line(in, line_no);
  if (!header || *header != kPhasesHeader) {
    throw ValidationError("bad_header",
                          std::string("phases CSV must start with '") + kPhasesHeader + "'");
  }
  std::map<std::string, std::vector<PhaseWindow>> phases;
  while (auto line = next_csv_line(in, line_no)) {
    const auto fields = split_csv_row(*line);
    if (fields.size() != 4) malformed(line_no, "expected 4 columns");
    PhaseWindow w;
    w.name = fields[1];
    w.start_frame = parse_csv_long(fields[2], line_no);
    w.end_frame = parse_csv_long(fields[3], line_no);
    if (fields[0].empty() || w.name.empty()) malformed(line_no, "video_id and phase must be non-empty");
    if (w.start_frame < 0 || w.start_frame > w.end_frame) {
      malformed(line_no, "need 0 <= start_frame <= end_frame");
    }
    phases[fields[0]].push_back(std::move(w));
  }
  return phases;
}

std::string serialize_ground_truth(const GroundTruthSet& set) {
  const auto frames = merged_frames(set.frames, set.boxes);
  std::vector<GroundTruthBox> boxes = set.boxes;
  std::stable_sort(boxes.begin(), boxes.end(), [](const GroundTruthBox& a, const GroundTruthBox& b) {
    return std::tie(a.video_id, a.frame_index) < std::tie(b.video_id, b.frame_index);
  });
  std::string out;
  auto box_it = boxes.begin();
  for (const auto& [video_id, frame_list] : frames) {
    const VideoMeta& meta = find_video(set.videos, video_id);
    for (long frame : frame_list) {
      json line = frame_line_json(video_id, frame, meta.width, meta.height);
      while (box_it != boxes.end() && box_it->video_id == video_id &&
             box_it->frame_index == frame) {
        line["boxes"].push_back(box_json(box_it->tool, box_it->box));
        ++box_it;
      }
      out += line.dump();
      out += '\n';
    }
  }
  return out;
}

std::string serialize_detections(const DetectionSet& set) {
  const auto frames = merged_frames(set.frames, set.detections);
  std::vector<Detection> dets = set.detections;
  std::stable_sort(dets.begin(), dets.end(), [](const Detection& a, const Detection& b) {
    return std::tie(a.video_id, a.frame_index) < std::tie(b.video_id, b.frame_index);
  });
  std::string out;
  auto det_it = dets.begin();
  for (const auto& [video_id, frame_list] : frames) {
    const VideoMeta& meta = find_video(set.videos, video_id);
    for (long frame : frame_list) {
      json line = frame_line_json(video_id, frame, meta.width, meta.height);
      while (det_it != dets.end() && det_it->video_id == video_id && det_it->frame_index == frame) {
        json b = box_json(det_it->tool, det_it->box);
        b["confidence"] = det_it->confidence;
        line["boxes"].push_back(std::move(b));
        ++det_it;
      }
      out += line.dump();
      out += '\n';
    }
  }
  return out;
}

std::string serialize_presence_csv(const std::vector<PresenceRecord>& records) {
  std::string out = kPresenceHeader;
  out += '\n';
  for (const PresenceRecord& rec : records) {
    out += std::to_string(rec.frame_index);
    for (int c = 0; c < kToolCount; ++c) {
      out += ',';
      out += rec.flags[c] ? '1' : '0';
    }
    out += '\n';
  }
  return out;
}

std::string serialize_goals_csv(const std::vector<GoalsRating>& ratings) {
  std::string out = kGoalsHeader;
  out += '\n';
  for (const GoalsRating& r : ratings) {
    out += r.video_id + ',' + r.rater_id + ',' + format_double(r.depth_perception) + ',' +
           format_double(r.bimanual_dexterity) + ',' + format_double(r.efficiency) + ',' +
           format_double(r.tissue_handling) + ',' + format_double(r.total) + '\n';
  }
  return out;
}

std::string serialize_video_meta(const std::vector<VideoMeta>& metas) {
  std::string out;
  for (const VideoMeta& m : metas) {
    json obj;
    obj["video_id"] = m.video_id;
    obj["width"] = m.width;
    obj["height"] = m.height;
    obj["n_frames"] = m.n_frames;
    obj["fps"] = m.fps;
    out += obj.dump();
    out += '\n';
  }
  return out;
}

DatasetManifest build_manifest(const std::vector<GroundTruthBox>& gts) {
  DatasetManifest manifest;
  std::set<std::pair<std::string, long>> frames;
  for (const GroundTruthBox& gt : gts) {
    ++manifest.per_class[tool_index(gt.tool)];
    ++manifest.total_instances;
    frames.emplace(gt.video_id, gt.frame_index);
  }
  manifest.n_annotated_frames = static_cast<long>(frames.size());
  return manifest;
}

double snap_to_third(double value) {
  const double third = std::round(value * 3.0) / 3.0;
  return std::abs(third - value) <= 0.005 + 1e-12 ? third : value;
}

const VideoMeta& find_video(const std::vector<VideoMeta>& metas, std::string_view video_id) {
  for (const VideoMeta& m : metas) {
    if (m.video_id == video_id) return m;
  }
  throw ValidationError("unknown_video", "no metadata for video '" + std::string(video_id) + "'");
}

}  // namespace scopemetrics
