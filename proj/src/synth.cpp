#include "scopemetrics/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "json.hpp"

namespace scopemetrics::synth {

namespace {

using json = nlohmann::ordered_json;

void validate_script(const ToolScript& script, const ScenarioConfig& cfg) {
  if (script.waypoints.empty()) {
    throw ValidationError("script_out_of_bounds", "script needs at least one waypoint");
  }
  if (script.start_frame < 0 || script.start_frame > script.end_frame ||
      script.end_frame >= cfg.n_frames) {
    throw ValidationError("script_out_of_bounds",
                          "script interval [" + std::to_string(script.start_frame) + ", " +
                              std::to_string(script.end_frame) + "] outside 0.." +
                              std::to_string(cfg.n_frames - 1));
  }
  const long span = script.end_frame - script.start_frame;
  const long segments = static_cast<long>(script.waypoints.size()) - 1;
  if (segments > 0 && (span == 0 || span % segments != 0)) {
    // Waypoints must anchor at integer frames, otherwise the frame-sampled
    // path cuts corners and no longer equals the polyline length.
    throw ValidationError("script_out_of_bounds",
                          "interval length must be a positive multiple of waypoint segments");
  }
  if (!(script.box_width > 0.0) || !(script.box_height > 0.0) ||
      script.box_width > cfg.width || script.box_height > cfg.height) {
    throw ValidationError("script_out_of_bounds", "box size must be positive and fit the frame");
  }
  for (long f = script.start_frame; f <= script.end_frame; ++f) {
    const Point2 c = script_position(script, f);
    if (c.x() - script.box_width / 2.0 < 0.0 || c.x() + script.box_width / 2.0 > cfg.width ||
        c.y() - script.box_height / 2.0 < 0.0 || c.y() + script.box_height / 2.0 > cfg.height) {
      throw ValidationError("script_out_of_bounds",
                            "scripted box leaves the frame at frame " + std::to_string(f));
    }
  }
}

BBox box_at(const ToolScript& script, const Point2& center) {
  return BBox(center.x() - script.box_width / 2.0, center.y() - script.box_height / 2.0,
              center.x() + script.box_width / 2.0, center.y() + script.box_height / 2.0);
}

std::pair<double, double> gaussian_pair(Xorshift64Star& rng) {
  // Box-Muller; 1 - uniform01() keeps the log argument in (0, 1].
  const double u1 = 1.0 - rng.uniform01();
  const double u2 = rng.uniform01();
  const double r = std::sqrt(-2.0 * std::log(u1));
  return {r * std::cos(2.0 * std::numbers::pi * u2), r * std::sin(2.0 * std::numbers::pi * u2)};
}

PresenceMatrix script_presence(const ScenarioConfig& cfg) {
  PresenceMatrix presence = PresenceMatrix::Zero(cfg.n_frames, kToolCount);
  for (const ToolScript& script : cfg.script) {
    for (long f = script.start_frame; f <= script.end_frame; ++f) {
      presence(f, tool_index(script.tool)) = 1;
    }
  }
  return presence;
}

json motion_json(const MotionMetrics& metrics) {
  json entry;
  entry["phase"] = metrics.phase.name;
  entry["start_frame"] = metrics.phase.start_frame;
  entry["end_frame"] = metrics.phase.end_frame;
  json per_class;
  for (ToolClass tool : all_tool_classes()) {
    const ClassMotion& m = metrics.per_class[tool_index(tool)];
    json c;
    c["path_length_px"] = m.path_length_px;
    c["path_length_normalized"] = m.path_length_normalized;
    c["n_tracks"] = m.n_tracks;
    per_class[std::string(tool_name(tool))] = std::move(c);
  }
  entry["per_class"] = std::move(per_class);
  return entry;
}

Point2 parse_point(const json& value, const char* what) {
  if (!value.is_array() || value.size() != 2 || !value[0].is_number() || !value[1].is_number()) {
    throw ValidationError("invalid_config", std::string(what) + " must be a [x, y] pair");
  }
  return Point2(value[0].get<double>(), value[1].get<double>());
}

}  // namespace

Point2 script_position(const ToolScript& script, long frame) {
  const long segments = static_cast<long>(script.waypoints.size()) - 1;
  if (segments <= 0 || script.end_frame == script.start_frame) return script.waypoints.front();
  const long span = script.end_frame - script.start_frame;
  const long frames_per_segment = span / segments;
  const long t = frame - script.start_frame;
  long seg = t / frames_per_segment;
  if (seg >= segments) return script.waypoints.back();
  const double u = static_cast<double>(t - seg * frames_per_segment) /
                   static_cast<double>(frames_per_segment);
  return (1.0 - u) * script.waypoints[static_cast<std::size_t>(seg)] +
         u * script.waypoints[static_cast<std::size_t>(seg) + 1];
}

double oracle_path_length(const ToolScript& script, const PhaseWindow& phase) {
  const long t0 = std::max(script.start_frame, phase.start_frame);
  const long t1 = std::min(script.end_frame, phase.end_frame);
  if (t0 >= t1) return 0.0;

  const long segments = static_cast<long>(script.waypoints.size()) - 1;
  if (segments <= 0) return 0.0;
  const long span = script.end_frame - script.start_frame;
  const double frames_per_segment = static_cast<double>(span) / static_cast<double>(segments);

  double total = 0.0;
  for (long s = 0; s < segments; ++s) {
    const double seg_start = static_cast<double>(script.start_frame) + s * frames_per_segment;
    const double seg_end = seg_start + frames_per_segment;
    const double lo = std::max(seg_start, static_cast<double>(t0));
    const double hi = std::min(seg_end, static_cast<double>(t1));
    if (hi <= lo) continue;
    const double fraction = (hi - lo) / frames_per_segment;
    const double seg_length = (script.waypoints[static_cast<std::size_t>(s) + 1] -
                               script.waypoints[static_cast<std::size_t>(s)])
                                  .norm();
    total += fraction * seg_length;
  }
  return total;
}

std::array<double, kToolCount> oracle_path_length(const std::vector<ToolScript>& script,
                                                  const PhaseWindow& phase) {
  std::array<double, kToolCount> lengths{};
  for (const ToolScript& s : script) {
    lengths[tool_index(s.tool)] += oracle_path_length(s, phase);
  }
  return lengths;
}

Scenario gen_scenario(const ScenarioConfig& cfg) {
  VideoMeta meta{cfg.video_id, cfg.width, cfg.height, cfg.n_frames, cfg.fps};
  validate(meta);
  if (!(cfg.noise.drop_rate >= 0.0 && cfg.noise.drop_rate <= 1.0) ||
      !(cfg.noise.fp_rate_per_frame >= 0.0 && cfg.noise.fp_rate_per_frame <= 1.0) ||
      !(cfg.noise.centroid_jitter_px >= 0.0)) {
    throw ValidationError("invalid_config", "noise rates must lie in [0, 1] and jitter must be >= 0");
  }
  for (const ToolScript& script : cfg.script) validate_script(script, cfg);
  for (const PhaseWindow& phase : cfg.phases) validate(phase, meta);

  Scenario scenario;
  scenario.meta = meta;
  scenario.ground_truth.videos = {meta};
  scenario.detections.videos = {meta};

  const bool noiseless = cfg.noise.centroid_jitter_px == 0.0 && cfg.noise.drop_rate == 0.0 &&
                         cfg.noise.fp_rate_per_frame == 0.0;
  Xorshift64Star rng(cfg.seed);

  for (long f = 0; f < cfg.n_frames; ++f) {
    scenario.ground_truth.frames[cfg.video_id].push_back(f);
    scenario.detections.frames[cfg.video_id].push_back(f);
    for (const ToolScript& script : cfg.script) {
      if (f < script.start_frame || f > script.end_frame) continue;
      const Point2 center = script_position(script, f);
      const BBox gt_box = box_at(script, center);
      scenario.ground_truth.boxes.push_back(
          GroundTruthBox{cfg.video_id, f, script.tool, gt_box});

      if (noiseless) {
        scenario.detections.detections.push_back(
            Detection{cfg.video_id, f, script.tool, gt_box, 1.0});
        continue;
      }
      if (rng.uniform01() < cfg.noise.drop_rate) continue;
      Point2 jittered = center;
      if (cfg.noise.centroid_jitter_px > 0.0) {
        const auto [gx, gy] = gaussian_pair(rng);
        jittered.x() += gx * cfg.noise.centroid_jitter_px;
        jittered.y() += gy * cfg.noise.centroid_jitter_px;
      }
      jittered.x() = std::clamp(jittered.x(), script.box_width / 2.0,
                                cfg.width - script.box_width / 2.0);
      jittered.y() = std::clamp(jittered.y(), script.box_height / 2.0,
                                cfg.height - script.box_height / 2.0);
      const double confidence = rng.uniform(0.6, 1.0);
      scenario.detections.detections.push_back(
          Detection{cfg.video_id, f, script.tool, box_at(script, jittered), confidence});
    }
    if (!noiseless && cfg.noise.fp_rate_per_frame > 0.0 &&
        rng.uniform01() < cfg.noise.fp_rate_per_frame) {
      const ToolClass tool = tool_from_index(static_cast<int>(rng.next() % kToolCount));
      const double bw = rng.uniform(10.0, std::max(11.0, cfg.width / 4.0));
      const double bh = rng.uniform(10.0, std::max(11.0, cfg.height / 4.0));
      const double cx = rng.uniform(bw / 2.0, cfg.width - bw / 2.0);
      const double cy = rng.uniform(bh / 2.0, cfg.height - bh / 2.0);
      const double confidence = rng.uniform(0.1, 0.6);
      scenario.detections.detections.push_back(Detection{
          cfg.video_id, f, tool,
          BBox(cx - bw / 2.0, cy - bh / 2.0, cx + bw / 2.0, cy + bh / 2.0), confidence});
    }
  }

  const PresenceMatrix presence = script_presence(cfg);
  for (int c = 0; c < kToolCount; ++c) {
    scenario.truth.usage_seconds[c] =
        static_cast<double>(presence.col(c).sum()) / cfg.fps;
  }
  scenario.truth.switches = switch_count(presence);

  std::vector<PhaseWindow> windows;
  windows.push_back(PhaseWindow{"full", 0, cfg.n_frames - 1});
  windows.insert(windows.end(), cfg.phases.begin(), cfg.phases.end());
  const double diagonal = frame_diagonal(meta);
  for (const PhaseWindow& window : windows) {
    MotionMetrics metrics;
    metrics.phase = window;
    const auto lengths = oracle_path_length(cfg.script, window);
    for (int c = 0; c < kToolCount; ++c) {
      metrics.per_class[c].path_length_px = lengths[c];
      metrics.per_class[c].path_length_normalized = lengths[c] / diagonal;
    }
    for (const ToolScript& script : cfg.script) {
      if (script.start_frame <= window.end_frame && script.end_frame >= window.start_frame) {
        ++metrics.per_class[tool_index(script.tool)].n_tracks;
      }
    }
    scenario.truth.motion.push_back(std::move(metrics));
  }
  return scenario;
}

ScenarioConfig parse_scenario_config(std::istream& in) {
  json doc;
  try {
    doc = json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("invalid_config", std::string("invalid scenario JSON (") + e.what() + ")");
  }
  if (!doc.is_object()) throw ValidationError("invalid_config", "scenario must be a JSON object");

  ScenarioConfig cfg;
  cfg.seed = doc.value("seed", 0ULL);
  cfg.video_id = doc.value("video_id", std::string("synth"));
  cfg.width = doc.value("width", 640.0);
  cfg.height = doc.value("height", 480.0);
  cfg.fps = doc.value("fps", 1.0);
  if (!doc.contains("n_frames") || !doc["n_frames"].is_number_integer()) {
    throw ValidationError("invalid_config", "scenario needs an integer 'n_frames'");
  }
  cfg.n_frames = doc["n_frames"].get<long>();

  if (doc.contains("noise")) {
    const json& noise = doc["noise"];
    cfg.noise.centroid_jitter_px = noise.value("centroid_jitter_px", 0.0);
    cfg.noise.drop_rate = noise.value("drop_rate", 0.0);
    cfg.noise.fp_rate_per_frame = noise.value("fp_rate_per_frame", 0.0);
  }

  if (doc.contains("script")) {
    if (!doc["script"].is_array()) throw ValidationError("invalid_config", "'script' must be an array");
    for (const json& entry : doc["script"]) {
      ToolScript script;
      const std::string name = entry.value("tool", std::string());
      const auto tool = tool_from_name(name);
      if (!tool) throw ValidationError("unknown_class", "'" + name + "'");
      script.tool = *tool;
      script.start_frame = entry.value("start_frame", 0L);
      script.end_frame = entry.value("end_frame", 0L);
      script.box_width = entry.value("box_width", 0.0);
      script.box_height = entry.value("box_height", 0.0);
      if (!entry.contains("waypoints") || !entry["waypoints"].is_array()) {
        throw ValidationError("invalid_config", "script entry needs a 'waypoints' array");
      }
      for (const json& w : entry["waypoints"]) script.waypoints.push_back(parse_point(w, "waypoint"));
      cfg.script.push_back(std::move(script));
    }
  }

  if (doc.contains("phases")) {
    if (!doc["phases"].is_array()) throw ValidationError("invalid_config", "'phases' must be an array");
    for (const json& entry : doc["phases"]) {
      PhaseWindow phase;
      phase.name = entry.value("name", std::string());
      phase.start_frame = entry.value("start_frame", 0L);
      phase.end_frame = entry.value("end_frame", 0L);
      cfg.phases.push_back(std::move(phase));
    }
  }
  return cfg;
}

std::string serialize_true_metrics(const TrueMetrics& truth, const std::string& video_id) {
  json doc;
  doc["schema"] = "scopemetrics/1";
  doc["video_id"] = video_id;
  json usage;
  for (ToolClass tool : all_tool_classes()) {
    usage[std::string(tool_name(tool))] = truth.usage_seconds[tool_index(tool)];
  }
  doc["usage_seconds"] = std::move(usage);
  doc["switch_count"] = truth.switches;
  doc["motion"] = json::array();
  for (const MotionMetrics& metrics : truth.motion) doc["motion"].push_back(motion_json(metrics));
  return doc.dump(2) + "\n";
}

PerClassAP oracle_spatial_ap(const std::vector<Detection>& dets,
                             const std::vector<GroundTruthBox>& gts, double iou_threshold) {
  PerClassAP result;
  for (ToolClass tool : all_tool_classes()) {
    std::vector<const Detection*> class_dets;
    std::vector<const GroundTruthBox*> class_gts;
    for (const Detection& d : dets) {
      if (d.tool == tool) class_dets.push_back(&d);
    }
    for (const GroundTruthBox& g : gts) {
      if (g.tool == tool) class_gts.push_back(&g);
    }
    if (class_gts.empty()) continue;

    std::stable_sort(class_dets.begin(), class_dets.end(),
                     [](const Detection* a, const Detection* b) {
                       return a->confidence > b->confidence;
                     });

    // One PR point per confidence cut, each matched from scratch.
    const std::size_t n = class_dets.size();
    std::vector<double> recalls(n, 0.0);
    std::vector<double> precisions(n, 0.0);
    for (std::size_t cut = 1; cut <= n; ++cut) {
      std::vector<bool> taken(class_gts.size(), false);
      long tp = 0;
      for (std::size_t i = 0; i < cut; ++i) {
        const Detection* det = class_dets[i];
        double best = 0.0;
        int best_j = -1;
        for (std::size_t j = 0; j < class_gts.size(); ++j) {
          const GroundTruthBox* gt = class_gts[j];
          if (taken[j] || gt->video_id != det->video_id || gt->frame_index != det->frame_index) {
            continue;
          }
          const double overlap = iou(det->box, gt->box);
          if (overlap > best) {
            best = overlap;
            best_j = static_cast<int>(j);
          }
        }
        if (best_j >= 0 && best >= iou_threshold) {
          taken[static_cast<std::size_t>(best_j)] = true;
          ++tp;
        }
      }
      recalls[cut - 1] = static_cast<double>(tp) / static_cast<double>(class_gts.size());
      precisions[cut - 1] = static_cast<double>(tp) / static_cast<double>(cut);
    }

    double ap = 0.0;
    double prev_recall = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      if (recalls[k] <= prev_recall) continue;
      double best_precision = 0.0;
      for (std::size_t j = k; j < n; ++j) best_precision = std::max(best_precision, precisions[j]);
      ap += (recalls[k] - prev_recall) * best_precision;
      prev_recall = recalls[k];
    }
    result[tool_index(tool)] = ap;
  }
  return result;
}

}  // namespace scopemetrics::synth
