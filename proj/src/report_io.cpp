#include "scopemetrics/report_io.hpp"

#include "json.hpp"

namespace scopemetrics {

namespace {

using json = nlohmann::ordered_json;

json meta_to_json(const VideoMeta& meta) {
  json obj;
  obj["video_id"] = meta.video_id;
  obj["width"] = meta.width;
  obj["height"] = meta.height;
  obj["n_frames"] = meta.n_frames;
  obj["fps"] = meta.fps;
  return obj;
}

VideoMeta meta_from_json(const json& obj) {
  VideoMeta meta;
  meta.video_id = obj.at("video_id").get<std::string>();
  meta.width = obj.at("width").get<double>();
  meta.height = obj.at("height").get<double>();
  meta.n_frames = obj.at("n_frames").get<long>();
  meta.fps = obj.at("fps").get<double>();
  validate(meta);
  return meta;
}

json config_to_json(const AnalyticsConfig& cfg) {
  json obj;
  obj["min_confidence"] = cfg.min_confidence;
  obj["smoothing_window"] = cfg.smoothing_window;
  obj["switch_pair_window"] = cfg.switch_pair_window;
  obj["tracking_min_confidence"] = cfg.tracking.min_confidence;
  obj["tracking_max_jump_frac"] = cfg.tracking.max_jump_frac;
  obj["tracking_max_gap"] = cfg.tracking.max_gap;
  obj["heatmap_rows"] = cfg.heatmap_rows;
  obj["heatmap_cols"] = cfg.heatmap_cols;
  return obj;
}

AnalyticsConfig config_from_json(const json& obj) {
  AnalyticsConfig cfg;
  cfg.min_confidence = obj.at("min_confidence").get<double>();
  cfg.smoothing_window = obj.at("smoothing_window").get<int>();
  cfg.switch_pair_window = obj.at("switch_pair_window").get<int>();
  cfg.tracking.min_confidence = obj.at("tracking_min_confidence").get<double>();
  cfg.tracking.max_jump_frac = obj.at("tracking_max_jump_frac").get<double>();
  cfg.tracking.max_gap = obj.at("tracking_max_gap").get<int>();
  cfg.heatmap_rows = obj.at("heatmap_rows").get<int>();
  cfg.heatmap_cols = obj.at("heatmap_cols").get<int>();
  return cfg;
}

json grid_to_json(const Eigen::MatrixXi& grid) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < grid.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < grid.cols(); ++c) row.push_back(grid(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXi grid_from_json(const json& rows, int expect_rows, int expect_cols) {
  if (!rows.is_array() || static_cast<int>(rows.size()) != expect_rows) {
    throw ValidationError("invalid_report", "heat map grid has the wrong shape");
  }
  Eigen::MatrixXi grid(expect_rows, expect_cols);
  for (int r = 0; r < expect_rows; ++r) {
    const json& row = rows[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<int>(row.size()) != expect_cols) {
      throw ValidationError("invalid_report", "heat map grid has the wrong shape");
    }
    for (int c = 0; c < expect_cols; ++c) grid(r, c) = row[static_cast<std::size_t>(c)].get<int>();
  }
  return grid;
}

json motion_to_json(const MotionMetrics& metrics) {
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

MotionMetrics motion_from_json(const json& entry) {
  MotionMetrics metrics;
  metrics.phase.name = entry.at("phase").get<std::string>();
  metrics.phase.start_frame = entry.at("start_frame").get<long>();
  metrics.phase.end_frame = entry.at("end_frame").get<long>();
  const json& per_class = entry.at("per_class");
  for (ToolClass tool : all_tool_classes()) {
    const json& c = per_class.at(std::string(tool_name(tool)));
    ClassMotion& m = metrics.per_class[tool_index(tool)];
    m.path_length_px = c.at("path_length_px").get<double>();
    m.path_length_normalized = c.at("path_length_normalized").get<double>();
    m.n_tracks = c.at("n_tracks").get<int>();
  }
  return metrics;
}

}  // namespace

std::string serialize_report(const SkillReport& report) {
  json doc;
  doc["schema"] = std::string(kReportSchema);
  doc["video_id"] = report.video_id;
  doc["meta"] = meta_to_json(report.meta);
  doc["config"] = config_to_json(report.config);

  json timeline;
  for (ToolClass tool : all_tool_classes()) {
    json intervals = json::array();
    for (const Interval& iv : report.timeline.per_class[tool_index(tool)]) {
      intervals.push_back({iv.start_frame, iv.end_frame});
    }
    timeline[std::string(tool_name(tool))] = std::move(intervals);
  }
  doc["timeline"] = std::move(timeline);

  json usage;
  for (ToolClass tool : all_tool_classes()) {
    usage[std::string(tool_name(tool))] = report.usage.seconds[tool_index(tool)];
  }
  doc["usage_seconds"] = std::move(usage);
  doc["switch_count"] = report.switches;

  json heatmaps;
  heatmaps["rows"] = report.config.heatmap_rows;
  heatmaps["cols"] = report.config.heatmap_cols;
  json per_class;
  for (ToolClass tool : all_tool_classes()) {
    per_class[std::string(tool_name(tool))] = grid_to_json(report.heatmaps[tool_index(tool)].grid);
  }
  heatmaps["per_class"] = std::move(per_class);
  heatmaps["combined"] = grid_to_json(report.combined_heatmap.grid);
  doc["heatmaps"] = std::move(heatmaps);

  json tracks = json::array();
  for (const Track& track : report.tracks) {
    json t;
    t["track_id"] = track.track_id;
    t["tool"] = std::string(tool_name(track.tool));
    json points = json::array();
    for (const TrackPoint& p : track.points) {
      points.push_back({p.frame_index, p.box.x_min, p.box.y_min, p.box.x_max, p.box.y_max});
    }
    t["points"] = std::move(points);
    tracks.push_back(std::move(t));
  }
  doc["tracks"] = std::move(tracks);

  doc["motion"] = json::array();
  for (const MotionMetrics& metrics : report.motion) doc["motion"].push_back(motion_to_json(metrics));

  if (report.goals) {
    json goals;
    goals["n_raters"] = report.goals->n_raters;
    goals["depth_perception"] = report.goals->depth_perception;
    goals["bimanual_dexterity"] = report.goals->bimanual_dexterity;
    goals["efficiency"] = report.goals->efficiency;
    goals["tissue_handling"] = report.goals->tissue_handling;
    goals["total"] = report.goals->total;
    doc["goals"] = std::move(goals);
  } else {
    doc["goals"] = nullptr;
  }
  return doc.dump(2) + "\n";
}

SkillReport parse_report(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("invalid_report", std::string("invalid report JSON (") + e.what() + ")");
  }
  if (!doc.is_object() || doc.value("schema", std::string()) != kReportSchema) {
    throw ValidationError("invalid_report",
                          std::string("expected a report with schema '") +
                              std::string(kReportSchema) + "'");
  }

  try {
    SkillReport report;
    report.video_id = doc.at("video_id").get<std::string>();
    report.meta = meta_from_json(doc.at("meta"));
    report.config = config_from_json(doc.at("config"));

    const json& timeline = doc.at("timeline");
    for (ToolClass tool : all_tool_classes()) {
      for (const json& iv : timeline.at(std::string(tool_name(tool)))) {
        report.timeline.per_class[tool_index(tool)].push_back(
            {iv.at(0).get<long>(), iv.at(1).get<long>()});
      }
    }

    const json& usage = doc.at("usage_seconds");
    for (ToolClass tool : all_tool_classes()) {
      report.usage.seconds[tool_index(tool)] = usage.at(std::string(tool_name(tool))).get<double>();
    }
    report.switches = doc.at("switch_count").get<int>();

    const json& heatmaps = doc.at("heatmaps");
    const int rows = heatmaps.at("rows").get<int>();
    const int cols = heatmaps.at("cols").get<int>();
    for (ToolClass tool : all_tool_classes()) {
      HeatMap& map = report.heatmaps[tool_index(tool)];
      map.grid = grid_from_json(heatmaps.at("per_class").at(std::string(tool_name(tool))), rows, cols);
      map.frame_width = report.meta.width;
      map.frame_height = report.meta.height;
    }
    report.combined_heatmap.grid = grid_from_json(heatmaps.at("combined"), rows, cols);
    report.combined_heatmap.frame_width = report.meta.width;
    report.combined_heatmap.frame_height = report.meta.height;

    for (const json& t : doc.at("tracks")) {
      Track track;
      track.track_id = t.at("track_id").get<int>();
      const std::string name = t.at("tool").get<std::string>();
      const auto tool = tool_from_name(name);
      if (!tool) throw ValidationError("unknown_class", "'" + name + "'");
      track.tool = *tool;
      for (const json& p : t.at("points")) {
        BBox box(p.at(1).get<double>(), p.at(2).get<double>(), p.at(3).get<double>(),
                 p.at(4).get<double>());
        track.points.push_back({p.at(0).get<long>(), centroid(box), box});
      }
      report.tracks.push_back(std::move(track));
    }

    for (const json& entry : doc.at("motion")) report.motion.push_back(motion_from_json(entry));

    if (doc.contains("goals") && !doc.at("goals").is_null()) {
      const json& goals = doc.at("goals");
      GoalsSummary summary;
      summary.n_raters = goals.at("n_raters").get<int>();
      summary.depth_perception = goals.at("depth_perception").get<double>();
      summary.bimanual_dexterity = goals.at("bimanual_dexterity").get<double>();
      summary.efficiency = goals.at("efficiency").get<double>();
      summary.tissue_handling = goals.at("tissue_handling").get<double>();
      summary.total = goals.at("total").get<double>();
      report.goals = summary;
    }
    return report;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("invalid_report", std::string("report is missing data (") + e.what() + ")");
  }
}

}  // namespace scopemetrics
