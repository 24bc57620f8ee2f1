#include "scopemetrics/cli.hpp"

#include <unistd.h>

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"

#include "scopemetrics/analytics.hpp"
#include "scopemetrics/dataset.hpp"
#include "scopemetrics/eval.hpp"
#include "scopemetrics/format.hpp"
#include "scopemetrics/render.hpp"
#include "scopemetrics/report_io.hpp"
#include "scopemetrics/rpn.hpp"
#include "scopemetrics/synth.hpp"

namespace scopemetrics {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("open_failed", "cannot open '" + path + "' for reading");
  return in;
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("write_failed", "cannot open '" + path.string() + "' for writing");
  out << content;
  if (!out) throw IoError("write_failed", "failed writing '" + path.string() + "'");
}

void ensure_directory(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("mkdir_failed", "cannot create directory '" + dir.string() + "'");
}

// File names derived from user-supplied phase names; keep them portable.
std::string sanitize_name(const std::string& name) {
  std::string out;
  for (char ch : name) {
    const bool ok = (ch >= 'a' && ch <= 'z') || (ch >= 'A' && ch <= 'Z') ||
                    (ch >= '0' && ch <= '9') || ch == '-' || ch == '_';
    out += ok ? ch : '_';
  }
  return out.empty() ? std::string("phase") : out;
}

void check_unit_interval(double value, const std::string& flag) {
  if (!(value >= 0.0) || !(value <= 1.0)) {
    throw ValidationError("flag_out_of_range", flag + " must lie in [0, 1], got " +
                                                   format_double(value));
  }
}

json ap_result_json(const APResult& result) {
  json doc;
  json per_class;
  for (ToolClass tool : all_tool_classes()) {
    const auto& ap = result.per_class[tool_index(tool)];
    if (ap) {
      per_class[std::string(tool_name(tool))] = *ap;
    } else {
      per_class[std::string(tool_name(tool))] = nullptr;
    }
  }
  doc["per_class"] = std::move(per_class);
  doc["mAP"] = result.map;
  return doc;
}

void emit_json(const json& doc, const std::string& out_path) {
  const std::string text = doc.dump(2) + "\n";
  if (out_path.empty()) {
    std::cout << text;
  } else {
    write_file(out_path, text);
  }
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

struct EvaluateSpatialOptions {
  std::string gt_path;
  std::string det_path;
  double iou_threshold = 0.5;
  std::string out_path;
};

int cmd_evaluate_spatial(const EvaluateSpatialOptions& opt) {
  check_unit_interval(opt.iou_threshold, "--iou");
  auto gt_stream = open_input(opt.gt_path);
  const GroundTruthSet gts = parse_ground_truth(gt_stream);
  auto det_stream = open_input(opt.det_path);
  const DetectionSet dets = parse_detections(det_stream);
  const APResult result = evaluate_spatial(dets.detections, gts.boxes, opt.iou_threshold);
  emit_json(ap_result_json(result), opt.out_path);
  return 0;
}

struct EvaluatePresenceOptions {
  std::string labels_path;
  std::string det_path;
  std::string meta_path;
  std::string video_id;
  std::string out_path;
};

int cmd_evaluate_presence(const EvaluatePresenceOptions& opt) {
  auto det_stream = open_input(opt.det_path);
  const DetectionSet dets = parse_detections(det_stream);

  std::string video_id = opt.video_id;
  if (video_id.empty()) {
    if (dets.videos.size() != 1) {
      throw ValidationError("ambiguous_video",
                            "detection file covers " + std::to_string(dets.videos.size()) +
                                " videos; pass --video");
    }
    video_id = dets.videos.front().video_id;
  }

  auto labels_stream = open_input(opt.labels_path);
  const auto labels = parse_presence_csv(labels_stream, video_id);

  VideoMeta meta;
  if (!opt.meta_path.empty()) {
    auto meta_stream = open_input(opt.meta_path);
    meta = find_video(parse_video_meta(meta_stream), video_id);
  } else {
    // Without metadata the label rows define the frame range.
    meta = find_video(dets.videos, video_id);
    for (const PresenceRecord& rec : labels) {
      meta.n_frames = std::max(meta.n_frames, rec.frame_index + 1);
    }
  }

  std::vector<Detection> video_dets;
  for (const Detection& det : dets.detections) {
    if (det.video_id == video_id) video_dets.push_back(det);
  }
  const PresenceScores scores = to_presence(video_dets, meta);
  const APResult result = presence_ap(scores, labels);
  emit_json(ap_result_json(result), opt.out_path);
  return 0;
}

struct AnalyzeOptions {
  std::string det_path;
  std::string meta_path;
  std::string phases_path;
  std::string goals_path;
  std::string out_dir;
  AnalyticsConfig config;
  int jobs = 0;
  bool stamp = false;
};

void write_video_outputs(const SkillReport& report, const fs::path& video_dir, bool stamp) {
  ensure_directory(video_dir);

  std::string report_text = serialize_report(report);
  if (stamp) {
    json doc = json::parse(report_text);
    doc["generated_at"] = utc_timestamp();
    report_text = doc.dump(2) + "\n";
  }
  write_file(video_dir / "report.json", report_text);
  write_file(video_dir / "timeline.svg", render_timeline(report.timeline, report.meta));
  for (ToolClass tool : all_tool_classes()) {
    write_file(video_dir / ("heatmap_" + std::string(tool_name(tool)) + ".pgm"),
               render_heatmap(report.heatmaps[tool_index(tool)]));
  }
  write_file(video_dir / "heatmap_combined.pgm", render_heatmap(report.combined_heatmap));
  for (const MotionMetrics& metrics : report.motion) {
    write_file(video_dir / ("trajectory_" + sanitize_name(metrics.phase.name) + ".svg"),
               render_trajectories(report.tracks, metrics.phase, report.meta));
  }
}

int cmd_analyze(const AnalyzeOptions& opt) {
  check_unit_interval(opt.config.min_confidence, "--confidence");
  auto det_stream = open_input(opt.det_path);
  const DetectionSet dets = parse_detections(det_stream);
  auto meta_stream = open_input(opt.meta_path);
  const std::vector<VideoMeta> metas = parse_video_meta(meta_stream);

  std::map<std::string, std::vector<PhaseWindow>> phases;
  if (!opt.phases_path.empty()) {
    auto phases_stream = open_input(opt.phases_path);
    phases = parse_phases_csv(phases_stream);
  }
  std::vector<GoalsRating> ratings;
  if (!opt.goals_path.empty()) {
    auto goals_stream = open_input(opt.goals_path);
    ratings = parse_goals_csv(goals_stream);
  }

  for (const VideoMeta& meta : dets.videos) {
    find_video(metas, meta.video_id);  // every detected video needs metadata
  }

  ensure_directory(opt.out_dir);

  std::map<std::string, std::vector<Detection>> dets_by_video;
  for (const VideoMeta& meta : metas) dets_by_video[meta.video_id];
  for (const Detection& det : dets.detections) dets_by_video[det.video_id].push_back(det);

  const int workers = opt.jobs > 0
                          ? opt.jobs
                          : std::max(1, static_cast<int>(std::thread::hardware_concurrency()));

  std::vector<SkillReport> reports(metas.size());
  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr first_error;

  auto worker = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= metas.size()) return;
      try {
        const VideoMeta& meta = metas[i];
        reports[i] = build_report(dets_by_video.at(meta.video_id), meta,
                                  phases.count(meta.video_id) ? phases.at(meta.video_id)
                                                              : std::vector<PhaseWindow>{},
                                  ratings, opt.config);
        write_video_outputs(reports[i], fs::path(opt.out_dir) / meta.video_id, opt.stamp);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };

  std::vector<std::thread> pool;
  const int n_workers = static_cast<int>(std::min<std::size_t>(
      static_cast<std::size_t>(workers), std::max<std::size_t>(metas.size(), 1)));
  for (int w = 0; w < n_workers; ++w) pool.emplace_back(worker);
  for (std::thread& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);

  // Cross-video rank correlation against GOALS, when enough videos carry both.
  if (!ratings.empty() && metas.size() >= 3) {
    std::map<std::string, double> path_metric;
    std::map<std::string, double> usage_metric;
    std::map<std::string, double> switch_metric;
    for (const SkillReport& report : reports) {
      double path = 0.0;
      for (const ClassMotion& m : report.motion.front().per_class) path += m.path_length_px;
      path_metric[report.video_id] = path;
      double usage = 0.0;
      for (double s : report.usage.seconds) usage += s;
      usage_metric[report.video_id] = usage;
      switch_metric[report.video_id] = report.switches;
    }
    json correlation;
    correlation["schema"] = std::string(kReportSchema);
    auto add = [&](const char* name, const std::map<std::string, double>& metric) {
      try {
        const SpearmanResult r = goals_correlation(metric, ratings);
        json entry;
        entry["spearman_rho"] = r.rho;
        entry["n"] = r.n;
        correlation[name] = std::move(entry);
      } catch (const Error&) {
        correlation[name] = nullptr;  // fewer than 3 joined videos or constant metric
      }
    };
    add("total_path_length_px", path_metric);
    add("total_usage_seconds", usage_metric);
    add("switch_count", switch_metric);
    write_file(fs::path(opt.out_dir) / "correlation.json", correlation.dump(2) + "\n");
  }
  return 0;
}

struct AnchorsOptions {
  std::string gt_path;
  std::string pred_path;
  std::string out_path;
  AnchorConfig config;
  double lambda = 10.0;
};

struct FramePredictions {
  Eigen::ArrayXd objectness;
  DeltaMatrix deltas;
};

std::map<std::pair<std::string, long>, FramePredictions> parse_predictions(std::istream& in) {
  std::map<std::pair<std::string, long>, FramePredictions> preds;
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
      throw ValidationError("malformed_line",
                            "line " + std::to_string(line_no) + ": invalid JSON (" + e.what() + ")");
    }
    FramePredictions pred;
    const json& p = obj.at("objectness");
    const json& d = obj.at("deltas");
    if (!p.is_array() || !d.is_array() || p.size() != d.size()) {
      throw ValidationError("length_mismatch",
                            "line " + std::to_string(line_no) +
                                ": objectness and deltas must be arrays of equal length");
    }
    pred.objectness.resize(static_cast<Eigen::Index>(p.size()));
    pred.deltas.resize(static_cast<Eigen::Index>(d.size()), 4);
    for (std::size_t i = 0; i < p.size(); ++i) {
      pred.objectness[static_cast<Eigen::Index>(i)] = p[i].get<double>();
      const json& row = d[i];
      if (!row.is_array() || row.size() != 4) {
        throw ValidationError("malformed_line",
                              "line " + std::to_string(line_no) + ": each delta needs 4 numbers");
      }
      for (int c = 0; c < 4; ++c) pred.deltas(static_cast<Eigen::Index>(i), c) = row[static_cast<std::size_t>(c)].get<double>();
    }
    preds[{obj.at("video_id").get<std::string>(), obj.at("frame_index").get<long>()}] =
        std::move(pred);
  }
  return preds;
}

int cmd_anchors(const AnchorsOptions& opt) {
  validate(opt.config);
  auto gt_stream = open_input(opt.gt_path);
  const GroundTruthSet gts = parse_ground_truth(gt_stream);

  std::map<std::pair<std::string, long>, FramePredictions> preds;
  if (!opt.pred_path.empty()) {
    auto pred_stream = open_input(opt.pred_path);
    preds = parse_predictions(pred_stream);
  }

  json doc;
  doc["schema"] = std::string(kReportSchema);
  json config;
  config["stride"] = opt.config.stride;
  config["scales"] = opt.config.scales;
  config["aspect_ratios"] = opt.config.aspect_ratios;
  config["pos_iou"] = opt.config.pos_iou;
  config["neg_iou"] = opt.config.neg_iou;
  config["lambda"] = opt.lambda;
  doc["config"] = std::move(config);
  doc["frames"] = json::array();

  long total_positive = 0;
  long total_negative = 0;
  long total_ignore = 0;
  double loss_sum = 0.0;
  long n_frames = 0;

  for (const auto& [video_id, frame_list] : gts.frames) {
    const VideoMeta& meta = find_video(gts.videos, video_id);
    const std::vector<BBox> anchors = generate_anchors(meta, opt.config);
    const long grid_positions = anchor_grid_positions(meta, opt.config);
    const auto n = static_cast<Eigen::Index>(anchors.size());

    for (long frame : frame_list) {
      std::vector<BBox> frame_gts;
      for (const GroundTruthBox& gt : gts.boxes) {
        if (gt.video_id == video_id && gt.frame_index == frame) frame_gts.push_back(gt.box);
      }
      const auto labels = assign_labels(anchors, frame_gts, opt.config);

      long n_pos = 0;
      long n_neg = 0;
      for (const AnchorLabel& label : labels) {
        if (label.value == AnchorLabelValue::kPositive) ++n_pos;
        if (label.value == AnchorLabelValue::kNegative) ++n_neg;
      }
      const long n_ign = static_cast<long>(labels.size()) - n_pos - n_neg;

      const DeltaMatrix target = target_deltas_for(anchors, labels, frame_gts);
      Eigen::ArrayXd objectness(n);
      DeltaMatrix predicted;
      auto pred_it = preds.find({video_id, frame});
      if (pred_it != preds.end()) {
        if (pred_it->second.objectness.size() != n) {
          throw ValidationError("length_mismatch",
                                "predictions for frame " + std::to_string(frame) + " carry " +
                                    std::to_string(pred_it->second.objectness.size()) +
                                    " anchors, expected " + std::to_string(n));
        }
        objectness = pred_it->second.objectness;
        predicted = pred_it->second.deltas;
      } else {
        // Synthetic stand-in: ideal predictions, i.e. the loss floor.
        for (Eigen::Index i = 0; i < n; ++i) {
          switch (labels[static_cast<std::size_t>(i)].value) {
            case AnchorLabelValue::kPositive: objectness[i] = 1.0; break;
            case AnchorLabelValue::kNegative: objectness[i] = 0.0; break;
            case AnchorLabelValue::kIgnore: objectness[i] = 0.5; break;
          }
        }
        predicted = target;
      }

      const RpnBatch batch =
          make_batch(anchors, labels, objectness, predicted, target, opt.lambda, 0.0,
                     static_cast<double>(grid_positions));
      const LossBreakdown loss = rpn_loss(batch);

      json frame_json;
      frame_json["video_id"] = video_id;
      frame_json["frame_index"] = frame;
      frame_json["n_anchors"] = static_cast<long>(anchors.size());
      frame_json["n_positive"] = n_pos;
      frame_json["n_negative"] = n_neg;
      frame_json["n_ignore"] = n_ign;
      frame_json["n_clamped"] = batch.n_clamped;
      json loss_json;
      loss_json["cls_term"] = loss.cls_term;
      loss_json["reg_term"] = loss.reg_term;
      loss_json["total"] = loss.total;
      frame_json["loss"] = std::move(loss_json);
      doc["frames"].push_back(std::move(frame_json));

      total_positive += n_pos;
      total_negative += n_neg;
      total_ignore += n_ign;
      loss_sum += loss.total;
      ++n_frames;
    }
  }

  json summary;
  summary["n_frames"] = n_frames;
  summary["total_positive"] = total_positive;
  summary["total_negative"] = total_negative;
  summary["total_ignore"] = total_ignore;
  summary["mean_total_loss"] = n_frames > 0 ? loss_sum / static_cast<double>(n_frames) : 0.0;
  doc["summary"] = std::move(summary);

  emit_json(doc, opt.out_path);
  return 0;
}

struct SynthOptions {
  std::string config_path;
  std::string out_dir;
};

int cmd_synth(const SynthOptions& opt) {
  auto config_stream = open_input(opt.config_path);
  const synth::ScenarioConfig cfg = synth::parse_scenario_config(config_stream);
  const synth::Scenario scenario = synth::gen_scenario(cfg);

  ensure_directory(opt.out_dir);
  const fs::path dir(opt.out_dir);
  write_file(dir / "gt.jsonl", serialize_ground_truth(scenario.ground_truth));
  write_file(dir / "det.jsonl", serialize_detections(scenario.detections));
  write_file(dir / "truth.json", synth::serialize_true_metrics(scenario.truth, cfg.video_id));
  write_file(dir / "meta.jsonl", serialize_video_meta({scenario.meta}));
  if (!cfg.phases.empty()) {
    std::string csv = "video_id,phase,start_frame,end_frame\n";
    for (const PhaseWindow& phase : cfg.phases) {
      csv += cfg.video_id + "," + phase.name + "," + std::to_string(phase.start_frame) + "," +
             std::to_string(phase.end_frame) + "\n";
    }
    write_file(dir / "phases.csv", csv);
  }
  return 0;
}

struct ReportOptions {
  std::string in_path;
  std::string out_dir;
};

int cmd_report(const ReportOptions& opt) {
  auto in = open_input(opt.in_path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  const SkillReport report = parse_report(buffer.str());
  write_video_outputs(report, fs::path(opt.out_dir), /*stamp=*/false);
  return 0;
}

bool use_color() {
  const char* no_color = std::getenv("NO_COLOR");
  return (no_color == nullptr || no_color[0] == '\0') && isatty(2) != 0;
}

void print_error(const std::string& kind, const std::string& code, const std::string& message) {
  if (use_color()) {
    std::cerr << "\033[31mERROR\033[0m ";
  } else {
    std::cerr << "ERROR ";
  }
  std::cerr << kind << " " << code << ": " << message << "\n";
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
  CLI::App app{"Surgical tool detection evaluation and skill analytics"};
  app.require_subcommand(1);

  EvaluateSpatialOptions spatial;
  CLI::App* evaluate_spatial_cmd =
      app.add_subcommand("evaluate-spatial", "Spatial detection AP against ground-truth boxes");
  evaluate_spatial_cmd->add_option("--gt", spatial.gt_path, "Ground-truth JSONL")->required();
  evaluate_spatial_cmd->add_option("--det", spatial.det_path, "Detections JSONL")->required();
  evaluate_spatial_cmd->add_option("--iou", spatial.iou_threshold, "IoU threshold (default 0.5)");
  evaluate_spatial_cmd->add_option("--out", spatial.out_path, "Write JSON here instead of stdout");

  EvaluatePresenceOptions presence;
  CLI::App* evaluate_presence_cmd =
      app.add_subcommand("evaluate-presence", "Frame-level presence AP from spatial detections");
  evaluate_presence_cmd->add_option("--labels", presence.labels_path, "Presence CSV")->required();
  evaluate_presence_cmd->add_option("--det", presence.det_path, "Detections JSONL")->required();
  evaluate_presence_cmd->add_option("--meta", presence.meta_path, "Video metadata JSONL");
  evaluate_presence_cmd->add_option("--video", presence.video_id, "Video the labels describe");
  evaluate_presence_cmd->add_option("--out", presence.out_path, "Write JSON here instead of stdout");

  AnalyzeOptions analyze;
  CLI::App* analyze_cmd = app.add_subcommand("analyze", "Per-video skill reports and plots");
  analyze_cmd->add_option("--det", analyze.det_path, "Detections JSONL")->required();
  analyze_cmd->add_option("--meta", analyze.meta_path, "Video metadata JSONL")->required();
  analyze_cmd->add_option("--phases", analyze.phases_path, "Phase windows CSV");
  analyze_cmd->add_option("--goals", analyze.goals_path, "GOALS ratings CSV");
  analyze_cmd->add_option("--out", analyze.out_dir, "Output directory")->required();
  analyze_cmd->add_option("--confidence", analyze.config.min_confidence,
                          "Presence/heat-map confidence gate (default 0.5)");
  analyze_cmd->add_option("--smooth-window", analyze.config.smoothing_window,
                          "Presence smoothing window, odd (default 3)");
  analyze_cmd->add_option("--switch-window", analyze.config.switch_pair_window,
                          "Frames pairing an appearance with a disappearance (default 2)");
  analyze_cmd->add_option("--max-jump", analyze.config.tracking.max_jump_frac,
                          "Track association gate, fraction of frame diagonal (default 0.15)");
  analyze_cmd->add_option("--max-gap", analyze.config.tracking.max_gap,
                          "Max frame gap inside a track (default 3)");
  analyze_cmd->add_option("--grid-rows", analyze.config.heatmap_rows, "Heat map rows (default 32)");
  analyze_cmd->add_option("--grid-cols", analyze.config.heatmap_cols, "Heat map cols (default 32)");
  analyze_cmd->add_option("--jobs", analyze.jobs, "Worker threads (default: logical cores)");
  analyze_cmd->add_flag("--stamp", analyze.stamp, "Embed a generation timestamp in report.json");

  AnchorsOptions anchors;
  CLI::App* anchors_cmd =
      app.add_subcommand("anchors", "Anchor label statistics and loss for ground truth");
  anchors_cmd->add_option("--gt", anchors.gt_path, "Ground-truth JSONL")->required();
  anchors_cmd->add_option("--pred", anchors.pred_path, "Predictions JSONL (default: ideal)");
  anchors_cmd->add_option("--stride", anchors.config.stride, "Anchor stride (default 16)");
  anchors_cmd->add_option("--scales", anchors.config.scales, "Anchor side lengths")
      ->delimiter(',');
  anchors_cmd->add_option("--ratios", anchors.config.aspect_ratios, "Anchor aspect ratios")
      ->delimiter(',');
  anchors_cmd->add_option("--pos-iou", anchors.config.pos_iou, "Positive threshold (default 0.8)");
  anchors_cmd->add_option("--neg-iou", anchors.config.neg_iou, "Negative threshold (default 0.3)");
  anchors_cmd->add_option("--lambda", anchors.lambda, "Regression weight (default 10)");
  anchors_cmd->add_option("--out", anchors.out_path, "Write JSON here instead of stdout");

  SynthOptions synth_opt;
  CLI::App* synth_cmd = app.add_subcommand("synth", "Generate a synthetic scenario");
  synth_cmd->add_option("--config", synth_opt.config_path, "Scenario JSON")->required();
  synth_cmd->add_option("--out", synth_opt.out_dir, "Output directory")->required();

  ReportOptions report;
  CLI::App* report_cmd = app.add_subcommand("report", "Re-render plots from a report.json");
  report_cmd->add_option("--in", report.in_path, "report.json path")->required();
  report_cmd->add_option("--out", report.out_dir, "Output directory")->required();

  try {
    std::vector<const char*> argv;
    argv.push_back("scopemetrics");
    for (const std::string& arg : args) argv.push_back(arg.c_str());
    app.parse(static_cast<int>(argv.size()), argv.data());

    if (evaluate_spatial_cmd->parsed()) return cmd_evaluate_spatial(spatial);
    if (evaluate_presence_cmd->parsed()) return cmd_evaluate_presence(presence);
    if (analyze_cmd->parsed()) return cmd_analyze(analyze);
    if (anchors_cmd->parsed()) return cmd_anchors(anchors);
    if (synth_cmd->parsed()) return cmd_synth(synth_opt);
    if (report_cmd->parsed()) return cmd_report(report);
    return 1;
  } catch (const CLI::CallForHelp&) {
    std::cout << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    print_error("validation", "bad_arguments", e.what());
    return 1;
  } catch (const Error& e) {
    print_error(e.kind(), e.code(), e.message());
    return e.kind() == "io" ? 2 : 1;
  } catch (const std::exception& e) {
    print_error("internal", "unexpected", e.what());
    return 1;
  }
}

}  // namespace scopemetrics
