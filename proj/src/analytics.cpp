#include "scopemetrics/analytics.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <set>
#include <tuple>

namespace scopemetrics {

namespace {

// 1-based average ranks; exact equality defines a tie group (inputs here are
// either small integers or rater averages that tie exactly or not at all).
std::vector<double> average_ranks(const std::vector<double>& values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&values](std::size_t a, std::size_t b) { return values[a] < values[b]; });

  std::vector<double> ranks(n, 0.0);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    const double rank = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
    i = j + 1;
  }
  return ranks;
}

bool has_ties(const std::vector<double>& values) {
  std::vector<double> sorted = values;
  std::sort(sorted.begin(), sorted.end());
  return std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end();
}

double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  const auto n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) {
    throw ValidationError("constant_input", "rank correlation is undefined for constant inputs");
  }
  return sxy / std::sqrt(sxx) / std::sqrt(syy);
}

}  // namespace

PresenceMatrix presence_from_detections(const std::vector<Detection>& dets, const VideoMeta& meta,
                                        double min_confidence) {
  validate(meta);
  PresenceMatrix presence = PresenceMatrix::Zero(meta.n_frames, kToolCount);
  for (const Detection& det : dets) {
    validate(det, meta);
    if (det.confidence < min_confidence) continue;
    presence(det.frame_index, tool_index(det.tool)) = 1;
  }
  return presence;
}

PresenceMatrix presence_from_records(const std::vector<PresenceRecord>& records,
                                     const VideoMeta& meta) {
  validate(meta);
  PresenceMatrix presence = PresenceMatrix::Zero(meta.n_frames, kToolCount);
  for (const PresenceRecord& rec : records) {
    if (rec.frame_index < 0 || rec.frame_index >= meta.n_frames) {
      throw ValidationError("frame_out_of_range",
                            "presence record frame " + std::to_string(rec.frame_index) +
                                " outside video '" + meta.video_id + "'");
    }
    for (int c = 0; c < kToolCount; ++c) presence(rec.frame_index, c) = rec.flags[c];
  }
  return presence;
}

PresenceMatrix smooth_presence(const PresenceMatrix& presence, int window) {
  if (window < 1 || window % 2 == 0) {
    throw ValidationError("even_window", "smoothing window must be odd and >= 1");
  }
  if (window == 1) return presence;

  const long n = presence.rows();
  const long half = window / 2;
  PresenceMatrix out(n, kToolCount);
  for (int c = 0; c < kToolCount; ++c) {
    // prefix[i] = number of 1s in rows [0, i)
    std::vector<long> prefix(static_cast<std::size_t>(n) + 1, 0);
    for (long t = 0; t < n; ++t) prefix[static_cast<std::size_t>(t) + 1] = prefix[static_cast<std::size_t>(t)] + presence(t, c);
    for (long t = 0; t < n; ++t) {
      const long lo = std::max(0L, t - half);
      const long hi = std::min(n - 1, t + half);
      const long ones = prefix[static_cast<std::size_t>(hi) + 1] - prefix[static_cast<std::size_t>(lo)];
      const long len = hi - lo + 1;
      if (2 * ones > len) {
        out(t, c) = 1;
      } else if (2 * ones < len) {
        out(t, c) = 0;
      } else {
        out(t, c) = presence(t, c);
      }
    }
  }
  return out;
}

Timeline build_timeline(const PresenceMatrix& presence, const VideoMeta& meta) {
  validate(meta);
  if (presence.rows() != meta.n_frames) {
    throw ValidationError("length_mismatch",
                          "presence has " + std::to_string(presence.rows()) + " rows, video '" +
                              meta.video_id + "' has " + std::to_string(meta.n_frames) +
                              " frames");
  }
  Timeline timeline;
  for (int c = 0; c < kToolCount; ++c) {
    long run_start = -1;
    for (long t = 0; t < presence.rows(); ++t) {
      const bool on = presence(t, c) != 0;
      if (on && run_start < 0) run_start = t;
      if (!on && run_start >= 0) {
        timeline.per_class[c].push_back({run_start, t - 1});
        run_start = -1;
      }
    }
    if (run_start >= 0) timeline.per_class[c].push_back({run_start, presence.rows() - 1});
  }
  return timeline;
}

UsageTotals usage_totals(const Timeline& timeline, const VideoMeta& meta) {
  validate(meta);
  UsageTotals totals;
  for (int c = 0; c < kToolCount; ++c) {
    long frames = 0;
    for (const Interval& iv : timeline.per_class[c]) frames += iv.end_frame - iv.start_frame + 1;
    totals.seconds[c] = static_cast<double>(frames) / meta.fps;
  }
  return totals;
}

int switch_count(const PresenceMatrix& presence, bool smooth_first, int pair_window,
                 int smoothing_window) {
  if (pair_window < 0) throw ValidationError("invalid_config", "pair_window must be >= 0");
  const PresenceMatrix smoothed =
      smooth_first ? smooth_presence(presence, smoothing_window) : PresenceMatrix();
  const PresenceMatrix& p = smooth_first ? smoothed : presence;

  const long n = p.rows();
  std::vector<unsigned> appears(static_cast<std::size_t>(std::max(n, 0L)), 0);
  std::vector<unsigned> disappears(static_cast<std::size_t>(std::max(n, 0L)), 0);
  for (long t = 1; t < n; ++t) {
    for (int c = 0; c < kToolCount; ++c) {
      if (p(t - 1, c) == 0 && p(t, c) == 1) appears[static_cast<std::size_t>(t)] |= 1u << c;
      if (p(t - 1, c) == 1 && p(t, c) == 0) disappears[static_cast<std::size_t>(t)] |= 1u << c;
    }
  }

  // An exchange needs a different class to vanish near the appearance; a
  // class pairing with its own dropout is flicker, not a switch.
  int count = 0;
  for (long t = 1; t < n; ++t) {
    const unsigned appearing = appears[static_cast<std::size_t>(t)];
    if (appearing == 0) continue;
    const long lo = std::max(1L, t - pair_window);
    const long hi = std::min(n - 1, t + pair_window);
    unsigned vanishing = 0;
    for (long s = lo; s <= hi; ++s) vanishing |= disappears[static_cast<std::size_t>(s)];
    if (std::popcount(vanishing) >= 2 || (vanishing != 0 && (appearing & ~vanishing) != 0)) {
      ++count;
    }
  }
  return count;
}

HeatMap build_heatmap(const std::vector<BBox>& boxes, const VideoMeta& meta, int rows, int cols) {
  validate(meta);
  if (rows < 1 || cols < 1) {
    throw ValidationError("bad_grid", "heat map grid must be at least 1x1");
  }
  HeatMap map;
  map.frame_width = meta.width;
  map.frame_height = meta.height;
  map.grid = Eigen::MatrixXi::Zero(rows, cols);

  const Eigen::ArrayXd row_centers =
      (Eigen::ArrayXd::LinSpaced(rows, 0.0, static_cast<double>(rows - 1)) + 0.5) *
      (meta.height / rows);
  const Eigen::ArrayXd col_centers =
      (Eigen::ArrayXd::LinSpaced(cols, 0.0, static_cast<double>(cols - 1)) + 0.5) *
      (meta.width / cols);

  for (const BBox& box : boxes) {
    if (box.x_max > meta.width || box.y_max > meta.height) {
      throw ValidationError("box_out_of_bounds", "heat map box exceeds the frame of video '" +
                                                     meta.video_id + "'");
    }
    const Eigen::VectorXi in_rows =
        ((row_centers >= box.y_min) && (row_centers < box.y_max)).cast<int>().matrix();
    const Eigen::VectorXi in_cols =
        ((col_centers >= box.x_min) && (col_centers < box.x_max)).cast<int>().matrix();
    map.grid += in_rows * in_cols.transpose();
  }
  return map;
}

void validate(const TrackingConfig& cfg) {
  if (!(cfg.min_confidence >= 0.0) || !(cfg.min_confidence <= 1.0)) {
    throw ValidationError("invalid_config", "tracking min_confidence must be in [0, 1]");
  }
  if (!(cfg.max_jump_frac > 0.0)) {
    throw ValidationError("invalid_config", "tracking max_jump_frac must be > 0");
  }
  if (cfg.max_gap < 1) throw ValidationError("invalid_config", "tracking max_gap must be >= 1");
}

std::vector<Track> build_tracks(const std::vector<Detection>& dets, const VideoMeta& meta,
                                const TrackingConfig& cfg) {
  validate(cfg);
  const double max_jump = cfg.max_jump_frac * frame_diagonal(meta);

  std::vector<const Detection*> kept;
  for (const Detection& det : dets) {
    validate(det, meta);
    if (det.confidence >= cfg.min_confidence) kept.push_back(&det);
  }
  std::sort(kept.begin(), kept.end(), [](const Detection* a, const Detection* b) {
    return std::tie(a->frame_index, a->tool, a->box.x_min, a->box.y_min, a->box.x_max,
                    a->box.y_max, a->confidence) <
           std::tie(b->frame_index, b->tool, b->box.x_min, b->box.y_min, b->box.x_max,
                    b->box.y_max, b->confidence);
  });

  std::vector<Track> tracks;
  std::array<std::vector<std::size_t>, kToolCount> open_by_class;

  std::size_t i = 0;
  while (i < kept.size()) {
    const long frame = kept[i]->frame_index;
    std::size_t frame_end = i;
    while (frame_end < kept.size() && kept[frame_end]->frame_index == frame) ++frame_end;

    for (int c = 0; c < kToolCount; ++c) {
      std::vector<const Detection*> frame_dets;
      for (std::size_t k = i; k < frame_end; ++k) {
        if (tool_index(kept[k]->tool) == c) frame_dets.push_back(kept[k]);
      }
      if (frame_dets.empty()) continue;

      auto& open = open_by_class[c];
      open.erase(std::remove_if(open.begin(), open.end(),
                                [&](std::size_t t) {
                                  return frame - tracks[t].points.back().frame_index > cfg.max_gap;
                                }),
                 open.end());

      struct Candidate {
        double distance;
        std::size_t det;  // index into frame_dets (already x_min ordered)
        std::size_t track;
      };
      std::vector<Candidate> candidates;
      for (std::size_t d = 0; d < frame_dets.size(); ++d) {
        const Point2 center = centroid(frame_dets[d]->box);
        for (std::size_t t : open) {
          const double dist = (center - tracks[t].points.back().center).norm();
          if (dist <= max_jump) candidates.push_back({dist, d, t});
        }
      }
      std::sort(candidates.begin(), candidates.end(), [&](const Candidate& a, const Candidate& b) {
        return std::tie(a.distance, a.det, tracks[a.track].track_id) <
               std::tie(b.distance, b.det, tracks[b.track].track_id);
      });

      std::vector<bool> det_used(frame_dets.size(), false);
      std::set<std::size_t> track_used;
      for (const Candidate& cand : candidates) {
        if (det_used[cand.det] || track_used.count(cand.track)) continue;
        det_used[cand.det] = true;
        track_used.insert(cand.track);
        tracks[cand.track].points.push_back(
            {frame, centroid(frame_dets[cand.det]->box), frame_dets[cand.det]->box});
      }
      for (std::size_t d = 0; d < frame_dets.size(); ++d) {
        if (det_used[d]) continue;
        Track track;
        track.tool = tool_from_index(c);
        track.track_id = static_cast<int>(tracks.size());
        track.points.push_back({frame, centroid(frame_dets[d]->box), frame_dets[d]->box});
        tracks.push_back(std::move(track));
        open.push_back(tracks.size() - 1);
      }
    }
    i = frame_end;
  }
  return tracks;
}

MotionMetrics path_length(const std::vector<Track>& tracks, const PhaseWindow& phase,
                          const VideoMeta& meta) {
  validate(phase, meta);
  const double diagonal = frame_diagonal(meta);

  MotionMetrics metrics;
  metrics.phase = phase;
  for (const Track& track : tracks) {
    ClassMotion& motion = metrics.per_class[tool_index(track.tool)];
    bool in_window = false;
    for (std::size_t k = 0; k < track.points.size(); ++k) {
      const TrackPoint& point = track.points[k];
      if (point.frame_index < phase.start_frame || point.frame_index > phase.end_frame) continue;
      in_window = true;
      if (k > 0) {
        const TrackPoint& prev = track.points[k - 1];
        if (prev.frame_index >= phase.start_frame) {
          motion.path_length_px += (point.center - prev.center).norm();
        }
      }
    }
    if (in_window) ++motion.n_tracks;
  }
  for (ClassMotion& motion : metrics.per_class) {
    motion.path_length_normalized = motion.path_length_px / diagonal;
  }
  return metrics;
}

SpearmanResult spearman(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) {
    throw ValidationError("length_mismatch", "correlation inputs must align");
  }
  const auto n = static_cast<long>(x.size());
  if (n < 3) {
    throw ValidationError("insufficient_videos",
                          "need at least 3 paired values, got " + std::to_string(n));
  }
  const std::vector<double> rx = average_ranks(x);
  const std::vector<double> ry = average_ranks(y);

  SpearmanResult result;
  result.n = static_cast<int>(n);
  if (!has_ties(x) && !has_ties(y)) {
    // Integer ranks on both sides: the d^2 formula is exact.
    double d2 = 0.0;
    for (std::size_t i = 0; i < rx.size(); ++i) d2 += (rx[i] - ry[i]) * (rx[i] - ry[i]);
    const double dn = static_cast<double>(n);
    result.rho = 1.0 - 6.0 * d2 / (dn * (dn * dn - 1.0));
  } else {
    result.rho = pearson(rx, ry);
  }
  return result;
}

SpearmanResult goals_correlation(const std::map<std::string, double>& metric_per_video,
                                 const std::vector<GoalsRating>& ratings) {
  std::map<std::string, std::pair<double, int>> totals;
  for (const GoalsRating& r : ratings) {
    auto& [sum, count] = totals[r.video_id];
    sum += r.total;
    ++count;
  }

  std::vector<double> metric;
  std::vector<double> goals;
  for (const auto& [video, value] : metric_per_video) {
    auto it = totals.find(video);
    if (it == totals.end()) continue;
    metric.push_back(value);
    goals.push_back(it->second.first / it->second.second);
  }
  if (metric.size() < 3) {
    throw ValidationError("insufficient_videos", "need at least 3 videos with both a metric and "
                                                 "GOALS ratings, got " +
                                                     std::to_string(metric.size()));
  }
  return spearman(metric, goals);
}

SkillReport build_report(const std::vector<Detection>& dets, const VideoMeta& meta,
                         const std::vector<PhaseWindow>& phases,
                         const std::vector<GoalsRating>& ratings, const AnalyticsConfig& config) {
  try {
    validate(meta);
    SkillReport report;
    report.video_id = meta.video_id;
    report.meta = meta;
    report.config = config;

    const PresenceMatrix raw = presence_from_detections(dets, meta, config.min_confidence);
    const PresenceMatrix presence = smooth_presence(raw, config.smoothing_window);
    report.timeline = build_timeline(presence, meta);
    report.usage = usage_totals(report.timeline, meta);
    report.switches = switch_count(presence, false, config.switch_pair_window);

    std::vector<BBox> all_boxes;
    std::array<std::vector<BBox>, kToolCount> class_boxes;
    for (const Detection& det : dets) {
      if (det.confidence < config.min_confidence) continue;
      all_boxes.push_back(det.box);
      class_boxes[tool_index(det.tool)].push_back(det.box);
    }
    for (int c = 0; c < kToolCount; ++c) {
      report.heatmaps[c] =
          build_heatmap(class_boxes[c], meta, config.heatmap_rows, config.heatmap_cols);
    }
    report.combined_heatmap =
        build_heatmap(all_boxes, meta, config.heatmap_rows, config.heatmap_cols);

    report.tracks = build_tracks(dets, meta, config.tracking);

    report.motion.push_back(
        path_length(report.tracks, PhaseWindow{"full", 0, meta.n_frames - 1}, meta));
    for (const PhaseWindow& phase : phases) {
      report.motion.push_back(path_length(report.tracks, phase, meta));
    }

    GoalsSummary summary;
    for (const GoalsRating& r : ratings) {
      if (r.video_id != meta.video_id) continue;
      summary.depth_perception += r.depth_perception;
      summary.bimanual_dexterity += r.bimanual_dexterity;
      summary.efficiency += r.efficiency;
      summary.tissue_handling += r.tissue_handling;
      summary.total += r.total;
      ++summary.n_raters;
    }
    if (summary.n_raters > 0) {
      const double n = summary.n_raters;
      summary.depth_perception /= n;
      summary.bimanual_dexterity /= n;
      summary.efficiency /= n;
      summary.tissue_handling /= n;
      summary.total /= n;
      report.goals = summary;
    }
    return report;
  } catch (const Error& e) {
    throw Error(e.kind(), e.code(), "video '" + meta.video_id + "': " + e.message());
  }
}

}  // namespace scopemetrics
