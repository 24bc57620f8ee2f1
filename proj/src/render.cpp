#include "scopemetrics/render.hpp"

#include <algorithm>
#include <cmath>

#include "scopemetrics/format.hpp"

namespace scopemetrics {

namespace {

constexpr int kLaneHeight = 24;
constexpr int kLaneGap = 10;
constexpr int kMarginLeft = 150;
constexpr int kMarginRight = 20;
constexpr int kMarginTop = 20;
constexpr int kMarginBottom = 45;
constexpr int kPlotWidth = 720;

std::string lane_letter(int class_index) {
  return std::string("(") + static_cast<char>('a' + class_index) + ")";
}

double tick_step_minutes(double total_minutes) {
  for (double step : {1.0, 2.0, 5.0, 10.0, 15.0, 30.0, 60.0, 120.0}) {
    if (total_minutes / step <= 12.0) return step;
  }
  return 240.0;
}

void append_rect(std::string& svg, double x, double y, double w, double h,
                 const std::string& fill) {
  svg += "<rect x=\"" + format_double(x) + "\" y=\"" + format_double(y) + "\" width=\"" +
         format_double(w) + "\" height=\"" + format_double(h) + "\" fill=\"" + fill + "\"/>\n";
}

void append_text(std::string& svg, double x, double y, const std::string& text,
                 const std::string& anchor = "start") {
  svg += "<text x=\"" + format_double(x) + "\" y=\"" + format_double(y) +
         "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"" + anchor + "\">" + text +
         "</text>\n";
}

void append_line(std::string& svg, double x1, double y1, double x2, double y2,
                 const std::string& stroke) {
  svg += "<line x1=\"" + format_double(x1) + "\" y1=\"" + format_double(y1) + "\" x2=\"" +
         format_double(x2) + "\" y2=\"" + format_double(y2) + "\" stroke=\"" + stroke + "\"/>\n";
}

}  // namespace

std::string render_timeline(const Timeline& timeline, const VideoMeta& meta) {
  validate(meta);
  const double total_minutes =
      std::max(static_cast<double>(meta.n_frames) / meta.fps / 60.0, 1e-9);
  const int height = kMarginTop + kToolCount * (kLaneHeight + kLaneGap) + kMarginBottom;
  const int width = kMarginLeft + kPlotWidth + kMarginRight;
  const double x_per_minute = static_cast<double>(kPlotWidth) / total_minutes;

  std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(width) +
                    "\" height=\"" + std::to_string(height) + "\" viewBox=\"0 0 " +
                    std::to_string(width) + " " + std::to_string(height) + "\">\n";
  append_rect(svg, 0, 0, width, height, "white");

  for (int c = 0; c < kToolCount; ++c) {
    const double lane_top = kMarginTop + c * (kLaneHeight + kLaneGap);
    append_rect(svg, kMarginLeft, lane_top, kPlotWidth, kLaneHeight, "#f2f2f2");
    append_text(svg, 8, lane_top + kLaneHeight - 7,
                lane_letter(c) + " " + std::string(tool_name(tool_from_index(c))));
    const std::string fill(kToolColors[static_cast<std::size_t>(c)]);
    for (const Interval& iv : timeline.per_class[static_cast<std::size_t>(c)]) {
      const double start_min = static_cast<double>(iv.start_frame) / meta.fps / 60.0;
      const double end_min = static_cast<double>(iv.end_frame + 1) / meta.fps / 60.0;
      append_rect(svg, kMarginLeft + start_min * x_per_minute, lane_top,
                  std::max((end_min - start_min) * x_per_minute, 0.5), kLaneHeight, fill);
    }
  }

  const double axis_y = kMarginTop + kToolCount * (kLaneHeight + kLaneGap) + 5;
  append_line(svg, kMarginLeft, axis_y, kMarginLeft + kPlotWidth, axis_y, "black");
  const double step = tick_step_minutes(total_minutes);
  for (double tick = 0.0; tick <= total_minutes + 1e-9; tick += step) {
    const double x = kMarginLeft + tick * x_per_minute;
    append_line(svg, x, axis_y, x, axis_y + 5, "black");
    append_text(svg, x, axis_y + 18, format_double(tick), "middle");
  }
  append_text(svg, kMarginLeft + kPlotWidth / 2.0, axis_y + 34, "minutes", "middle");
  svg += "</svg>\n";
  return svg;
}

std::string render_heatmap(const HeatMap& map) {
  const int rows = static_cast<int>(map.grid.rows());
  const int cols = static_cast<int>(map.grid.cols());
  const int maxval = std::max(map.grid.maxCoeff(), 1);

  std::string pgm = "P2\n" + std::to_string(cols) + " " + std::to_string(rows) + "\n" +
                    std::to_string(maxval) + "\n";
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      if (c > 0) pgm += ' ';
      pgm += std::to_string(map.grid(r, c));
    }
    pgm += '\n';
  }
  return pgm;
}

std::string render_trajectories(const std::vector<Track>& tracks, const PhaseWindow& phase,
                                const VideoMeta& meta) {
  validate(phase, meta);
  const int width = static_cast<int>(std::lround(meta.width));
  const int height = static_cast<int>(std::lround(meta.height));

  std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(width) +
                    "\" height=\"" + std::to_string(height) + "\" viewBox=\"0 0 " +
                    format_double(meta.width) + " " + format_double(meta.height) + "\">\n";
  append_rect(svg, 0, 0, meta.width, meta.height, "white");
  svg += "<rect x=\"0\" y=\"0\" width=\"" + format_double(meta.width) + "\" height=\"" +
         format_double(meta.height) + "\" fill=\"none\" stroke=\"black\"/>\n";

  std::vector<const Track*> ordered;
  for (const Track& track : tracks) ordered.push_back(&track);
  std::sort(ordered.begin(), ordered.end(),
            [](const Track* a, const Track* b) { return a->track_id < b->track_id; });

  for (const Track* track : ordered) {
    std::vector<const TrackPoint*> points;
    for (const TrackPoint& point : track->points) {
      if (point.frame_index >= phase.start_frame && point.frame_index <= phase.end_frame) {
        points.push_back(&point);
      }
    }
    if (points.empty()) continue;
    const std::string color(kToolColors[static_cast<std::size_t>(tool_index(track->tool))]);
    if (points.size() == 1) {
      svg += "<circle cx=\"" + format_double(points[0]->center.x()) + "\" cy=\"" +
             format_double(points[0]->center.y()) + "\" r=\"2\" fill=\"" + color + "\"/>\n";
      continue;
    }
    svg += "<polyline fill=\"none\" stroke=\"" + color + "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t k = 0; k < points.size(); ++k) {
      if (k > 0) svg += ' ';
      svg += format_double(points[k]->center.x()) + "," + format_double(points[k]->center.y());
    }
    svg += "\"/>\n";
    // start-of-track marker
    svg += "<circle cx=\"" + format_double(points[0]->center.x()) + "\" cy=\"" +
           format_double(points[0]->center.y()) + "\" r=\"2.5\" fill=\"" + color + "\"/>\n";
  }
  svg += "</svg>\n";
  return svg;
}

}  // namespace scopemetrics
