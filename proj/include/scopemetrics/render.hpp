#pragma once

#include <array>
#include <string>
#include <string_view>
#include <vector>

#include "scopemetrics/analytics.hpp"

namespace scopemetrics {

// Fixed palette, one named color per class in canonical order. Box and
// trajectory colors encode tool identity; clipper (blue) and grasper (red)
// stay distinct by construction.
inline constexpr std::array<std::string_view, kToolCount> kToolColors = {
    "red", "magenta", "orange", "green", "blue", "teal", "gray"};

// SVG with one horizontal lane per tool in canonical order, labeled (a)-(g),
// x axis in minutes. Element order is fixed, so identical inputs give
// identical bytes.
std::string render_timeline(const Timeline& timeline, const VideoMeta& meta);

// Plain-text PGM (P2). maxval is the largest cell count, or 1 when the grid
// is all zero.
std::string render_heatmap(const HeatMap& map);

// SVG polylines of in-window centroid paths, one per track in track-id
// order, colored by class; single-point tracks render as a dot.
std::string render_trajectories(const std::vector<Track>& tracks, const PhaseWindow& phase,
                                const VideoMeta& meta);

}  // namespace scopemetrics
