#pragma once

#include <string>

#include "scopemetrics/analytics.hpp"

namespace scopemetrics {

inline constexpr std::string_view kReportSchema = "scopemetrics/1";

// report.json round trip. Track points serialize as
// [frame_index, x_min, y_min, x_max, y_max]; centroids are recomputed on
// load, so re-parsing and re-rendering reproduces identical images.
std::string serialize_report(const SkillReport& report);
SkillReport parse_report(const std::string& text);

}  // namespace scopemetrics
