#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "rediffuse/metrics.hpp"

namespace rediffuse {

// Standalone ROC plot: unit axes, dashed chance diagonal, one polyline per
// named summary, legend carrying each AUC. Returns the SVG text.
std::string render_roc_svg(
    const std::vector<std::pair<std::string, RocSummary>>& summaries);

void plot_roc_svg(
    const std::vector<std::pair<std::string, RocSummary>>& summaries,
    const std::filesystem::path& path);

}  // namespace rediffuse
