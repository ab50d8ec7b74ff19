#pragma once

// Self-contained SVG 1.1 drawing of stopping boundaries: time on the
// horizontal axis, state on the vertical axis, one colour per drift,
// zero-drift curves dashed.

#include <string>
#include <vector>

#include "lastzero/boundary.hpp"

namespace lastzero {

struct PlotOptions {
    double width = 720.0;
    double height = 480.0;
    std::string title = "Optimal stopping boundaries";
    std::string manifest;  ///< written into a comment when non-empty
};

/// Each curve is a <polyline class="boundary" data-mu=".." data-side="minus|plus">
/// whose last point is (T, 0). Throws std::invalid_argument on an empty list.
std::string render_boundaries_svg(const std::vector<BoundaryPair>& pairs, const PlotOptions& opts = {});

}  // namespace lastzero
