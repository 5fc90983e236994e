#pragma once

#include <string>
#include <vector>

#include "qcap/experiments.hpp"

// Deterministic artifact rendering: JSON reports, CSV region tables, and an
// SVG heatmap of the region scan. Payloads are byte-stable for identical
// inputs; runtime_ms is only included on request since it varies run to run.

namespace qcap {

std::string render_json(const ExperimentReport& report, bool include_runtime = false);

/// Header "q,p,delta", rows in row-major grid order, 12 significant digits.
std::string render_region_csv(const std::vector<RegionPoint>& points);

/// 512x512 heatmap, linear blue-white-red over [-max|delta|, +max|delta|],
/// with the zero contour drawn. Points must form a grid_n x grid_n row-major
/// grid.
std::string render_region_svg(const std::vector<RegionPoint>& points, int grid_n);

/// Writes via a temp file in the same directory followed by a rename.
/// Throws std::runtime_error on failure.
void write_text_atomic(const std::string& path, const std::string& payload);

}  // namespace qcap
