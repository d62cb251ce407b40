#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "voisyn/voi.hpp"

namespace voisyn::svg {

// Self-contained SVG documents; no external plotting dependency.  The CSV
// artifacts stay canonical, these are reading aids.
std::string grid_heatmap(const GridResult& grid, const std::string& title);

// Line chart of value against sample size (log-x when the grid spans more
// than a decade), with a +-2 SE ribbon where standard errors are available.
std::string curve_chart(const std::vector<CurvePoint>& curve, const std::string& title);

// Net-benefit bars over the candidate sample sizes; the optimum is marked.
std::string enbs_chart(const EnbsResult& result, const std::string& title);

void write_file(const std::filesystem::path& path, const std::string& content);

}  // namespace voisyn::svg
