#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "neurokinect/tensor.hpp"

namespace nk {

// Dependency-free SVG line plots: text-based, diffable, good enough for the
// measured-vs-predicted and trajectory reports.

struct SvgSeries {
  std::vector<double> x;
  std::vector<double> y;
  std::string color = "#1f77b4";
  std::string label;
};

void write_svg_lines(const std::filesystem::path& path, const std::string& title,
                     const std::string& x_label, const std::string& y_label,
                     const std::vector<SvgSeries>& series, int width = 900,
                     int height = 420);

// Two 3 x T trajectories drawn side by side in an isometric projection.
void write_svg_trajectories(const std::filesystem::path& path, const std::string& title,
                            const Tensor& measured, const Tensor& predicted,
                            int width = 900, int height = 460);

}  // namespace nk
