#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "gtp/tensor.hpp"

namespace gtp {

/// One row per line, space-separated, full double precision.
std::string grid_text(const Tensor& grid);

/// Plain (P2) graymap scaled so the largest entry maps to 255.
std::string grid_pgm(const Tensor& grid);

void write_grid(const std::filesystem::path& stem, const Tensor& grid);

struct HeatmapOptions {
  /// The last checkpoint provides the per-sample maps. With more than one,
  /// every checkpoint also contributes an adjacency snapshot per sample.
  std::vector<std::filesystem::path> checkpoints;
  std::filesystem::path manifest;
  std::filesystem::path output_dir;
  std::optional<double> lambda;
  std::size_t max_samples = 0;  // 0 = all
};

struct HeatmapSummary {
  std::size_t samples = 0;
  std::vector<std::filesystem::path> files;
  /// Largest |row sum - 1| over every exported grid.
  double max_row_error = 0.0;
};

HeatmapSummary export_heatmaps(const HeatmapOptions& options);

}  // namespace gtp
