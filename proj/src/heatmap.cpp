#include "gtp/heatmap.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "gtp/checkpoint.hpp"
#include "gtp/dataset.hpp"
#include "gtp/errors.hpp"

namespace gtp {
namespace {

void write_text(const std::filesystem::path& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw DataError("", "cannot write " + path.string());
  }
  out << body;
}

double row_error(const Tensor& grid) {
  double worst = 0.0;
  for (std::size_t r = 0; r < grid.rows(); ++r) {
    double sum = 0.0;
    for (double v : grid.row(r)) {
      sum += v;
    }
    worst = std::max(worst, std::abs(sum - 1.0));
  }
  return worst;
}

Model with_lambda(Model model, std::optional<double> lambda) {
  if (!lambda) {
    return model;
  }
  ModelConfig config = model.config();
  config.lambda = *lambda;
  return Model::from_params(config, model.params());
}

}  // namespace

std::string grid_text(const Tensor& grid) {
  std::string out;
  char buf[32];
  for (std::size_t r = 0; r < grid.rows(); ++r) {
    for (std::size_t c = 0; c < grid.cols(); ++c) {
      std::snprintf(buf, sizeof buf, "%.17g", grid(r, c));
      if (c > 0) {
        out += ' ';
      }
      out += buf;
    }
    out += '\n';
  }
  return out;
}

std::string grid_pgm(const Tensor& grid) {
  double top = 0.0;
  for (double v : grid.values()) {
    top = std::max(top, v);
  }
  std::string out = "P2\n" + std::to_string(grid.cols()) + " " + std::to_string(grid.rows()) + "\n255\n";
  for (std::size_t r = 0; r < grid.rows(); ++r) {
    for (std::size_t c = 0; c < grid.cols(); ++c) {
      const double v = top > 0.0 ? std::clamp(grid(r, c) / top, 0.0, 1.0) : 0.0;
      if (c > 0) {
        out += ' ';
      }
      out += std::to_string(static_cast<int>(std::lround(v * 255.0)));
    }
    out += '\n';
  }
  return out;
}

void write_grid(const std::filesystem::path& stem, const Tensor& grid) {
  write_text(stem.string() + ".txt", grid_text(grid));
  write_text(stem.string() + ".pgm", grid_pgm(grid));
}

HeatmapSummary export_heatmaps(const HeatmapOptions& options) {
  if (options.checkpoints.empty()) {
    throw InvalidInput("heatmap export needs at least one checkpoint");
  }
  const CheckpointHeader header = read_checkpoint_header(options.checkpoints.back());
  if (header.config.variant == Variant::no_graph) {
    throw InvalidInput("the no-graph variant has no attention or adjacency to export");
  }
  std::vector<VideoSample> samples = load_manifest(options.manifest, header.config.dims.max_clips);
  if (options.max_samples != 0 && samples.size() > options.max_samples) {
    samples.resize(options.max_samples);
  }
  check_compatible(header, samples);
  std::filesystem::create_directories(options.output_dir);

  HeatmapSummary summary;
  summary.samples = samples.size();
  auto emit = [&](const std::filesystem::path& stem, const Tensor& grid) {
    write_grid(stem, grid);
    summary.files.push_back(stem.string() + ".txt");
    summary.files.push_back(stem.string() + ".pgm");
    summary.max_row_error = std::max(summary.max_row_error, row_error(grid));
  };

  const Model model = with_lambda(load_checkpoint(options.checkpoints.back()), options.lambda);
  for (const VideoSample& s : samples) {
    const Prediction p = model.predict(s.clips, s.sentence);
    emit(options.output_dir / (s.id + ".attention"), p.attention);
    emit(options.output_dir / (s.id + ".adjacency"), p.adjacency);
  }

  if (options.checkpoints.size() > 1) {
    const std::filesystem::path dir = options.output_dir / "snapshots";
    std::filesystem::create_directories(dir);
    for (std::size_t k = 0; k < options.checkpoints.size(); ++k) {
      const CheckpointHeader h = read_checkpoint_header(options.checkpoints[k]);
      check_compatible(h, samples);
      const Model snapshot = with_lambda(load_checkpoint(options.checkpoints[k]), options.lambda);
      char tag[16];
      std::snprintf(tag, sizeof tag, "%03zu", k);
      for (const VideoSample& s : samples) {
        emit(dir / (s.id + ".adjacency." + tag), snapshot.predict(s.clips, s.sentence).adjacency);
      }
    }
  }
  return summary;
}

}  // namespace gtp
