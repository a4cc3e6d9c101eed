#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "gtp/dataset.hpp"
#include "gtp/grad_check.hpp"
#include "gtp/metrics.hpp"
#include "gtp/model.hpp"
#include "gtp/training.hpp"

namespace gtp::cli {

enum ExitCode : int { exit_ok = 0, exit_usage = 1, exit_data = 2, exit_numeric = 3 };

struct TrainOptions {
  std::filesystem::path manifest;
  /// Held-out manifest scored after every epoch; the training set otherwise.
  std::optional<std::filesystem::path> validation;
  std::filesystem::path checkpoint;
  std::optional<std::filesystem::path> log;
  /// Writes `epoch-NNN.gtpc` here after every epoch.
  std::optional<std::filesystem::path> snapshot_dir;
  /// Feature widths come from the manifest; the rest of the config is used
  /// as given.
  ModelConfig model;
  TrainConfig train;
};

struct EpochRow {
  EpochStats stats;
  MetricReport validation;
};

std::string log_header();
std::string log_row(const EpochRow& row);

/// Trains, writes the checkpoint and the tab-separated per-epoch log.
/// `progress` receives the log rows as they are produced.
std::vector<EpochRow> run_train(const TrainOptions& options, std::ostream* progress = nullptr);

struct EvalOptions {
  std::optional<std::filesystem::path> checkpoint;
  std::filesystem::path manifest;
  MaxMode mode = MaxMode::per_metric;
  /// Score each sample's ground-truth annotation instead of model output.
  bool oracle = false;
  std::size_t max_clips = 5;  // only used in oracle mode
  /// Writes `<prefix>.txt` (key=value) and `<prefix>.json`.
  std::optional<std::filesystem::path> report_prefix;
};

MetricReport run_eval(const EvalOptions& options);

struct InferOptions {
  std::filesystem::path checkpoint;
  std::filesystem::path manifest;
  bool min_one_clip = false;
};

/// One JSON object per line: id, clips, per-step probabilities (pointer
/// variants) or clip scores (classifier variant).
std::vector<ClipSet> run_infer(const InferOptions& options, std::ostream& out);

/// The small full-pipeline configuration used for gradient verification:
/// T clips, N words, every width equal to `width`.
struct GradCheckSetup {
  std::size_t clips = 6;
  std::size_t words = 5;
  std::size_t width = 8;
  std::size_t graph_layers = 2;
  Variant variant = Variant::full;
  double lambda = 150.0;
  std::uint64_t seed = 1;
  GradCheckOptions options;
};

GradCheckReport run_gradcheck(const GradCheckSetup& setup);

struct SynthOptions {
  SynthConfig config;
  std::filesystem::path output_dir;
  /// Also write a disjoint `test.jsonl` with this many samples.
  std::size_t test_samples = 0;
};

/// Returns the written manifest paths (training first).
std::vector<std::filesystem::path> run_synth(const SynthOptions& options);

}  // namespace gtp::cli
