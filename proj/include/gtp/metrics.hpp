#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace gtp {

using ClipSet = std::vector<std::size_t>;
using AnnotationSet = std::array<ClipSet, 4>;

struct PairScores {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double iou = 0.0;

  bool operator==(const PairScores&) const = default;
};

/// Agreement between a predicted clip set P and one annotation A. Inputs are
/// treated as sets. An empty P scores zero everywhere; an empty A is rejected.
PairScores pair_metrics(std::span<const std::size_t> predicted, std::span<const std::size_t> annotated);

enum class MaxMode {
  /// Each metric takes its own maximum over the four annotations.
  per_metric,
  /// All four metrics come from the annotation with the best F1 (ties
  /// toward the lowest annotator index).
  single_annotation,
};

struct MetricReport {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double iou = 0.0;
  std::size_t samples = 0;
  std::vector<PairScores> per_sample;

  /// "key=value" lines.
  std::string to_key_value() const;
  std::string to_json() const;

  bool operator==(const MetricReport&) const = default;
};

MetricReport corpus_metrics(std::span<const ClipSet> predictions, std::span<const AnnotationSet> annotations,
                            MaxMode mode = MaxMode::per_metric);

struct Consistency {
  std::array<double, 4> per_annotation{};
  double mean = 0.0;
};

/// Mean IoU of each annotation against the other three, and their average.
Consistency annotation_consistency(const AnnotationSet& annotations);

/// IoU of two clip sets (0 when both are empty).
double set_iou(std::span<const std::size_t> a, std::span<const std::size_t> b);

}  // namespace gtp
