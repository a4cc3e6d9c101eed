#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "gtp/dataset.hpp"
#include "gtp/metrics.hpp"
#include "gtp/model.hpp"

namespace gtp {

struct TrainConfig {
  double learning_rate = 1e-3;
  /// Multiply the rate by `decay_factor` every `decay_every` epochs (0 = never).
  std::size_t decay_every = 20;
  double decay_factor = 0.5;
  std::size_t epochs = 10;
  std::uint64_t seed = 0;
  bool teacher_forcing = true;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  /// Rescale per-sample gradients whose global norm exceeds this (0 = off).
  double clip_norm = 0.0;

  void validate() const;
  double rate_at(std::size_t epoch) const;
};

/// Adaptive-moment gradient descent over a fixed list of tensors.
class Adam {
 public:
  Adam(std::vector<NamedTensor> params, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);

  void step(std::span<const Tensor> grads, double learning_rate);
  std::size_t steps_taken() const noexcept { return steps_; }

 private:
  std::vector<NamedTensor> params_;
  std::vector<Tensor> first_;
  std::vector<Tensor> second_;
  double beta1_;
  double beta2_;
  double eps_;
  std::size_t steps_ = 0;
};

struct EpochStats {
  std::size_t epoch = 0;
  double mean_loss = 0.0;
  double mean_grad_norm = 0.0;
  double learning_rate = 0.0;
};

/// -Σ_k log e_k[target_k], probabilities floored at 1e-12.
double step_loss(std::span<const StepDistribution> distributions, std::span<const std::size_t> targets);

/// Per-sample gradient steps over the data in a seeded shuffled order.
class Trainer {
 public:
  Trainer(Model& model, TrainConfig config);

  EpochStats train_epoch(std::span<const VideoSample> data);
  std::size_t epochs_done() const noexcept { return epoch_; }

 private:
  Model& model_;
  TrainConfig config_;
  std::vector<NamedTensor> params_;
  Adam optimizer_;
  std::size_t epoch_ = 0;
};

/// Selected clips for every sample, in input order.
std::vector<ClipSet> predict_all(const Model& model, std::span<const VideoSample> data, const PredictOptions& options = {});

MetricReport evaluate(const Model& model, std::span<const VideoSample> data, MaxMode mode = MaxMode::per_metric);

std::vector<AnnotationSet> annotations_of(std::span<const VideoSample> data);

}  // namespace gtp
