#include "gtp/training.hpp"

#include <cmath>
#include <numeric>

#include "gtp/errors.hpp"
#include "gtp/random.hpp"

namespace gtp {

void TrainConfig::validate() const {
  if (!(learning_rate >= 0.0)) {
    throw InvalidInput("learning rate must be non-negative");
  }
  if (!(decay_factor > 0.0)) {
    throw InvalidInput("decay factor must be positive");
  }
  if (!(clip_norm >= 0.0)) {
    throw InvalidInput("clip norm must be non-negative");
  }
}

double TrainConfig::rate_at(std::size_t epoch) const {
  if (decay_every == 0) {
    return learning_rate;
  }
  return learning_rate * std::pow(decay_factor, static_cast<double>(epoch / decay_every));
}

Adam::Adam(std::vector<NamedTensor> params, double beta1, double beta2, double eps)
    : params_(std::move(params)), beta1_(beta1), beta2_(beta2), eps_(eps) {
  for (const auto& p : params_) {
    first_.emplace_back(p.tensor->rows(), p.tensor->cols());
    second_.emplace_back(p.tensor->rows(), p.tensor->cols());
  }
}

void Adam::step(std::span<const Tensor> grads, double learning_rate) {
  if (grads.size() != params_.size()) {
    throw InvalidInput("Adam: gradient count does not match parameter count");
  }
  ++steps_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(steps_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(steps_));
  for (std::size_t i = 0; i < params_.size(); ++i) {
    Tensor& w = *params_[i].tensor;
    const Tensor& g = grads[i];
    Tensor& m = first_[i];
    Tensor& v = second_[i];
    for (std::size_t j = 0; j < w.size(); ++j) {
      m[j] = beta1_ * m[j] + (1.0 - beta1_) * g[j];
      v[j] = beta2_ * v[j] + (1.0 - beta2_) * g[j] * g[j];
      w[j] -= learning_rate * (m[j] / c1) / (std::sqrt(v[j] / c2) + eps_);
    }
  }
}

double step_loss(std::span<const StepDistribution> distributions, std::span<const std::size_t> targets) {
  if (distributions.size() != targets.size()) {
    throw InvalidInput("step_loss: " + std::to_string(distributions.size()) + " distributions for " +
                       std::to_string(targets.size()) + " targets");
  }
  double total = 0.0;
  for (std::size_t k = 0; k < targets.size(); ++k) {
    if (targets[k] >= distributions[k].size()) {
      throw InvalidInput("step_loss: target " + std::to_string(targets[k]) + " outside distribution of size " +
                         std::to_string(distributions[k].size()));
    }
    total -= std::log(std::max(distributions[k][targets[k]], 1e-12));
  }
  return total;
}

Trainer::Trainer(Model& model, TrainConfig config)
    : model_(model),
      config_(config),
      params_(model.named_tensors()),
      optimizer_(params_, config.beta1, config.beta2, config.adam_eps) {
  config_.validate();
}

EpochStats Trainer::train_epoch(std::span<const VideoSample> data) {
  if (data.empty()) {
    throw InvalidInput("train_epoch: empty dataset");
  }
  EpochStats stats;
  stats.epoch = epoch_;
  stats.learning_rate = config_.rate_at(epoch_);

  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(Rng::derive(config_.seed, epoch_));
  rng.shuffle(order);

  std::vector<Tensor> grads(params_.size());
  for (std::size_t idx : order) {
    const VideoSample& s = data[idx];
    Tape tape;
    double loss_value = 0.0;
    try {
      Var loss = model_.loss(tape, s.clips, s.sentence, s.truth, config_.teacher_forcing);
      loss_value = loss.scalar();
      tape.backward(loss);
    } catch (const NumericError& e) {
      throw NumericError(e.op(), "sample '" + s.id + "' at epoch " + std::to_string(epoch_) + ": " + e.what());
    }
    double sq = 0.0;
    for (std::size_t i = 0; i < params_.size(); ++i) {
      grads[i] = tape.param_grad(*params_[i].tensor);
      for (double g : grads[i].values()) {
        sq += g * g;
      }
    }
    const double norm = std::sqrt(sq);
    if (!std::isfinite(norm)) {
      throw NumericError("backward", "non-finite gradient on sample '" + s.id + "'");
    }
    if (config_.clip_norm > 0.0 && norm > config_.clip_norm) {
      const double f = config_.clip_norm / norm;
      for (auto& g : grads) {
        for (double& v : g.values()) {
          v *= f;
        }
      }
    }
    optimizer_.step(grads, stats.learning_rate);
    stats.mean_loss += loss_value;
    stats.mean_grad_norm += norm;
  }
  stats.mean_loss /= static_cast<double>(data.size());
  stats.mean_grad_norm /= static_cast<double>(data.size());
  ++epoch_;
  return stats;
}

std::vector<ClipSet> predict_all(const Model& model, std::span<const VideoSample> data, const PredictOptions& options) {
  std::vector<ClipSet> out;
  out.reserve(data.size());
  for (const auto& s : data) {
    out.push_back(model.predict(s.clips, s.sentence, options).selection.clips);
  }
  return out;
}

std::vector<AnnotationSet> annotations_of(std::span<const VideoSample> data) {
  std::vector<AnnotationSet> out;
  out.reserve(data.size());
  for (const auto& s : data) {
    out.push_back(s.annotations);
  }
  return out;
}

MetricReport evaluate(const Model& model, std::span<const VideoSample> data, MaxMode mode) {
  const auto predictions = predict_all(model, data);
  const auto annotations = annotations_of(data);
  return corpus_metrics(predictions, annotations, mode);
}

}  // namespace gtp
