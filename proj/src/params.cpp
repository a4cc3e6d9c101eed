#include "gtp/params.hpp"

#include <cmath>

namespace gtp {

Tensor random_uniform(std::size_t rows, std::size_t cols, double scale, Rng& rng) {
  Tensor t(rows, cols);
  for (double& v : t.values()) {
    v = rng.uniform(-scale, scale);
  }
  return t;
}

namespace {

double fan_in_scale(std::size_t fan_in) { return 1.0 / std::sqrt(static_cast<double>(fan_in)); }

void push(std::vector<NamedTensor>& out, const std::string& prefix, const char* name, Tensor& t) {
  out.push_back({prefix + name, &t});
}

}  // namespace

GruDirection GruDirection::zeros(std::size_t input_dim, std::size_t hidden) {
  GruDirection d;
  d.w_z = d.w_r = d.w_n = Tensor(input_dim, hidden);
  d.u_z = d.u_r = d.u_n = Tensor(hidden, hidden);
  d.b_z = d.b_r = d.b_n = Tensor(1, hidden);
  return d;
}

GruDirection GruDirection::random(std::size_t input_dim, std::size_t hidden, Rng& rng) {
  const double s = fan_in_scale(hidden);
  GruDirection d;
  d.w_z = random_uniform(input_dim, hidden, s, rng);
  d.w_r = random_uniform(input_dim, hidden, s, rng);
  d.w_n = random_uniform(input_dim, hidden, s, rng);
  d.u_z = random_uniform(hidden, hidden, s, rng);
  d.u_r = random_uniform(hidden, hidden, s, rng);
  d.u_n = random_uniform(hidden, hidden, s, rng);
  d.b_z = random_uniform(1, hidden, s, rng);
  d.b_r = random_uniform(1, hidden, s, rng);
  d.b_n = random_uniform(1, hidden, s, rng);
  return d;
}

void GruDirection::collect(const std::string& prefix, std::vector<NamedTensor>& out) {
  push(out, prefix, "w_z", w_z);
  push(out, prefix, "w_r", w_r);
  push(out, prefix, "w_n", w_n);
  push(out, prefix, "u_z", u_z);
  push(out, prefix, "u_r", u_r);
  push(out, prefix, "u_n", u_n);
  push(out, prefix, "b_z", b_z);
  push(out, prefix, "b_r", b_r);
  push(out, prefix, "b_n", b_n);
}

BiGruParams BiGruParams::zeros(std::size_t input_dim, std::size_t hidden) {
  return {GruDirection::zeros(input_dim, hidden), GruDirection::zeros(input_dim, hidden)};
}

BiGruParams BiGruParams::random(std::size_t input_dim, std::size_t hidden, Rng& rng) {
  BiGruParams p;
  p.forward = GruDirection::random(input_dim, hidden, rng);
  p.backward = GruDirection::random(input_dim, hidden, rng);
  return p;
}

void BiGruParams::collect(const std::string& prefix, std::vector<NamedTensor>& out) {
  forward.collect(prefix + "fwd.", out);
  backward.collect(prefix + "bwd.", out);
}

InteractionParams InteractionParams::random(std::size_t encoded_dim, std::size_t attention_dim, std::size_t fused_dim,
                                            Rng& rng) {
  InteractionParams p;
  p.word_proj = random_uniform(encoded_dim, attention_dim, fan_in_scale(encoded_dim), rng);
  p.clip_proj = random_uniform(encoded_dim, attention_dim, fan_in_scale(encoded_dim), rng);
  p.score_bias = Tensor(1, attention_dim);
  p.score = random_uniform(attention_dim, 1, fan_in_scale(attention_dim), rng);
  p.fuse_weight = random_uniform(2 * encoded_dim, fused_dim, fan_in_scale(2 * encoded_dim), rng);
  p.fuse_bias = random_uniform(1, fused_dim, fan_in_scale(2 * encoded_dim), rng);
  return p;
}

void InteractionParams::collect(const std::string& prefix, std::vector<NamedTensor>& out) {
  push(out, prefix, "word_proj", word_proj);
  push(out, prefix, "clip_proj", clip_proj);
  push(out, prefix, "score_bias", score_bias);
  push(out, prefix, "score", score);
  push(out, prefix, "fuse_weight", fuse_weight);
  push(out, prefix, "fuse_bias", fuse_bias);
}

GraphLayerParams GraphLayerParams::random(std::size_t dim, Rng& rng) {
  GraphLayerParams p;
  p.weight = random_uniform(dim, dim, fan_in_scale(dim), rng);
  p.ln_gain = Tensor(1, dim, 1.0);
  p.ln_bias = Tensor(1, dim);
  return p;
}

void GraphLayerParams::collect(const std::string& prefix, std::vector<NamedTensor>& out) {
  push(out, prefix, "weight", weight);
  push(out, prefix, "ln_gain", ln_gain);
  push(out, prefix, "ln_bias", ln_bias);
}

PointerParams PointerParams::random(std::size_t clip_feature_dim, std::size_t hidden, std::size_t encoded_sentence_dim,
                                    std::size_t pointer_hidden, bool aggregate_features, Rng& rng) {
  PointerParams p;
  std::size_t slot_dim = clip_feature_dim;
  if (aggregate_features) {
    p.aggregate = BiGruParams::random(clip_feature_dim, hidden, rng);
    slot_dim = 2 * hidden;
  }
  const std::size_t attention_dim = pointer_hidden;
  p.score = random_uniform(attention_dim, 1, fan_in_scale(attention_dim), rng);
  p.feature_proj = random_uniform(slot_dim, attention_dim, fan_in_scale(slot_dim), rng);
  p.state_proj = random_uniform(pointer_hidden, attention_dim, fan_in_scale(pointer_hidden), rng);
  p.score_bias = Tensor(1, attention_dim);
  p.decoder = GruDirection::random(slot_dim, pointer_hidden, rng);
  p.init_proj = random_uniform(encoded_sentence_dim, pointer_hidden, fan_in_scale(encoded_sentence_dim), rng);
  return p;
}

void PointerParams::collect(const std::string& prefix, std::vector<NamedTensor>& out) {
  if (!aggregate.forward.w_z.empty()) {
    aggregate.collect(prefix + "aggregate.", out);
  }
  push(out, prefix, "score", score);
  push(out, prefix, "feature_proj", feature_proj);
  push(out, prefix, "state_proj", state_proj);
  push(out, prefix, "score_bias", score_bias);
  decoder.collect(prefix + "decoder.", out);
  push(out, prefix, "init_proj", init_proj);
}

ClassifierParams ClassifierParams::random(std::size_t dim, Rng& rng) {
  ClassifierParams p;
  p.weight = random_uniform(dim, 1, fan_in_scale(dim), rng);
  p.bias = Tensor(1, 1);
  return p;
}

void ClassifierParams::collect(const std::string& prefix, std::vector<NamedTensor>& out) {
  push(out, prefix, "weight", weight);
  push(out, prefix, "bias", bias);
}

}  // namespace gtp
