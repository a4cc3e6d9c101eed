#include "gtp/model.hpp"

#include <algorithm>
#include <numeric>

#include "gtp/errors.hpp"

namespace gtp {

std::string_view variant_name(Variant v) {
  switch (v) {
    case Variant::full:
      return "full";
    case Variant::no_graph:
      return "no-graph";
    case Variant::no_pointer:
      return "no-pointer";
    case Variant::no_mask:
      return "no-mask";
  }
  return "unknown";
}

Variant parse_variant(std::string_view name) {
  for (Variant v : {Variant::full, Variant::no_graph, Variant::no_pointer, Variant::no_mask}) {
    if (variant_name(v) == name) {
      return v;
    }
  }
  throw InvalidInput("unknown variant '" + std::string(name) + "' (expected full, no-graph, no-pointer, no-mask)");
}

GraphConfig ModelConfig::graph_config() const {
  GraphConfig g;
  g.layer_count = dims.graph_layers;
  g.lambda = lambda;
  g.activation = graph_activation;
  g.ln_eps = ln_eps;
  g.per_layer_adjacency = per_layer_adjacency;
  return g;
}

void ModelConfig::validate() const {
  const ModelDims& d = dims;
  if (d.clip_dim == 0 || d.word_dim == 0 || d.hidden == 0 || d.fused == 0 || d.pointer_hidden == 0 || d.max_clips == 0) {
    throw InvalidInput("model dimensions must be positive");
  }
  if (variant != Variant::no_graph) {
    graph_config().validate();
  }
}

namespace {

bool uses_graph(Variant v) { return v != Variant::no_graph; }
bool uses_pointer(Variant v) { return v != Variant::no_pointer; }

std::size_t pointer_input_dim(const ModelConfig& c) {
  return uses_graph(c.variant) ? c.dims.fused : 4 * c.dims.hidden;
}

}  // namespace

Model Model::build(const ModelConfig& config, std::uint64_t seed) {
  config.validate();
  const ModelDims& d = config.dims;
  Rng rng(seed);
  ModelParams p;
  p.video_encoder = BiGruParams::random(d.clip_dim, d.hidden, rng);
  p.sentence_encoder = BiGruParams::random(d.word_dim, d.hidden, rng);
  if (uses_graph(config.variant)) {
    p.interaction = InteractionParams::random(2 * d.hidden, 2 * d.hidden, d.fused, rng);
    for (std::size_t i = 0; i < d.graph_layers; ++i) {
      p.graph.push_back(GraphLayerParams::random(d.fused, rng));
    }
  }
  if (uses_pointer(config.variant)) {
    p.pointer = PointerParams::random(pointer_input_dim(config), d.hidden, 2 * d.hidden, d.pointer_hidden,
                                      !config.raw_pointer_features, rng);
  } else {
    p.classifier = ClassifierParams::random(d.fused, rng);
  }
  return Model(config, std::move(p));
}

Model Model::from_params(const ModelConfig& config, ModelParams params) {
  config.validate();
  Model reference = build(config, 0);
  Model m(config, std::move(params));
  auto expected = reference.named_tensors();
  auto actual = m.named_tensors();
  if (expected.size() != actual.size()) {
    throw InvalidInput("parameter set has " + std::to_string(actual.size()) + " tensors, expected " +
                       std::to_string(expected.size()));
  }
  for (std::size_t i = 0; i < expected.size(); ++i) {
    if (expected[i].tensor->shape() != actual[i].tensor->shape()) {
      throw InvalidInput("parameter " + expected[i].name + " has shape " + actual[i].tensor->shape_string() +
                         ", expected " + expected[i].tensor->shape_string());
    }
  }
  return m;
}

std::vector<NamedTensor> Model::named_tensors() {
  std::vector<NamedTensor> out;
  params_.video_encoder.collect("video_encoder.", out);
  params_.sentence_encoder.collect("sentence_encoder.", out);
  if (uses_graph(config_.variant)) {
    params_.interaction.collect("interaction.", out);
    for (std::size_t i = 0; i < params_.graph.size(); ++i) {
      params_.graph[i].collect("graph." + std::to_string(i) + ".", out);
    }
  }
  if (uses_pointer(config_.variant)) {
    params_.pointer.collect("pointer.", out);
  } else {
    params_.classifier.collect("classifier.", out);
  }
  return out;
}

std::size_t Model::parameter_count() {
  std::size_t n = 0;
  for (const auto& t : named_tensors()) {
    n += t.tensor->size();
  }
  return n;
}

Encoded Model::encode(Tape& tape, const ClipSequence& clips, const TokenizedSentence& sentence) const {
  if (clips.length() == 0 || sentence.length() == 0) {
    throw InvalidInput("encode: video and sentence must be non-empty");
  }
  if (clips.features.cols() != config_.dims.clip_dim || sentence.embeddings.cols() != config_.dims.word_dim) {
    throw InvalidInput("encode: feature widths " + std::to_string(clips.features.cols()) + "/" +
                       std::to_string(sentence.embeddings.cols()) + " do not match model dims " +
                       std::to_string(config_.dims.clip_dim) + "/" + std::to_string(config_.dims.word_dim));
  }
  Encoded e;
  e.video = encode_video(tape, clips, params_.video_encoder);
  e.sentence = encode_sentence(tape, sentence, params_.sentence_encoder);
  if (uses_graph(config_.variant)) {
    e.interaction = interact(e.sentence, e.video, params_.interaction, config_.fuse_activation);
    e.graph = graph_stack(e.interaction->fused, config_.graph_config(), params_.graph);
    e.clip_features = e.graph->features;
  } else {
    Var ones = tape.constant(Tensor(clips.length(), 1, 1.0));
    Var sentence_mean = ops::matmul(ones, ops::mean_rows(e.sentence));
    e.clip_features = ops::concat_cols(e.video, sentence_mean);
  }
  return e;
}

namespace {

Var classifier_logits(Var features, const ClassifierParams& p) {
  Tape& t = *features.tape();
  return ops::add_row(ops::matmul(features, t.param(p.weight)), t.param(p.bias));
}

}  // namespace

Var Model::loss(Tape& tape, const ClipSequence& clips, const TokenizedSentence& sentence, const AnnotationMatrix& truth,
                bool teacher_forcing) const {
  if (truth.clip_count() != clips.length()) {
    throw InvalidInput("loss: annotation covers " + std::to_string(truth.clip_count()) + " clips, video has " +
                       std::to_string(clips.length()));
  }
  Encoded e = encode(tape, clips, sentence);
  if (!uses_pointer(config_.variant)) {
    std::vector<std::uint8_t> membership(clips.length(), 0);
    for (std::size_t t : truth.indices()) {
      membership[t] = 1;
    }
    return ops::bce_with_logits(classifier_logits(e.clip_features, params_.classifier), membership);
  }
  PointerSlots slots = prepare_slots(e.clip_features, params_.pointer);
  const auto targets = pointer_targets(truth);
  auto steps = supervised_steps(slots, e.sentence, params_.pointer, targets, config_.variant != Variant::no_mask,
                                teacher_forcing);
  std::vector<Var> terms;
  terms.reserve(steps.size());
  for (std::size_t k = 0; k < steps.size(); ++k) {
    terms.push_back(ops::neg_log_prob(steps[k], targets[k]));
  }
  return ops::sum(terms);
}

std::vector<std::size_t> top_k_clips(std::span<const double> scores, std::size_t k) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  order.resize(std::min(k, order.size()));
  std::sort(order.begin(), order.end());
  return order;
}

Prediction Model::predict(const ClipSequence& clips, const TokenizedSentence& sentence, const PredictOptions& options) const {
  Tape tape;
  Encoded e = encode(tape, clips, sentence);
  Prediction out;
  if (e.interaction) {
    out.attention = e.interaction->attention.value();
  }
  if (e.graph) {
    out.adjacency = e.graph->adjacency.value();
  }
  if (!uses_pointer(config_.variant)) {
    Var probs = ops::sigmoid(classifier_logits(e.clip_features, params_.classifier));
    out.clip_scores.assign(probs.value().values().begin(), probs.value().values().end());
    out.selection.clips = top_k_clips(out.clip_scores, config_.dims.max_clips);
    return out;
  }
  PointerSlots slots = prepare_slots(e.clip_features, params_.pointer);
  DecodeOptions decode_options;
  decode_options.temporal_mask = config_.variant != Variant::no_mask;
  decode_options.min_one_clip = options.min_one_clip;
  out.selection = decode(slots, e.sentence, params_.pointer, config_.dims.max_clips, decode_options);
  return out;
}

void Model::round_to_storage_precision() {
  for (auto& nt : named_tensors()) {
    for (double& v : nt.tensor->values()) {
      v = static_cast<double>(static_cast<float>(v));
    }
  }
}

}  // namespace gtp
