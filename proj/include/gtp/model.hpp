#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gtp/annotation.hpp"
#include "gtp/encoders.hpp"
#include "gtp/graph.hpp"
#include "gtp/interaction.hpp"
#include "gtp/pointer.hpp"

namespace gtp {

/// FULL is the complete model. The others drop the graph network, replace
/// the pointer by a per-clip classifier, or remove the temporal mask from
/// the pointer.
enum class Variant : std::uint32_t { full = 0, no_graph = 1, no_pointer = 2, no_mask = 3 };

std::string_view variant_name(Variant v);
Variant parse_variant(std::string_view name);

struct ModelDims {
  std::size_t clip_dim = 500;
  std::size_t word_dim = 300;
  std::size_t hidden = 256;
  std::size_t fused = 256;
  std::size_t pointer_hidden = 256;
  std::size_t graph_layers = 2;
  std::size_t max_clips = 5;

  bool operator==(const ModelDims&) const = default;
};

struct ModelConfig {
  ModelDims dims;
  Variant variant = Variant::full;
  double lambda = 150.0;
  Activation fuse_activation = Activation::relu;
  Activation graph_activation = Activation::relu;
  bool per_layer_adjacency = false;
  /// Score pointer slots on graph features directly, without the
  /// aggregating BiGRU.
  bool raw_pointer_features = false;
  double ln_eps = 1e-5;

  GraphConfig graph_config() const;
  void validate() const;
};

struct ModelParams {
  BiGruParams video_encoder;
  BiGruParams sentence_encoder;
  InteractionParams interaction;
  std::vector<GraphLayerParams> graph;
  PointerParams pointer;
  ClassifierParams classifier;
};

/// Everything the forward pass produces before the selection head.
struct Encoded {
  Var video;                                 // T × 2H
  Var sentence;                              // N × 2H
  std::optional<InteractionOutput> interaction;
  std::optional<GraphOutput> graph;
  Var clip_features;                         // input to the pointer or classifier
};

struct Prediction {
  PointerSelection selection;
  Tensor attention;               // T × N (empty for no_graph)
  Tensor adjacency;               // T × T (empty for no_graph)
  std::vector<double> clip_scores;  // classifier probabilities (no_pointer only)
};

struct PredictOptions {
  bool min_one_clip = false;
};

class Model {
 public:
  /// Wires the variant and draws its parameters from `seed`.
  static Model build(const ModelConfig& config, std::uint64_t seed);

  /// A model with the given parameter values; shapes must match the config.
  static Model from_params(const ModelConfig& config, ModelParams params);

  const ModelConfig& config() const noexcept { return config_; }
  const ModelParams& params() const noexcept { return params_; }
  ModelParams& params() noexcept { return params_; }

  /// Every parameter tensor in the fixed serialization order.
  std::vector<NamedTensor> named_tensors();
  std::size_t parameter_count();

  Encoded encode(Tape& tape, const ClipSequence& clips, const TokenizedSentence& sentence) const;

  /// Training loss for one sample with ground-truth thumbnail `truth`.
  Var loss(Tape& tape, const ClipSequence& clips, const TokenizedSentence& sentence, const AnnotationMatrix& truth,
           bool teacher_forcing = true) const;

  Prediction predict(const ClipSequence& clips, const TokenizedSentence& sentence, const PredictOptions& options = {}) const;

  /// Rounds every parameter to the nearest 32-bit float, the checkpoint
  /// storage precision.
  void round_to_storage_precision();

 private:
  Model(ModelConfig config, ModelParams params) : config_(std::move(config)), params_(std::move(params)) {}

  ModelConfig config_;
  ModelParams params_;
};

/// Top-k clip indices by score (ties toward the smaller index), returned in
/// ascending clip order.
std::vector<std::size_t> top_k_clips(std::span<const double> scores, std::size_t k);

}  // namespace gtp
