#pragma once

#include <vector>

#include "gtp/interaction.hpp"
#include "gtp/ops.hpp"
#include "gtp/params.hpp"

namespace gtp {

struct GraphConfig {
  std::size_t layer_count = 2;
  double lambda = 150.0;
  Activation activation = Activation::relu;
  double ln_eps = 1e-5;
  /// Rebuild the adjacency from each layer's input instead of sharing the
  /// one built from the interaction features.
  bool per_layer_adjacency = false;

  void validate() const;
};

struct GraphOutput {
  Var affinity;   // F, T × T
  Var adjacency;  // G, T × T, row-stochastic
  Var features;   // H_G, T × d_f
};

/// F = H Hᵀ.
Var affinity(Var features);

/// Row-wise softmax of λF.
Var adjacency(Var affinity, double lambda);

/// act(LayerNorm((G + I) X W)).
Var graph_conv_layer(Var adjacency, Var x, const GraphLayerParams& layer, Activation act = Activation::relu,
                     double ln_eps = 1e-5);

GraphOutput graph_stack(Var interaction_features, const GraphConfig& config, const std::vector<GraphLayerParams>& layers);

}  // namespace gtp
