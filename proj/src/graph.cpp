#include "gtp/graph.hpp"

#include "gtp/errors.hpp"

namespace gtp {

void GraphConfig::validate() const {
  if (layer_count < 1) {
    throw InvalidInput("graph: layer_count must be at least 1");
  }
  if (!(lambda >= 0.0)) {
    throw InvalidInput("graph: lambda must be non-negative");
  }
  if (!(ln_eps > 0.0)) {
    throw InvalidInput("graph: layer-norm eps must be positive");
  }
}

Var affinity(Var features) { return ops::matmul(features, ops::transpose(features)); }

Var adjacency(Var affinity, double lambda) {
  if (!(lambda >= 0.0)) {
    throw InvalidInput("adjacency: lambda must be non-negative");
  }
  return ops::softmax_rows(ops::scale(affinity, lambda));
}

Var graph_conv_layer(Var adjacency, Var x, const GraphLayerParams& layer, Activation act, double ln_eps) {
  if (adjacency.rows() != x.rows() || adjacency.cols() != x.rows()) {
    throw InvalidInput("graph_conv_layer: adjacency " + adjacency.value().shape_string() + " vs features " +
                       x.value().shape_string());
  }
  if (layer.weight.rows() != x.cols() || layer.weight.cols() != x.cols()) {
    throw InvalidInput("graph_conv_layer: weight " + layer.weight.shape_string() + " is not square in the feature width " +
                       std::to_string(x.cols()));
  }
  Tape& t = *x.tape();
  Var mixed = ops::add(ops::matmul(adjacency, x), x);
  Var z = ops::matmul(mixed, t.param(layer.weight));
  return activate(ops::layer_norm_rows(z, t.param(layer.ln_gain), t.param(layer.ln_bias), ln_eps), act);
}

GraphOutput graph_stack(Var interaction_features, const GraphConfig& config, const std::vector<GraphLayerParams>& layers) {
  config.validate();
  if (layers.size() != config.layer_count) {
    throw InvalidInput("graph_stack: " + std::to_string(layers.size()) + " layer parameter sets for " +
                       std::to_string(config.layer_count) + " layers");
  }
  GraphOutput out;
  out.affinity = affinity(interaction_features);
  out.adjacency = adjacency(out.affinity, config.lambda);
  Var x = interaction_features;
  Var g = out.adjacency;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    if (config.per_layer_adjacency && i > 0) {
      g = adjacency(affinity(x), config.lambda);
    }
    x = graph_conv_layer(g, x, layers[i], config.activation, config.ln_eps);
  }
  out.features = x;
  return out;
}

}  // namespace gtp
