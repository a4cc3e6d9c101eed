#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "gtp/grad_check.hpp"
#include "gtp/random.hpp"
#include "gtp/tensor.hpp"

namespace gtp {

/// One direction of a gated recurrent unit.
/// Input weights are in_dim×H, recurrent weights H×H, biases 1×H.
struct GruDirection {
  Tensor w_z, w_r, w_n;
  Tensor u_z, u_r, u_n;
  Tensor b_z, b_r, b_n;

  static GruDirection zeros(std::size_t input_dim, std::size_t hidden);
  static GruDirection random(std::size_t input_dim, std::size_t hidden, Rng& rng);

  std::size_t input_dim() const noexcept { return w_z.rows(); }
  std::size_t hidden() const noexcept { return u_z.rows(); }

  void collect(const std::string& prefix, std::vector<NamedTensor>& out);
};

struct BiGruParams {
  GruDirection forward;
  GruDirection backward;

  static BiGruParams zeros(std::size_t input_dim, std::size_t hidden);
  static BiGruParams random(std::size_t input_dim, std::size_t hidden, Rng& rng);

  std::size_t hidden() const noexcept { return forward.hidden(); }
  void collect(const std::string& prefix, std::vector<NamedTensor>& out);
};

/// Word-by-clip attention and fusion weights.
struct InteractionParams {
  Tensor word_proj;   // 2H × A
  Tensor clip_proj;   // 2H × A
  Tensor score_bias;  // 1 × A
  Tensor score;       // A × 1
  Tensor fuse_weight; // 4H × d_f
  Tensor fuse_bias;   // 1 × d_f

  static InteractionParams random(std::size_t encoded_dim, std::size_t attention_dim, std::size_t fused_dim, Rng& rng);
  void collect(const std::string& prefix, std::vector<NamedTensor>& out);
};

struct GraphLayerParams {
  Tensor weight;   // d × d
  Tensor ln_gain;  // 1 × d
  Tensor ln_bias;  // 1 × d

  static GraphLayerParams random(std::size_t dim, Rng& rng);
  void collect(const std::string& prefix, std::vector<NamedTensor>& out);
};

struct PointerParams {
  BiGruParams aggregate;  // over per-clip features, hidden H
  Tensor score;           // A × 1
  Tensor feature_proj;    // d_p × A
  Tensor state_proj;      // H_P × A
  Tensor score_bias;      // 1 × A
  GruDirection decoder;   // input d_p, hidden H_P
  Tensor init_proj;       // 2H × H_P

  static PointerParams random(std::size_t clip_feature_dim, std::size_t hidden, std::size_t encoded_sentence_dim,
                              std::size_t pointer_hidden, bool aggregate_features, Rng& rng);
  void collect(const std::string& prefix, std::vector<NamedTensor>& out);
};

/// Per-clip selection classifier used when the pointer network is dropped.
struct ClassifierParams {
  Tensor weight;  // d_f × 1
  Tensor bias;    // 1 × 1

  static ClassifierParams random(std::size_t dim, Rng& rng);
  void collect(const std::string& prefix, std::vector<NamedTensor>& out);
};

/// Uniform(-scale, scale) matrix.
Tensor random_uniform(std::size_t rows, std::size_t cols, double scale, Rng& rng);

}  // namespace gtp
