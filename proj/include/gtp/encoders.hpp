#pragma once

#include <string>
#include <vector>

#include "gtp/ops.hpp"
#include "gtp/params.hpp"

namespace gtp {

/// Per-clip features, one row per (default 2-second) clip.
struct ClipSequence {
  Tensor features;  // T × d_v
  std::size_t length() const noexcept { return features.rows(); }
};

struct TokenizedSentence {
  std::vector<std::string> tokens;  // display only
  Tensor embeddings;                // N × d_w
  std::size_t length() const noexcept { return embeddings.rows(); }
};

/// One gated recurrent step (update gate z, reset gate r, candidate n):
///   z = σ(x W_z + h U_z + b_z), r = σ(x W_r + h U_r + b_r)
///   n = tanh(x W_n + (r ⊙ h) U_n + b_n), h' = (1 - z) ⊙ h + z ⊙ n
/// x is 1×in_dim, h is 1×H.
Var gru_cell(Var x, Var h, const GruDirection& p);

/// Runs both directions over the rows of `inputs` (L × in_dim) from zero
/// initial states. Row t of the result is [forward_t ‖ backward_t], L × 2H.
Var encode_sequence(Var inputs, const BiGruParams& p);

Var encode_video(Tape& tape, const ClipSequence& clips, const BiGruParams& p);
Var encode_sentence(Tape& tape, const TokenizedSentence& sentence, const BiGruParams& p);

}  // namespace gtp
