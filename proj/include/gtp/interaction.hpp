#pragma once

#include "gtp/ops.hpp"
#include "gtp/params.hpp"

namespace gtp {

enum class Activation { relu, tanh };

Var activate(Var x, Activation act);

struct InteractionOutput {
  Var attention;          // T × N, rows are probability vectors
  Var clip_sentence;      // T × 2H
  Var fused;              // T × d_f
};

/// β[t][n] = wᵀ tanh(W_s u_n + W_v u_t + b), softmax over n.
Var word_clip_attention(Var sentence_enc, Var video_enc, const InteractionParams& p);

/// Row t is Σ_n A[t][n] · U_S[n].
Var clip_specific_sentence(Var attention, Var sentence_enc);

/// σ(W_f [u_t ‖ c_t] + b_f) per clip.
Var fuse(Var video_enc, Var clip_sentence, const InteractionParams& p, Activation act = Activation::relu);

InteractionOutput interact(Var sentence_enc, Var video_enc, const InteractionParams& p, Activation act = Activation::relu);

}  // namespace gtp
