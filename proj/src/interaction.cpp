#include "gtp/interaction.hpp"

#include "gtp/errors.hpp"

namespace gtp {

Var activate(Var x, Activation act) { return act == Activation::relu ? ops::relu(x) : ops::tanh(x); }

Var word_clip_attention(Var sentence_enc, Var video_enc, const InteractionParams& p) {
  if (sentence_enc.cols() != video_enc.cols()) {
    throw InvalidInput("word_clip_attention: sentence width " + std::to_string(sentence_enc.cols()) +
                       " != video width " + std::to_string(video_enc.cols()));
  }
  Tape& t = *video_enc.tape();
  Var words = ops::matmul(sentence_enc, t.param(p.word_proj));
  Var clips = ops::add_row(ops::matmul(video_enc, t.param(p.clip_proj)), t.param(p.score_bias));
  return ops::softmax_rows(ops::additive_scores(clips, words, t.param(p.score)));
}

Var clip_specific_sentence(Var attention, Var sentence_enc) { return ops::matmul(attention, sentence_enc); }

Var fuse(Var video_enc, Var clip_sentence, const InteractionParams& p, Activation act) {
  Tape& t = *video_enc.tape();
  Var joined = ops::concat_cols(video_enc, clip_sentence);
  return activate(ops::add_row(ops::matmul(joined, t.param(p.fuse_weight)), t.param(p.fuse_bias)), act);
}

InteractionOutput interact(Var sentence_enc, Var video_enc, const InteractionParams& p, Activation act) {
  InteractionOutput out;
  out.attention = word_clip_attention(sentence_enc, video_enc, p);
  out.clip_sentence = clip_specific_sentence(out.attention, sentence_enc);
  out.fused = fuse(video_enc, out.clip_sentence, p, act);
  return out;
}

}  // namespace gtp
