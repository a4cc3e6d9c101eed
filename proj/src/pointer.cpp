#include "gtp/pointer.hpp"

#include <algorithm>

#include "gtp/encoders.hpp"
#include "gtp/errors.hpp"

namespace gtp {

Var aggregate(Var clip_features, const PointerParams& p) {
  if (clip_features.rows() == 0) {
    throw InvalidInput("aggregate: no clips");
  }
  Tape& t = *clip_features.tape();
  Var rows = p.aggregate.forward.w_z.empty() ? clip_features : encode_sequence(clip_features, p.aggregate);
  Var pad = t.constant(Tensor(1, rows.cols()));
  const Var parts[] = {rows, pad};
  return ops::concat_rows(parts);
}

PointerSlots prepare_slots(Var clip_features, const PointerParams& p) {
  PointerSlots s;
  s.clip_count = clip_features.rows();
  s.features = aggregate(clip_features, p);
  if (s.features.cols() != p.feature_proj.rows()) {
    throw InvalidInput("prepare_slots: slot width " + std::to_string(s.features.cols()) +
                       " does not match pointer projection " + p.feature_proj.shape_string());
  }
  s.keys = ops::matmul(s.features, s.features.tape()->param(p.feature_proj));
  return s;
}

Var init_state(Var sentence_enc, const PointerParams& p) {
  if (sentence_enc.rows() == 0) {
    throw InvalidInput("init_state: empty sentence");
  }
  return ops::matmul(ops::mean_rows(sentence_enc), sentence_enc.tape()->param(p.init_proj));
}

std::vector<std::uint8_t> slot_mask(std::size_t slot_count, std::optional<std::size_t> previous, bool temporal_mask) {
  std::vector<std::uint8_t> mask(slot_count, 1);
  if (temporal_mask && previous) {
    for (std::size_t i = 0; i <= *previous && i < slot_count; ++i) {
      mask[i] = 0;
    }
  }
  return mask;
}

std::size_t argmax_first(std::span<const double> values) {
  if (values.empty()) {
    throw InvalidInput("argmax over an empty vector");
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) {
      best = i;
    }
  }
  return best;
}

StepResult decode_step(const PointerSlots& slots, const DecodeState& state, const PointerParams& p, bool temporal_mask) {
  Tape& t = *slots.features.tape();
  if (state.previous && *state.previous >= slots.end_slot()) {
    throw InvalidInput("decode_step: decoding continued past the end slot");
  }
  Var query = ops::add_row(ops::matmul(state.hidden, t.param(p.state_proj)), t.param(p.score_bias));
  Var scores = ops::additive_scores(query, slots.keys, t.param(p.score));
  const auto mask = slot_mask(slots.clip_count + 1, state.previous, temporal_mask);
  StepResult r;
  r.probs = ops::masked_softmax(scores, mask);
  r.pointer = argmax_first(r.probs.value().values());
  r.hidden = gru_cell(ops::matmul(r.probs, slots.features), state.hidden, p.decoder);
  return r;
}

PointerSelection decode(const PointerSlots& slots, Var sentence_enc, const PointerParams& p, std::size_t max_clips,
                        const DecodeOptions& options) {
  if (max_clips < 1) {
    throw InvalidInput("decode: max_clips must be at least 1");
  }
  PointerSelection sel;
  DecodeState state;
  state.hidden = init_state(sentence_enc, p);
  std::size_t emitted = 0;
  for (;;) {
    StepResult r = decode_step(slots, state, p, options.temporal_mask);
    auto probs = r.probs.value().values();
    sel.steps.emplace_back(probs.begin(), probs.end());
    if (emitted == max_clips) {
      // Forced final step: recorded, not acted on.
      break;
    }
    std::size_t pointer = r.pointer;
    if (options.min_one_clip && state.step == 0 && pointer == slots.end_slot()) {
      pointer = argmax_first(probs.first(slots.clip_count));
    }
    sel.raw_pointers.push_back(pointer);
    if (pointer == slots.end_slot()) {
      sel.terminated = true;
      break;
    }
    ++emitted;
    state.step += 1;
    state.previous = pointer;
    state.hidden = r.hidden;
  }
  for (std::size_t ptr : sel.raw_pointers) {
    if (ptr != slots.end_slot()) {
      sel.clips.push_back(ptr);
    }
  }
  if (!options.temporal_mask) {
    // Without the constraint, repeats are dropped and the rest put in
    // temporal order.
    std::sort(sel.clips.begin(), sel.clips.end());
    sel.clips.erase(std::unique(sel.clips.begin(), sel.clips.end()), sel.clips.end());
  }
  return sel;
}

std::vector<Var> supervised_steps(const PointerSlots& slots, Var sentence_enc, const PointerParams& p,
                                  std::span<const std::size_t> targets, bool temporal_mask, bool teacher_forcing) {
  std::vector<Var> out;
  out.reserve(targets.size());
  DecodeState state;
  state.hidden = init_state(sentence_enc, p);
  for (std::size_t k = 0; k < targets.size(); ++k) {
    if (targets[k] > slots.end_slot()) {
      throw InvalidInput("supervised_steps: target " + std::to_string(targets[k]) + " beyond end slot " +
                         std::to_string(slots.end_slot()));
    }
    StepResult r = decode_step(slots, state, p, temporal_mask);
    out.push_back(r.probs);
    if (k + 1 == targets.size()) {
      break;
    }
    if (targets[k] == slots.end_slot()) {
      throw InvalidInput("supervised_steps: end slot target before the last step");
    }
    // A free-running prediction of the end slot cannot condition a further
    // step; the ground truth stands in for it.
    const std::size_t previous = teacher_forcing || r.pointer == slots.end_slot() ? targets[k] : r.pointer;
    state.step += 1;
    state.previous = previous;
    state.hidden = r.hidden;
  }
  return out;
}

}  // namespace gtp
