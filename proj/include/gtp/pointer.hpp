#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "gtp/ops.hpp"
#include "gtp/params.hpp"

namespace gtp {

/// Slot features for the pointer: T clip rows followed by the all-zero end
/// slot at index T.
struct PointerSlots {
  Var features;  // (T+1) × d_p
  Var keys;      // (T+1) × A, features projected by W_g
  std::size_t clip_count = 0;

  std::size_t end_slot() const noexcept { return clip_count; }
};

struct DecodeState {
  std::size_t step = 0;                  // 0-based decoding step
  std::optional<std::size_t> previous;   // pointer emitted at the previous step
  Var hidden;                            // 1 × H_P
};

struct StepResult {
  Var probs;            // 1 × (T+1)
  std::size_t pointer;  // argmax, ties toward the smallest index
  Var hidden;           // decoder state after consuming the attended context
};

/// Per-step probability vector over the T clips plus the end slot.
using StepDistribution = std::vector<double>;

struct PointerSelection {
  std::vector<std::size_t> clips;              // strictly increasing, each < T
  std::vector<StepDistribution> steps;
  bool terminated = false;                     // the end slot was chosen
  std::vector<std::size_t> raw_pointers;       // every emitted pointer, end slot included
};

struct DecodeOptions {
  bool temporal_mask = true;
  /// Never let the first step stop decoding.
  bool min_one_clip = false;
};

/// BiGRU over the clip rows (skipped when the pointer is configured to read
/// raw graph features), then one all-zero end row.
Var aggregate(Var clip_features, const PointerParams& p);

PointerSlots prepare_slots(Var clip_features, const PointerParams& p);

/// Average of the encoded words projected to the decoder width.
Var init_state(Var sentence_enc, const PointerParams& p);

/// 1 for slots strictly after `previous`, everything at step 0 or without the
/// temporal constraint.
std::vector<std::uint8_t> slot_mask(std::size_t slot_count, std::optional<std::size_t> previous, bool temporal_mask);

/// Index of the largest entry; ties resolve to the smallest index.
std::size_t argmax_first(std::span<const double> values);

StepResult decode_step(const PointerSlots& slots, const DecodeState& state, const PointerParams& p,
                       bool temporal_mask = true);

/// Greedy decoding. Stops on the end slot or after `max_clips` clip pointers,
/// in which case one final step is still run and recorded.
PointerSelection decode(const PointerSlots& slots, Var sentence_enc, const PointerParams& p, std::size_t max_clips,
                        const DecodeOptions& options = {});

/// Step distributions for a known target sequence. With teacher forcing the
/// mask at step k follows target k-1; otherwise it follows the model's own
/// previous argmax.
std::vector<Var> supervised_steps(const PointerSlots& slots, Var sentence_enc, const PointerParams& p,
                                  std::span<const std::size_t> targets, bool temporal_mask, bool teacher_forcing);

}  // namespace gtp
