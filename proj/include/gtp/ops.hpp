#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "gtp/tape.hpp"

namespace gtp::ops {

// Each op records its forward value and gradient rule on the operands' tape.
// All shape checks throw InvalidInput.

Var matmul(Var a, Var b);
Var transpose(Var a);
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var scale(Var a, double s);
/// Adds a 1×cols row to every row of `a`.
Var add_row(Var a, Var row);

Var sigmoid(Var a);
Var tanh(Var a);
Var relu(Var a);

/// Row `r` of `a` as a 1×cols value.
Var row(Var a, std::size_t r);
Var concat_rows(std::span<const Var> parts);
Var concat_cols(std::span<const Var> parts);
Var concat_cols(Var a, Var b);
/// Mean over rows, 1×cols.
Var mean_rows(Var a);
Var sum(std::span<const Var> scalars);

/// Row-wise softmax with max subtraction.
Var softmax_rows(Var scores);

/// Softmax of a 1×L row restricted to entries with mask[i] != 0. Masked
/// entries come out exactly zero. Throws InvalidInput on an all-zero mask.
Var masked_softmax(Var scores, std::span<const std::uint8_t> mask);

/// Per-row layer normalization: (x - mean) / sqrt(var + eps) * gain + bias.
Var layer_norm_rows(Var x, Var gain, Var bias, double eps = 1e-5);

/// Additive attention scores: out[t][n] = sum_a w[a] * tanh(q[t][a] + k[n][a]).
/// q: T×A, k: N×A, w: A×1. Result T×N.
Var additive_scores(Var q, Var k, Var w);

/// -log(max(p[0][index], floor)) for a 1×L probability row.
Var neg_log_prob(Var probs, std::size_t index, double floor = 1e-12);

/// Mean binary cross-entropy of T×1 logits against 0/1 targets.
Var bce_with_logits(Var logits, std::span<const std::uint8_t> targets);

/// Plain (untaped) versions of the normalizers, shared with non-training code.
Tensor masked_softmax_values(const Tensor& scores, std::span<const std::uint8_t> mask);
Tensor layer_norm_values(const Tensor& x, const Tensor& gain, const Tensor& bias, double eps = 1e-5);

}  // namespace gtp::ops
