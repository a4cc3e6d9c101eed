#include "gtp/encoders.hpp"

#include "gtp/errors.hpp"

namespace gtp {
namespace {

// Input-side gate pre-activations for the whole sequence.
struct InputGates {
  Var z, r, n;
};

InputGates project_inputs(Var x, const GruDirection& p) {
  Tape& t = *x.tape();
  return {ops::add_row(ops::matmul(x, t.param(p.w_z)), t.param(p.b_z)),
          ops::add_row(ops::matmul(x, t.param(p.w_r)), t.param(p.b_r)),
          ops::add_row(ops::matmul(x, t.param(p.w_n)), t.param(p.b_n))};
}

Var recurrent_step(Var xz, Var xr, Var xn, Var h, const GruDirection& p) {
  Tape& t = *h.tape();
  Var z = ops::sigmoid(ops::add(xz, ops::matmul(h, t.param(p.u_z))));
  Var r = ops::sigmoid(ops::add(xr, ops::matmul(h, t.param(p.u_r))));
  Var n = ops::tanh(ops::add(xn, ops::matmul(ops::mul(r, h), t.param(p.u_n))));
  return ops::add(h, ops::mul(z, ops::sub(n, h)));
}

Var run_direction(Var inputs, const GruDirection& p, bool reverse) {
  Tape& t = *inputs.tape();
  const std::size_t length = inputs.rows();
  InputGates g = project_inputs(inputs, p);
  Var h = t.constant(Tensor(1, p.hidden()));
  std::vector<Var> states(length);
  for (std::size_t step = 0; step < length; ++step) {
    const std::size_t i = reverse ? length - 1 - step : step;
    h = recurrent_step(ops::row(g.z, i), ops::row(g.r, i), ops::row(g.n, i), h, p);
    states[i] = h;
  }
  return ops::concat_rows(states);
}

}  // namespace

Var gru_cell(Var x, Var h, const GruDirection& p) {
  if (x.rows() != 1 || x.cols() != p.input_dim() || h.rows() != 1 || h.cols() != p.hidden()) {
    throw InvalidInput("gru_cell: x " + x.value().shape_string() + ", h " + h.value().shape_string() +
                       " do not match parameters (in " + std::to_string(p.input_dim()) + ", hidden " +
                       std::to_string(p.hidden()) + ")");
  }
  InputGates g = project_inputs(x, p);
  return recurrent_step(g.z, g.r, g.n, h, p);
}

Var encode_sequence(Var inputs, const BiGruParams& p) {
  if (inputs.rows() == 0) {
    throw InvalidInput("encode_sequence: empty sequence");
  }
  if (inputs.cols() != p.forward.input_dim() || inputs.cols() != p.backward.input_dim()) {
    throw InvalidInput("encode_sequence: input width " + std::to_string(inputs.cols()) + " does not match GRU input " +
                       std::to_string(p.forward.input_dim()));
  }
  if (p.forward.hidden() != p.backward.hidden()) {
    throw InvalidInput("encode_sequence: directions disagree on hidden size");
  }
  return ops::concat_cols(run_direction(inputs, p.forward, false), run_direction(inputs, p.backward, true));
}

Var encode_video(Tape& tape, const ClipSequence& clips, const BiGruParams& p) {
  return encode_sequence(tape.constant(clips.features), p);
}

Var encode_sentence(Tape& tape, const TokenizedSentence& sentence, const BiGruParams& p) {
  return encode_sequence(tape.constant(sentence.embeddings), p);
}

}  // namespace gtp
