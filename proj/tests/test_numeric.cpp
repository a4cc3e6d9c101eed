#include <gtest/gtest.h>

#include <cmath>
#include <functional>

#include "gtp/errors.hpp"
#include "gtp/grad_check.hpp"
#include "gtp/ops.hpp"
#include "support.hpp"

using namespace gtp;
using gtp::testing::random_tensor;

namespace {

// Scalar projection Σ w_ij · v_ij, so every output entry reaches the loss.
Var project(Tape& tape, Var v, const Tensor& w) {
  Var prod = ops::mul(v, tape.constant(w));
  Var left = ops::matmul(tape.constant(Tensor(1, v.rows(), 1.0)), prod);
  return ops::matmul(left, tape.constant(Tensor(v.cols(), 1, 1.0)));
}

Tensor eval(const std::function<Var(Tape&)>& f) {
  Tape tape;
  return f(tape).value();
}

void expect_near(const Tensor& got, const Tensor& want, double tol) {
  ASSERT_EQ(got.shape(), want.shape());
  for (std::size_t i = 0; i < got.size(); ++i) {
    EXPECT_NEAR(got[i], want[i], tol) << "entry " << i;
  }
}

}  // namespace

TEST(Matmul, IdentityLeavesOperandUnchanged) {
  const Tensor b{{3, 4}, {5, 6}};
  const Tensor got = eval([&](Tape& t) { return ops::matmul(t.constant(Tensor::identity(2)), t.constant(b)); });
  EXPECT_EQ(got, b);
}

TEST(Matmul, ZeroLeftOperandGivesZero) {
  Rng rng(1);
  const Tensor b = random_tensor(3, 2, rng);
  const Tensor got = eval([&](Tape& t) { return ops::matmul(t.constant(Tensor(2, 3)), t.constant(b)); });
  EXPECT_EQ(got, Tensor(2, 2));
}

TEST(Matmul, RowTimesColumn) {
  const Tensor got = eval([](Tape& t) { return ops::matmul(t.constant(Tensor{{1, 2}}), t.constant(Tensor{{3}, {4}})); });
  EXPECT_EQ(got, Tensor{{11}});
}

TEST(Matmul, RejectsMismatchedShapes) {
  Tape t;
  EXPECT_THROW(ops::matmul(t.constant(Tensor(2, 3)), t.constant(Tensor(2, 3))), InvalidInput);
}

TEST(MaskedSoftmax, AllZeroScoresAreUniform) {
  const std::vector<std::uint8_t> mask{1, 1, 1};
  const Tensor got = ops::masked_softmax_values(Tensor{{0, 0, 0}}, mask);
  expect_near(got, Tensor{{1.0 / 3, 1.0 / 3, 1.0 / 3}}, 1e-15);
}

TEST(MaskedSoftmax, SingleActiveSlotTakesEverything) {
  const std::vector<std::uint8_t> mask{0, 1};
  const Tensor got = ops::masked_softmax_values(Tensor{{5, 2}}, mask);
  EXPECT_EQ(got(0, 0), 0.0);
  EXPECT_EQ(got(0, 1), 1.0);
}

TEST(MaskedSoftmax, HandNormalizedExample) {
  const std::vector<std::uint8_t> mask{1, 1, 1};
  const Tensor got = ops::masked_softmax_values(Tensor{{std::log(2.0), 0, 0}}, mask);
  expect_near(got, Tensor{{0.5, 0.25, 0.25}}, 1e-12);
}

TEST(MaskedSoftmax, AllZeroMaskIsRejected) {
  const std::vector<std::uint8_t> mask{0, 0};
  EXPECT_THROW(ops::masked_softmax_values(Tensor{{1, 2}}, mask), InvalidInput);
  Tape t;
  EXPECT_THROW(ops::masked_softmax(t.constant(Tensor{{1, 2}}), mask), InvalidInput);
}

TEST(MaskedSoftmax, RandomInstancesAreProbabilityVectorsWithExactZeros) {
  Rng rng(7);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t len = static_cast<std::size_t>(rng.integer(1, 12));
    std::vector<std::uint8_t> mask(len);
    for (auto& m : mask) m = rng.bernoulli(0.6) ? 1 : 0;
    mask[static_cast<std::size_t>(rng.integer(0, static_cast<std::int64_t>(len) - 1))] = 1;
    const Tensor scores = random_tensor(1, len, rng, rng.uniform(0.1, 1e3));
    const Tensor p = ops::masked_softmax_values(scores, mask);
    double sum = 0.0;
    for (std::size_t i = 0; i < len; ++i) {
      EXPECT_GE(p[i], 0.0);
      if (!mask[i]) EXPECT_EQ(p[i], 0.0);
      sum += p[i];
    }
    EXPECT_NEAR(sum, 1.0, 1e-6);
  }
}

TEST(MaskedSoftmax, HugeScoresStayFinite) {
  const std::vector<std::uint8_t> mask{1, 1, 0};
  const Tensor got = ops::masked_softmax_values(Tensor{{1e5, 1e5 - 1, 1e9}}, mask);
  EXPECT_NEAR(got[0], 1.0 / (1.0 + std::exp(-1.0)), 1e-12);
  EXPECT_EQ(got[2], 0.0);
}

TEST(LayerNorm, ConstantInputNormalizesToZero) {
  const Tensor got = ops::layer_norm_values(Tensor{{4, 4, 4}}, Tensor(1, 3, 1.0), Tensor(1, 3, 0.0));
  expect_near(got, Tensor(1, 3, 0.0), 0.0);
}

TEST(LayerNorm, ZeroInputReturnsBias) {
  const Tensor bias{{0.5, -2, 3}};
  const Tensor got = ops::layer_norm_values(Tensor(1, 3), Tensor(1, 3, 1.0), bias);
  EXPECT_EQ(got, bias);
}

TEST(LayerNorm, TwoEntryExample) {
  const Tensor got = ops::layer_norm_values(Tensor{{1, 3}}, Tensor(1, 2, 1.0), Tensor(1, 2, 0.0), 1e-12);
  expect_near(got, Tensor{{-1, 1}}, 1e-9);
}

TEST(LayerNorm, TapedMatchesPlainValues) {
  Rng rng(3);
  const Tensor x = random_tensor(4, 5, rng), g = random_tensor(1, 5, rng), b = random_tensor(1, 5, rng);
  const Tensor got = eval([&](Tape& t) { return ops::layer_norm_rows(t.constant(x), t.constant(g), t.constant(b)); });
  EXPECT_EQ(got, ops::layer_norm_values(x, g, b));
}

TEST(Tape, ParamLeafIsSharedAcrossUses) {
  Tensor w{{2.0}};
  Tape t;
  Var a = t.param(w);
  Var b = t.param(w);
  EXPECT_EQ(a.id(), b.id());
  Var loss = ops::mul(a, b);  // w², gradient 2w
  t.backward(loss);
  EXPECT_DOUBLE_EQ(t.param_grad(w)(0, 0), 4.0);
}

TEST(Tape, UnusedParamHasZeroGradient) {
  Tensor w{{1.0, 2.0}};
  Tensor unused{{3.0}};
  Tape t;
  t.param(unused);
  Var loss = ops::matmul(t.param(w), t.constant(Tensor{{1}, {1}}));
  t.backward(loss);
  EXPECT_EQ(t.param_grad(unused), Tensor(1, 1));
  EXPECT_EQ(t.param_grad(Tensor{{9}}), Tensor(1, 1));
}

TEST(Tape, BackwardVisitsNodesInReverseOrder) {
  Tensor w{{0.3, -0.2}};
  Tape t;
  Var h = ops::tanh(t.param(w));
  Var s = ops::sigmoid(h);
  Var loss = ops::matmul(s, t.constant(Tensor{{1}, {1}}));
  t.backward(loss);
  const std::vector<std::string> want{"matmul", "sigmoid", "tanh"};
  std::vector<std::string> got;
  for (const auto& name : t.backward_trace()) {
    if (name == "matmul" || name == "sigmoid" || name == "tanh") got.push_back(name);
  }
  EXPECT_EQ(got, want);
}

TEST(Tape, BackwardRequiresScalarLoss) {
  Tape t;
  Var v = t.input(Tensor(2, 2, 1.0));
  EXPECT_THROW(t.backward(v), InvalidInput);
}

TEST(Tape, NonFiniteForwardNamesTheOp) {
  Tape t;
  Var v = t.input(Tensor{{1e300}});
  try {
    ops::scale(v, 1e300);
    FAIL() << "expected NumericError";
  } catch (const NumericError& e) {
    EXPECT_EQ(e.op(), "scale");
  }
}

TEST(Tape, ForwardIsBitwiseDeterministic) {
  Rng rng(11);
  const Tensor a = random_tensor(3, 4, rng), b = random_tensor(4, 2, rng);
  auto f = [&](Tape& t) { return ops::softmax_rows(ops::tanh(ops::matmul(t.constant(a), t.constant(b)))); };
  EXPECT_EQ(eval(f), eval(f));
}

TEST(GradCheck, LinearModelIsExact) {
  Tensor w{{0.5, -1.5, 2.0}};
  const Tensor x{{1.0}, {2.0}, {-3.0}};
  const LossBuilder loss = [&](Tape& t) {
    Var r = ops::sub(ops::matmul(t.param(w), t.constant(x)), t.constant(Tensor{{0.25}}));
    return ops::mul(r, r);
  };
  const GradCheckReport rep = grad_check({{"w", &w}}, loss);
  ASSERT_TRUE(rep.passed);
  EXPECT_LE(rep.tensors[0].max_rel_error, 1e-8);
  EXPECT_EQ(w, (Tensor{{0.5, -1.5, 2.0}}));  // restored
}

TEST(GradCheck, CorruptedBackwardIsFlagged) {
  Tensor good{{0.4, 0.7}};
  Tensor bad{{-0.3, 0.9}};
  const LossBuilder loss = [&](Tape& t) {
    Var b = t.param(bad);
    const std::size_t ib = b.id();
    // b² with a gradient rule that forgets the factor 2.
    Tensor sq = b.value();
    for (double& v : sq.values()) v *= v;
    Var wrong = t.record("square_wrong", sq, {ib}, [ib](Tape& tp, std::size_t self) {
      const Tensor& g = tp.grad(self);
      Tensor& gb = tp.grad_mut(ib);
      for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * tp.value(ib)[i];
    });
    Var sum = ops::add(ops::tanh(t.param(good)), wrong);
    return ops::matmul(sum, t.constant(Tensor{{1}, {1}}));
  };
  const GradCheckReport rep = grad_check({{"good", &good}, {"bad", &bad}}, loss);
  EXPECT_FALSE(rep.passed);
  EXPECT_TRUE(rep.find("good")->passed);
  EXPECT_FALSE(rep.find("bad")->passed);
}

TEST(GradCheck, NonFiniteLossReportsTheOp) {
  Tensor w{{1.0}};
  const LossBuilder loss = [&](Tape& t) { return ops::scale(ops::scale(t.param(w), 1e200), 1e200); };
  const GradCheckReport rep = grad_check({{"w", &w}}, loss);
  EXPECT_FALSE(rep.passed);
  EXPECT_NE(rep.failure.find("scale"), std::string::npos);
}

TEST(GradCheck, RelativeErrorUsesFloor) {
  EXPECT_DOUBLE_EQ(relative_error(1.0, 1.0), 0.0);
  EXPECT_DOUBLE_EQ(relative_error(2.0, 1.0), 0.5);
  EXPECT_DOUBLE_EQ(relative_error(0.0, 1e-10), 1e-10 / 1e-8);
}

TEST(GradCheck, RiddersRecoversSmoothDerivative) {
  double err = 0.0;
  const double d = ridders_derivative([](double x) { return std::sin(x) * std::exp(x); }, 0.7, 0.1, &err);
  EXPECT_NEAR(d, std::exp(0.7) * (std::sin(0.7) + std::cos(0.7)), 1e-11);
}

// Every primitive's backward rule against central differences.
class PrimitiveGradient : public ::testing::TestWithParam<const char*> {};

TEST_P(PrimitiveGradient, MatchesFiniteDifferences) {
  const std::string op = GetParam();
  Rng rng(Rng::derive(42, std::hash<std::string>{}(op)));
  Tensor a = random_tensor(3, 4, rng);
  Tensor b = random_tensor(3, 4, rng);
  Tensor c = random_tensor(4, 2, rng);
  Tensor r = random_tensor(1, 4, rng);
  Tensor w = random_tensor(4, 1, rng);
  Tensor gain = random_tensor(1, 4, rng);
  const Tensor proj = random_tensor(3, 4, rng);
  const Tensor square = random_tensor(3, 3, rng);
  const Tensor tall = random_tensor(4, 4, rng);
  const std::vector<std::uint8_t> mask{0, 1, 1, 0};

  const LossBuilder loss = [&](Tape& t) -> Var {
    Var va = t.param(a), vb = t.param(b);
    if (op == "matmul") {
      Var m = ops::matmul(va, t.param(c));
      return project(t, m, Tensor(3, 2, 0.7));
    }
    if (op == "transpose") return project(t, ops::transpose(va), proj.transposed());
    if (op == "add") return project(t, ops::add(va, vb), proj);
    if (op == "sub") return project(t, ops::sub(va, vb), proj);
    if (op == "mul") return project(t, ops::mul(va, vb), proj);
    if (op == "scale") return project(t, ops::scale(va, -1.7), proj);
    if (op == "add_row") return project(t, ops::add_row(va, t.param(r)), proj);
    if (op == "sigmoid") return project(t, ops::sigmoid(va), proj);
    if (op == "tanh") return project(t, ops::tanh(va), proj);
    if (op == "relu") return project(t, ops::relu(ops::add(va, t.constant(Tensor(3, 4, 0.05)))), proj);
    if (op == "row") return project(t, ops::row(va, 1), Tensor(1, 4, 1.3));
    if (op == "concat_rows") {
      const Var parts[] = {va, t.param(r)};
      return project(t, ops::concat_rows(parts), tall);
    }
    if (op == "concat_cols") return project(t, ops::concat_cols(va, vb), Tensor(3, 8, 0.3));
    if (op == "mean_rows") return project(t, ops::mean_rows(va), Tensor{{1, -2, 3, 0.5}});
    if (op == "softmax_rows") return project(t, ops::softmax_rows(ops::scale(va, 3.0)), proj);
    if (op == "masked_softmax") return project(t, ops::masked_softmax(t.param(r), mask), Tensor{{1, 2, -3, 4}});
    if (op == "layer_norm") return project(t, ops::layer_norm_rows(va, t.param(gain), t.param(r)), proj);
    if (op == "additive_scores") return project(t, ops::additive_scores(va, vb, t.param(w)), square);
    if (op == "neg_log_prob") return ops::neg_log_prob(ops::softmax_rows(t.param(r)), 2);
    if (op == "bce_with_logits") {
      const std::vector<std::uint8_t> targets{1, 0, 1, 1};
      return ops::bce_with_logits(t.param(w), targets);
    }
    throw std::logic_error("unknown op " + op);
  };
  const GradCheckReport rep =
      grad_check({{"a", &a}, {"b", &b}, {"c", &c}, {"r", &r}, {"w", &w}, {"gain", &gain}}, loss);
  for (const auto& e : rep.tensors) {
    EXPECT_TRUE(e.passed) << op << " tensor " << e.name << " rel " << e.max_rel_error;
  }
  EXPECT_TRUE(rep.failure.empty()) << rep.failure;
}

INSTANTIATE_TEST_SUITE_P(Ops, PrimitiveGradient,
                         ::testing::Values("matmul", "transpose", "add", "sub", "mul", "scale", "add_row", "sigmoid",
                                           "tanh", "relu", "row", "concat_rows", "concat_cols", "mean_rows",
                                           "softmax_rows", "masked_softmax", "layer_norm", "additive_scores",
                                           "neg_log_prob", "bce_with_logits"));
