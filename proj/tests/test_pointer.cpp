#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "gtp/errors.hpp"
#include "gtp/model.hpp"
#include "gtp/pointer.hpp"
#include "support.hpp"

using namespace gtp;
using gtp::testing::bigru_ref;
using gtp::testing::random_tensor;

namespace {

// Pointer reading 1-wide raw slot features, with a state-independent score
// tanh(f_t), so the chain of masked argmaxes is fixed by the features alone.
PointerParams state_blind_pointer() {
  PointerParams p;
  p.score = Tensor{{1.0}};
  p.feature_proj = Tensor{{1.0}};
  p.state_proj = Tensor{{0.0}};
  p.score_bias = Tensor{{0.0}};
  p.decoder = GruDirection::zeros(1, 1);
  p.init_proj = Tensor{{0.0}, {0.0}};
  return p;
}

Var column(Tape& t, std::vector<double> values) {
  const std::size_t n = values.size();
  return t.constant(Tensor(n, 1, std::move(values)));
}

}  // namespace

TEST(Aggregate, ZeroParamsGiveZeroRows) {
  Rng rng(1);
  PointerParams p = PointerParams::random(4, 3, 6, 5, true, rng);
  p.aggregate = BiGruParams::zeros(4, 3);
  Tape t;
  const Tensor out = aggregate(t.constant(random_tensor(5, 4, rng)), p).value();
  EXPECT_EQ(out, Tensor(6, 6));
}

TEST(Aggregate, AppendsExactlyOneZeroRow) {
  Rng rng(2);
  const PointerParams p = PointerParams::random(4, 3, 6, 5, true, rng);
  for (std::size_t clips : {1u, 2u, 7u}) {
    Tape t;
    const Tensor out = aggregate(t.constant(random_tensor(clips, 4, rng)), p).value();
    ASSERT_EQ(out.rows(), clips + 1);
    for (double v : out.row(clips)) EXPECT_EQ(v, 0.0);
  }
}

TEST(Aggregate, MatchesScalarLoopsOnClipRows) {
  Rng rng(3);
  const PointerParams p = PointerParams::random(4, 3, 6, 5, true, rng);
  const Tensor x = random_tensor(3, 4, rng);
  Tape t;
  const Tensor out = aggregate(t.constant(x), p).value();
  const Tensor want = bigru_ref(x, p.aggregate);
  for (std::size_t r = 0; r < 3; ++r)
    for (std::size_t c = 0; c < 6; ++c) EXPECT_NEAR(out(r, c), want(r, c), 1e-13);
  for (double v : out.row(3)) EXPECT_EQ(v, 0.0);
}

TEST(InitState, SingleWordIsProjected) {
  PointerParams p = state_blind_pointer();
  p.init_proj = Tensor{{2.0}, {-1.0}};
  Tape t;
  EXPECT_EQ(init_state(t.constant(Tensor{{3, 4}}), p).value(), (Tensor{{2.0}}));
}

TEST(InitState, IdenticalWordsProjectTheWord) {
  PointerParams p = state_blind_pointer();
  p.init_proj = Tensor{{2.0}, {-1.0}};
  Tape t;
  EXPECT_EQ(init_state(t.constant(Tensor{{3, 4}, {3, 4}, {3, 4}}), p).value(), (Tensor{{2.0}}));
}

TEST(InitState, TwoWordsProjectTheMidpoint) {
  PointerParams p = state_blind_pointer();
  p.init_proj = Tensor{{1.0}, {10.0}};
  Tape t;
  // midpoint [2, 1] → 2 + 10
  EXPECT_EQ(init_state(t.constant(Tensor{{1, 0}, {3, 2}}), p).value(), (Tensor{{12.0}}));
}

TEST(SlotMask, FirstStepAllowsEverything) {
  EXPECT_EQ(slot_mask(4, std::nullopt, true), (std::vector<std::uint8_t>{1, 1, 1, 1}));
  EXPECT_EQ(slot_mask(4, 1, true), (std::vector<std::uint8_t>{0, 0, 1, 1}));
  EXPECT_EQ(slot_mask(4, 1, false), (std::vector<std::uint8_t>{1, 1, 1, 1}));
}

TEST(ArgmaxFirst, TiesGoToSmallestIndex) {
  const std::vector<double> v{0.1, 0.4, 0.4, 0.1};
  EXPECT_EQ(argmax_first(v), 1u);
  EXPECT_THROW(argmax_first(std::span<const double>{}), InvalidInput);
}

TEST(DecodeStep, ZeroScoreVectorIsUniformOverAllowedSlots) {
  Rng rng(4);
  PointerParams p = PointerParams::random(3, 2, 4, 3, false, rng);
  p.score = Tensor(3, 1);
  Tape t;
  const PointerSlots slots = prepare_slots(t.constant(random_tensor(6, 3, rng)), p);
  DecodeState st{1, 2, t.constant(random_tensor(1, 3, rng))};
  const StepResult r = decode_step(slots, st, p);
  const Tensor& e = r.probs.value();
  for (std::size_t i = 0; i <= 2; ++i) EXPECT_EQ(e[i], 0.0);
  for (std::size_t i = 3; i <= 6; ++i) EXPECT_NEAR(e[i], 0.25, 1e-15);
  EXPECT_EQ(r.pointer, 3u);
}

TEST(DecodeStep, PreviousTwoOfSixAllowsThreeToEnd) {
  Rng rng(5);
  const PointerParams p = PointerParams::random(3, 2, 4, 3, true, rng);
  Tape t;
  const PointerSlots slots = prepare_slots(t.constant(random_tensor(6, 3, rng)), p);
  const StepResult r = decode_step(slots, {1, 2, t.constant(random_tensor(1, 3, rng))}, p);
  const Tensor& e = r.probs.value();
  EXPECT_EQ(e[0], 0.0);
  EXPECT_EQ(e[1], 0.0);
  EXPECT_EQ(e[2], 0.0);
  EXPECT_NEAR(e[3] + e[4] + e[5] + e[6], 1.0, 1e-12);
  EXPECT_GE(r.pointer, 3u);
}

TEST(DecodeStep, LastClipLeavesOnlyTheEndSlot) {
  Rng rng(6);
  const PointerParams p = PointerParams::random(3, 2, 4, 3, true, rng);
  Tape t;
  const PointerSlots slots = prepare_slots(t.constant(random_tensor(5, 3, rng)), p);
  const StepResult r = decode_step(slots, {2, 4, t.constant(random_tensor(1, 3, rng))}, p);
  EXPECT_EQ(r.pointer, 5u);
  EXPECT_EQ(r.probs.value()[5], 1.0);
  EXPECT_THROW(decode_step(slots, {3, 5, r.hidden}, p), InvalidInput);
}

TEST(Decode, EndFirstGivesEmptySelection) {
  const PointerParams p = state_blind_pointer();
  Tape t;
  const PointerSlots slots = prepare_slots(column(t, {-0.5, -0.1, -2.0}), p);
  const PointerSelection s = decode(slots, t.constant(Tensor{{1, 1}}), p, 5);
  EXPECT_TRUE(s.clips.empty());
  EXPECT_TRUE(s.terminated);
  EXPECT_EQ(s.steps.size(), 1u);
  EXPECT_EQ(s.raw_pointers, (std::vector<std::size_t>{3}));
}

TEST(Decode, MinOneClipOverridesImmediateStop) {
  const PointerParams p = state_blind_pointer();
  Tape t;
  const PointerSlots slots = prepare_slots(column(t, {-0.5, -0.1, -2.0}), p);
  DecodeOptions opt;
  opt.min_one_clip = true;
  const PointerSelection s = decode(slots, t.constant(Tensor{{1, 1}}), p, 5, opt);
  ASSERT_FALSE(s.clips.empty());
  EXPECT_EQ(s.clips.front(), 1u);
}

TEST(Decode, CraftedScoresFollowMaskedArgmaxChain) {
  const PointerParams p = state_blind_pointer();
  Tape t;
  const PointerSlots slots = prepare_slots(column(t, {0.1, 0.9, 0.2, 0.3, 0.8, 0.7, -0.5, -0.2}), p);
  const PointerSelection s = decode(slots, t.constant(Tensor{{1, 1}}), p, 5);
  EXPECT_EQ(s.clips, (std::vector<std::size_t>{1, 4, 5}));
  EXPECT_TRUE(s.terminated);
  EXPECT_EQ(s.raw_pointers, (std::vector<std::size_t>{1, 4, 5, 8}));
  ASSERT_EQ(s.steps.size(), 4u);
  for (std::size_t i = 0; i <= 5; ++i) EXPECT_EQ(s.steps[3][i], 0.0);
}

TEST(Decode, CapAtKRecordsOneForcedFinalStep) {
  const PointerParams p = state_blind_pointer();
  Tape t;
  const PointerSlots slots = prepare_slots(column(t, {0.9, 0.8, 0.7, 0.6, 0.5, 0.4, 0.3}), p);
  const PointerSelection s = decode(slots, t.constant(Tensor{{1, 1}}), p, 3);
  EXPECT_EQ(s.clips, (std::vector<std::size_t>{0, 1, 2}));
  EXPECT_EQ(s.steps.size(), 4u);
  EXPECT_FALSE(s.terminated);
}

TEST(Decode, WithoutMaskTheSameSlotRepeats) {
  const PointerParams p = state_blind_pointer();
  Tape t;
  const PointerSlots slots = prepare_slots(column(t, {0.1, 0.9, 0.2, 0.3}), p);
  DecodeOptions opt;
  opt.temporal_mask = false;
  const PointerSelection s = decode(slots, t.constant(Tensor{{1, 1}}), p, 3, opt);
  // Before post-processing the decoder points at slot 1 every step.
  EXPECT_EQ(s.raw_pointers, (std::vector<std::size_t>{1, 1, 1}));
  EXPECT_EQ(s.clips, (std::vector<std::size_t>{1}));
}

TEST(Decode, RandomModelsKeepInvariants) {
  Rng rng(7);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t clips = static_cast<std::size_t>(rng.integer(1, 12));
    const std::size_t k = static_cast<std::size_t>(rng.integer(1, 6));
    PointerParams p = PointerParams::random(3, 3, 4, 4, rng.bernoulli(0.5), rng);
    p.score = random_tensor(4, 1, rng, rng.uniform(0.1, 20.0));
    Tape t;
    const PointerSlots slots = prepare_slots(t.constant(random_tensor(clips, 3, rng, 3.0)), p);
    const PointerSelection s = decode(slots, t.constant(random_tensor(3, 4, rng)), p, k);
    ASSERT_LE(s.clips.size(), k);
    ASSERT_LE(s.steps.size(), k + 1);
    std::optional<std::size_t> prev;
    for (std::size_t j = 0; j < s.steps.size(); ++j) {
      const StepDistribution& e = s.steps[j];
      ASSERT_EQ(e.size(), clips + 1);
      EXPECT_NEAR(std::accumulate(e.begin(), e.end(), 0.0), 1.0, 1e-6);
      if (prev) {
        for (std::size_t i = 0; i <= *prev; ++i) EXPECT_EQ(e[i], 0.0);
      }
      prev = s.raw_pointers[j];
    }
    for (std::size_t i = 1; i < s.clips.size(); ++i) EXPECT_LT(s.clips[i - 1], s.clips[i]);
    for (std::size_t c : s.clips) EXPECT_LT(c, clips);
  }
}

TEST(SupervisedSteps, TeacherForcedMaskFollowsTargets) {
  Rng rng(8);
  const PointerParams p = PointerParams::random(3, 2, 4, 3, true, rng);
  Tape t;
  const PointerSlots slots = prepare_slots(t.constant(random_tensor(8, 3, rng)), p);
  const std::vector<std::size_t> targets{1, 4, 5, 8};
  const auto steps = supervised_steps(slots, t.constant(random_tensor(2, 4, rng)), p, targets, true, true);
  ASSERT_EQ(steps.size(), 4u);
  for (std::size_t k = 1; k < 4; ++k) {
    for (std::size_t i = 0; i <= targets[k - 1]; ++i) EXPECT_EQ(steps[k].value()[i], 0.0);
  }
}

TEST(SupervisedSteps, EndMustBeLast) {
  Rng rng(9);
  const PointerParams p = PointerParams::random(3, 2, 4, 3, true, rng);
  Tape t;
  const PointerSlots slots = prepare_slots(t.constant(random_tensor(4, 3, rng)), p);
  const std::vector<std::size_t> targets{4, 2};
  EXPECT_THROW(supervised_steps(slots, t.constant(Tensor(1, 4)), p, targets, true, true), InvalidInput);
}

TEST(TopK, PicksHighestAndReturnsAscendingOrder) {
  const std::vector<double> scores{0.1, 0.9, 0.5, 0.9, 0.2, 0.7};
  EXPECT_EQ(top_k_clips(scores, 3), (std::vector<std::size_t>{1, 3, 5}));
  EXPECT_EQ(top_k_clips(scores, 10).size(), 6u);
}

TEST(Variants, NoPointerAlwaysReturnsFiveClips) {
  Rng rng(10);
  ModelConfig cfg;
  cfg.dims = {4, 4, 4, 4, 4, 2, 5};
  cfg.variant = Variant::no_pointer;
  const Model m = Model::build(cfg, 3);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t clips = static_cast<std::size_t>(rng.integer(5, 12));
    const Prediction pr =
        m.predict(ClipSequence{random_tensor(clips, 4, rng)}, TokenizedSentence{{}, random_tensor(3, 4, rng)});
    EXPECT_EQ(pr.selection.clips.size(), 5u);
    EXPECT_TRUE(std::is_sorted(pr.selection.clips.begin(), pr.selection.clips.end()));
  }
}

TEST(Variants, NamesRoundTrip) {
  for (Variant v : {Variant::full, Variant::no_graph, Variant::no_pointer, Variant::no_mask}) {
    EXPECT_EQ(parse_variant(variant_name(v)), v);
  }
  EXPECT_THROW(parse_variant("gtp-x"), InvalidInput);
}

TEST(Variants, EachVariantPredictsWithinBounds) {
  Rng rng(11);
  for (Variant v : {Variant::full, Variant::no_graph, Variant::no_pointer, Variant::no_mask}) {
    ModelConfig cfg;
    cfg.dims = {5, 3, 4, 6, 4, 2, 5};
    cfg.variant = v;
    const Model m = Model::build(cfg, 1);
    const ClipSequence clips{random_tensor(9, 5, rng)};
    const TokenizedSentence words{{}, random_tensor(4, 3, rng)};
    const Prediction pr = m.predict(clips, words);
    EXPECT_LE(pr.selection.clips.size(), 5u) << variant_name(v);
    for (std::size_t i = 1; i < pr.selection.clips.size(); ++i) {
      EXPECT_LT(pr.selection.clips[i - 1], pr.selection.clips[i]) << variant_name(v);
    }
    if (v == Variant::no_graph) {
      EXPECT_TRUE(pr.adjacency.empty());
    } else {
      EXPECT_EQ(pr.attention.shape(), (std::array<std::size_t, 2>{9, 4}));
      EXPECT_EQ(pr.adjacency.shape(), (std::array<std::size_t, 2>{9, 9}));
    }
  }
}
