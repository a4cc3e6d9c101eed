#include <gtest/gtest.h>

#include <cmath>

#include "gtp/cli.hpp"
#include "gtp/errors.hpp"
#include "gtp/training.hpp"
#include "support.hpp"

using namespace gtp;

namespace {

ModelConfig small_config(Variant v = Variant::full) {
  ModelConfig c;
  c.dims = {16, 16, 8, 8, 8, 2, 5};
  c.variant = v;
  return c;
}

std::vector<VideoSample> small_corpus(std::size_t n, std::uint64_t seed, double noise = 0.0) {
  SynthConfig s;
  s.samples = n;
  s.seed = seed;
  s.noise = noise;
  return synth_generate(s);
}

std::vector<Tensor> snapshot(Model& m) {
  std::vector<Tensor> out;
  for (const auto& nt : m.named_tensors()) out.push_back(*nt.tensor);
  return out;
}

}  // namespace

TEST(PointerTargets, MarksThenEndSlot) {
  const std::vector<std::size_t> idx{1, 4, 5};
  EXPECT_EQ(pointer_targets(AnnotationMatrix::build(idx, 10, 5)), (std::vector<std::size_t>{1, 4, 5, 10}));
}

TEST(PointerTargets, NoMarksIsEndOnly) {
  EXPECT_EQ(pointer_targets(AnnotationMatrix::build({}, 10, 5)), (std::vector<std::size_t>{10}));
  EXPECT_EQ(pointer_targets(Tensor(10, 5)), (std::vector<std::size_t>{10}));
}

TEST(PointerTargets, FullThumbnailStillEnds) {
  Tensor b(10, 5);
  for (std::size_t k = 0; k < 5; ++k) b(k, k) = 1.0;
  EXPECT_EQ(pointer_targets(b), (std::vector<std::size_t>{0, 1, 2, 3, 4, 10}));
}

TEST(PointerTargets, DenseMatrixValidation) {
  Tensor twice(4, 2);
  twice(1, 0) = twice(2, 0) = 1.0;
  EXPECT_THROW(pointer_targets(twice), InvalidInput);
  Tensor backwards(4, 2);
  backwards(2, 0) = backwards(1, 1) = 1.0;
  EXPECT_THROW(pointer_targets(backwards), InvalidInput);
  Tensor gap(4, 2);
  gap(1, 1) = 1.0;
  EXPECT_THROW(pointer_targets(gap), InvalidInput);
}

TEST(StepLoss, CertainDistributionsCostNothing) {
  const std::vector<StepDistribution> d{{0, 1, 0}, {0, 0, 1}};
  const std::vector<std::size_t> t{1, 2};
  EXPECT_EQ(step_loss(d, t), 0.0);
}

TEST(StepLoss, UniformOverSevenSlots) {
  const std::vector<StepDistribution> d{StepDistribution(7, 1.0 / 7)};
  const std::vector<std::size_t> t{3};
  EXPECT_NEAR(step_loss(d, t), std::log(7.0), 1e-12);
  EXPECT_NEAR(step_loss(d, t), 1.9459, 1e-4);
}

TEST(StepLoss, TwoHalfProbabilitySteps) {
  const std::vector<StepDistribution> d{{0.5, 0.5}, {0.25, 0.5, 0.25}};
  const std::vector<std::size_t> t{0, 1};
  EXPECT_NEAR(step_loss(d, t), 2 * std::log(2.0), 1e-12);
}

TEST(StepLoss, FloorsZeroProbability) {
  const std::vector<StepDistribution> d{{1.0, 0.0}};
  const std::vector<std::size_t> t{1};
  EXPECT_NEAR(step_loss(d, t), -std::log(1e-12), 1e-9);
}

TEST(StepLoss, LengthMismatchRejected) {
  const std::vector<StepDistribution> d{{1.0}};
  const std::vector<std::size_t> t{0, 0};
  EXPECT_THROW(step_loss(d, t), InvalidInput);
}

TEST(ModelLoss, MatchesStepLossOfTeacherForcedDistributions) {
  const auto data = small_corpus(3, 4);
  const Model m = Model::build(small_config(), 2);
  for (const auto& s : data) {
    Tape t;
    const double taped = m.loss(t, s.clips, s.sentence, s.truth).scalar();
    Tape t2;
    const Encoded enc = m.encode(t2, s.clips, s.sentence);
    const PointerSlots slots = prepare_slots(enc.clip_features, m.params().pointer);
    const auto targets = pointer_targets(s.truth);
    const auto steps = supervised_steps(slots, enc.sentence, m.params().pointer, targets, true, true);
    std::vector<StepDistribution> dists;
    for (const Var& v : steps) dists.emplace_back(v.value().values().begin(), v.value().values().end());
    EXPECT_NEAR(taped, step_loss(dists, targets), 1e-10);
  }
}

TEST(TrainConfig, RateDecaysStepwise) {
  TrainConfig c;
  EXPECT_EQ(c.rate_at(0), 1e-3);
  EXPECT_EQ(c.rate_at(19), 1e-3);
  EXPECT_EQ(c.rate_at(20), 5e-4);
  EXPECT_EQ(c.rate_at(45), 2.5e-4);
  c.decay_every = 0;
  EXPECT_EQ(c.rate_at(1000), 1e-3);
  c.learning_rate = -1;
  EXPECT_THROW(c.validate(), InvalidInput);
}

TEST(TrainEpoch, ZeroRateLeavesParametersAndLossUnchanged) {
  const auto data = small_corpus(6, 1);
  Model m = Model::build(small_config(), 3);
  const auto before = snapshot(m);
  TrainConfig c;
  c.learning_rate = 0.0;
  Trainer tr(m, c);
  const EpochStats a = tr.train_epoch(data);
  const EpochStats b = tr.train_epoch(data);
  EXPECT_EQ(snapshot(m), before);
  EXPECT_EQ(a.mean_loss, b.mean_loss);
  EXPECT_GT(a.mean_grad_norm, 0.0);
}

TEST(TrainEpoch, SameSeedGivesBitwiseIdenticalTrajectory) {
  const auto data = small_corpus(8, 2);
  auto run = [&] {
    Model m = Model::build(small_config(), 5);
    TrainConfig c;
    c.seed = 9;
    Trainer tr(m, c);
    std::vector<double> losses;
    for (int e = 0; e < 3; ++e) losses.push_back(tr.train_epoch(data).mean_loss);
    return std::pair{losses, snapshot(m)};
  };
  EXPECT_EQ(run(), run());
}

TEST(TrainEpoch, RepeatedSampleOverfits) {
  const auto one = small_corpus(1, 6);
  const std::vector<VideoSample> data(4, one.front());
  Model m = Model::build(small_config(), 7);
  TrainConfig c;
  c.decay_every = 0;
  c.learning_rate = 3e-3;
  Trainer tr(m, c);
  EpochStats s;
  for (int e = 0; e < 200; ++e) s = tr.train_epoch(data);
  EXPECT_LT(s.mean_loss, 0.05);
  EXPECT_EQ(m.predict(one.front().clips, one.front().sentence).selection.clips, one.front().truth.indices());
}

TEST(TrainEpoch, EmptyDatasetRejected) {
  Model m = Model::build(small_config(), 1);
  Trainer tr(m, TrainConfig{});
  EXPECT_THROW(tr.train_epoch({}), InvalidInput);
}

TEST(TrainEpoch, EveryVariantTrains) {
  const auto data = small_corpus(6, 8, 0.1);
  for (Variant v : {Variant::full, Variant::no_graph, Variant::no_pointer, Variant::no_mask}) {
    Model m = Model::build(small_config(v), 1);
    TrainConfig c;
    c.learning_rate = 5e-3;
    Trainer tr(m, c);
    const double first = tr.train_epoch(data).mean_loss;
    double last = first;
    for (int e = 0; e < 15; ++e) last = tr.train_epoch(data).mean_loss;
    EXPECT_LT(last, first) << variant_name(v);
  }
}

TEST(TrainEpoch, TeacherForcingOffStillTrains) {
  const auto data = small_corpus(6, 9);
  Model m = Model::build(small_config(), 1);
  TrainConfig c;
  c.teacher_forcing = false;
  c.learning_rate = 5e-3;
  Trainer tr(m, c);
  const double first = tr.train_epoch(data).mean_loss;
  double last = first;
  for (int e = 0; e < 15; ++e) last = tr.train_epoch(data).mean_loss;
  EXPECT_TRUE(std::isfinite(last));
  EXPECT_LT(last, first);
}

TEST(TrainEpoch, GradientClippingBoundsUpdates) {
  const auto data = small_corpus(4, 10);
  Model m = Model::build(small_config(), 1);
  TrainConfig c;
  c.clip_norm = 1e-3;
  Trainer tr(m, c);
  EXPECT_TRUE(std::isfinite(tr.train_epoch(data).mean_loss));
}

TEST(Adam, ZeroRateIsIdentity) {
  Tensor w{{1.0, -2.0}};
  Adam opt({{"w", &w}});
  const std::vector<Tensor> g{Tensor{{0.5, 0.5}}};
  opt.step(g, 0.0);
  EXPECT_EQ(w, (Tensor{{1.0, -2.0}}));
  EXPECT_EQ(opt.steps_taken(), 1u);
}

TEST(Adam, FirstStepMovesByTheRate) {
  Tensor w{{1.0, -2.0}};
  Adam opt({{"w", &w}});
  const std::vector<Tensor> g{Tensor{{0.5, -3.0}}};
  opt.step(g, 0.1);
  // Bias-corrected first step is lr · g/|g| per entry.
  EXPECT_NEAR(w(0, 0), 0.9, 1e-7);
  EXPECT_NEAR(w(0, 1), -1.9, 1e-7);
}

// End-to-end gradient checks of each variant on a sampled subset of entries.
class VariantGradient : public ::testing::TestWithParam<Variant> {};

TEST_P(VariantGradient, LossGradientMatchesFiniteDifferences) {
  cli::GradCheckSetup setup;
  setup.variant = GetParam();
  setup.width = 5;
  setup.clips = 5;
  setup.words = 4;
  setup.options.max_entries_per_tensor = 6;
  setup.options.seed = 3;
  const GradCheckReport rep = cli::run_gradcheck(setup);
  EXPECT_TRUE(rep.failure.empty()) << rep.failure;
  for (const auto& e : rep.tensors) EXPECT_TRUE(e.passed) << e.name << " " << e.max_rel_error;
}

INSTANTIATE_TEST_SUITE_P(All, VariantGradient,
                         ::testing::Values(Variant::full, Variant::no_graph, Variant::no_pointer, Variant::no_mask),
                         [](const auto& info) {
                           std::string n(variant_name(info.param));
                           for (char& ch : n) ch = ch == '-' ? '_' : ch;
                           return n;
                         });
