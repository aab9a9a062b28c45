#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "genrl/errors.hpp"
#include "genrl/rng.hpp"
#include "genrl/seq/maent.hpp"
#include "genrl/seq/model.hpp"
#include "genrl/seq/tokenizer.hpp"

using namespace genrl;
using namespace genrl::seq;

namespace {

SequenceModelSpec tiny_spec() {
  SequenceModelSpec s;
  s.patch_count = 4;
  s.patch_size = 4;
  s.action_count = 3;
  s.return_bins = 8;
  s.context = 3;
  s.embed = 8;
  s.heads = 2;
  s.layers = 1;
  s.mlp_ratio = 2;
  return s;
}

TokenSequence random_sequence(Rng& rng, std::size_t steps, const SequenceModelSpec& spec) {
  TokenSequence seq;
  seq.patch_count = spec.patch_count;
  seq.patch_size = spec.patch_size;
  for (std::size_t t = 0; t < steps; ++t) {
    TimestepTokens s;
    for (std::size_t i = 0; i < spec.patch_count * spec.patch_size; ++i) s.patches.push_back(rng.uniform(0, 3));
    s.return_bin = rng.below(spec.return_bins);
    s.action = rng.below(spec.action_count);
    s.reward = static_cast<int>(rng.below(3)) - 1;
    seq.steps.push_back(std::move(s));
  }
  return seq;
}

// Pushes every parameter off its initialization so heads are non-trivial.
void jitter(SequenceModel& model, Rng& rng, double scale) {
  for (auto* p : model.parameters())
    for (auto& v : p->value().data) v += rng.uniform(-scale, scale);
}

}  // namespace

TEST(Ternarize, Examples) {
  EXPECT_EQ(ternarize_reward(3.7), 1);
  EXPECT_EQ(ternarize_reward(-0.2), -1);
  EXPECT_EQ(ternarize_reward(0.0), 0);
  EXPECT_EQ(ternarize_reward(-0.0), 0);
  EXPECT_EQ(ternarize_reward(1e-300), 1);
}

TEST(ReturnQuantizer, BoundariesAndClamping) {
  const ReturnQuantizer q(-400.0, 100.0, 64);
  EXPECT_EQ(q.quantize(-400.0), 0u);
  EXPECT_EQ(q.quantize(100.0), 63u);
  EXPECT_EQ(q.quantize(-1e9), 0u);
  EXPECT_EQ(q.quantize(1e9), 63u);
  EXPECT_DOUBLE_EQ(q.dequantize(0), -400.0 + q.bin_width() / 2);
  EXPECT_THROW(ReturnQuantizer(1.0, 1.0), ConfigError);
  EXPECT_THROW(ReturnQuantizer(0.0, 1.0, 1), ConfigError);
}

TEST(ReturnQuantizer, RoundTripWithinHalfBin) {
  Rng rng(1);
  const ReturnQuantizer q(-37.5, 212.25, 64);
  for (int k = 0; k < 1000; ++k) {
    const double r = rng.uniform(q.lo(), q.hi());
    const auto b = q.quantize(r);
    EXPECT_LT(b, 64u);
    EXPECT_LE(std::abs(q.dequantize(b) - r), q.bin_width() / 2 + 1e-12);
  }
}

TEST(Tiling, Arithmetic) {
  const auto t = choose_tiling(20, 20, 16);
  EXPECT_EQ(t.tiles_down, 4u);
  EXPECT_EQ(t.tiles_across, 4u);
  EXPECT_EQ(t.patch_rows(), 5u);
  EXPECT_EQ(t.patch_cols(), 5u);
  const auto whole = choose_tiling(21, 19, 1);
  EXPECT_EQ(whole.patch_size(), 21u * 19u);
  EXPECT_THROW(choose_tiling(21, 19, 4), ShapeError);
}

TEST(Patchify, RowMajorPatchesAndExactInverse) {
  std::vector<double> v(16);
  for (std::size_t i = 0; i < 16; ++i) v[i] = static_cast<double>(i);
  const Observation grid(4, 4, v);
  const auto p = patchify(grid, 4);
  EXPECT_EQ(p, (std::vector<double>{0, 1, 4, 5, 2, 3, 6, 7, 8, 9, 12, 13, 10, 11, 14, 15}));
  EXPECT_EQ(patchify(grid, 1), v);
  EXPECT_EQ(unpatchify(p, 4, 4, 4).values, v);

  Rng rng(2);
  for (auto [r, c] : {std::pair{20, 20}, {21, 19}, {12, 18}}) {
    std::vector<double> vals(static_cast<std::size_t>(r * c));
    for (auto& x : vals) x = rng.uniform(-5, 5);
    const Observation obs(static_cast<std::size_t>(r), static_cast<std::size_t>(c), vals);
    for (std::size_t m = 1; m <= static_cast<std::size_t>(r * c); ++m) {
      std::vector<double> patches;
      try {
        patches = patchify(obs, m);
      } catch (const ShapeError&) {
        continue;
      }
      EXPECT_EQ(unpatchify(patches, obs.rows, obs.cols, m).values, vals);
    }
  }
}

TEST(EncodeStep, BuildsTokens) {
  const ReturnQuantizer q(0.0, 10.0, 10);
  const auto step = encode_step(Observation(2, 2, {1, 2, 3, 4}), 2, q, 3.5, 1, -7.0);
  EXPECT_EQ(step.patches, (std::vector<double>{1, 3, 2, 4}));
  EXPECT_EQ(step.return_bin, 3u);
  EXPECT_EQ(step.action, 1u);
  EXPECT_EQ(step.reward, -1);
}

TEST(TokenSequence, LayoutAndVocabularyChecks) {
  Rng rng(3);
  const auto spec = tiny_spec();
  auto seq = random_sequence(rng, 2, spec);
  EXPECT_EQ(seq.tokens_per_step(), 7u);
  EXPECT_EQ(seq.return_position(1), 11u);
  EXPECT_NO_THROW(seq.validate(spec.return_bins, spec.action_count));
  seq.steps[1].return_bin = spec.return_bins;
  EXPECT_THROW(seq.validate(spec.return_bins, spec.action_count), ContractError);
  seq.steps[1].return_bin = 0;
  seq.steps[0].action = spec.action_count;
  EXPECT_THROW(seq.validate(spec.return_bins, spec.action_count), ContractError);
}

TEST(SequenceModel, FreshModelIsUniform) {
  Rng rng(4);
  const auto spec = tiny_spec();
  const SequenceModel model(spec, rng);
  const auto seq = random_sequence(rng, 3, spec);
  const auto out = sample_action(model, seq, rng);
  for (double p : out.dist.probs()) EXPECT_NEAR(p, 1.0 / 3.0, 1e-12);
}

TEST(SequenceModel, OutputsAreCausal) {
  const auto spec = tiny_spec();
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    Rng rng(seed);
    SequenceModel model(spec, rng);
    jitter(model, rng, 0.3);
    const auto seq = random_sequence(rng, 3, spec);
    const auto base = model.infer_all(seq);
    for (std::size_t t = 1; t < 3; ++t) {
      auto changed = seq;
      for (auto& x : changed.steps[t].patches) x += 1.0;
      changed.steps[t].return_bin = (changed.steps[t].return_bin + 1) % spec.return_bins;
      changed.steps[t].action = (changed.steps[t].action + 1) % spec.action_count;
      changed.steps[t].reward = -changed.steps[t].reward;
      const auto out = model.infer_all(changed);
      for (std::size_t s = 0; s < t; ++s) {
        for (std::size_t a = 0; a < spec.action_count; ++a) EXPECT_NEAR(out.logits(s, a), base.logits(s, a), 1e-12);
        EXPECT_NEAR(out.values[s], base.values[s], 1e-12);
      }
      bool moved = false;
      for (std::size_t a = 0; a < spec.action_count; ++a) moved = moved || out.logits(t, a) != base.logits(t, a);
      EXPECT_TRUE(moved);
    }
  }
}

TEST(SequenceModel, OversizedContextIsAContractError) {
  Rng rng(5);
  const auto spec = tiny_spec();
  const SequenceModel model(spec, rng);
  EXPECT_THROW(model.infer_all(random_sequence(rng, 4, spec)), ContractError);
  EXPECT_THROW(sample_action(model, random_sequence(rng, 4, spec), rng), ContractError);
}

TEST(SampleAction, GreedyAndFrequencies) {
  Rng rng(6);
  const auto spec = tiny_spec();
  SequenceModel model(spec, rng);
  jitter(model, rng, 0.5);
  const auto seq = random_sequence(rng, 2, spec);
  const auto greedy = sample_action(model, seq, rng, 0.0);
  const auto dist = sample_action(model, seq, rng).dist;
  EXPECT_EQ(greedy.action, dist.argmax());
  for (int k = 0; k < 20; ++k) EXPECT_EQ(sample_action(model, seq, rng, 0.0).action, greedy.action);

  const int n = 10000;
  std::vector<int> counts(spec.action_count, 0);
  for (int k = 0; k < n; ++k) ++counts[sample_action(model, seq, rng).action];
  for (std::size_t a = 0; a < spec.action_count; ++a) {
    const double p = dist.probs()[a];
    EXPECT_NEAR(counts[a] / double(n), p, 3.0 * std::sqrt(p * (1 - p) / n));
  }
}

TEST(EntropyFloor, DefaultAndLiteral) {
  EXPECT_DOUBLE_EQ(default_entropy_floor(4), 0.5 * std::log(4.0));
  EXPECT_EQ(literal_entropy_floor(18), -18.0);
}

TEST(MaentConfig, DefaultsAndValidation) {
  const MaentConfig cfg;
  EXPECT_EQ(cfg.batch, 32u);
  EXPECT_EQ(cfg.buffer_capacity, 10000u);
  EXPECT_EQ(cfg.updates_between_rollouts, 300u);
  EXPECT_EQ(cfg.optimizer.lr, 0.0001);
  MaentConfig bad;
  bad.dual_lr = -1.0;
  EXPECT_THROW(bad.validate(), ConfigError);
  bad = {};
  bad.lambda_init = -0.1;
  EXPECT_THROW(bad.validate(), ConfigError);
}

TEST(Maent, NllMatchesStraightLineEvaluation) {
  Rng rng(7);
  const auto spec = tiny_spec();
  SequenceModel model(spec, rng);
  jitter(model, rng, 0.3);
  std::vector<TokenSequence> batch;
  for (int i = 0; i < 4; ++i) batch.push_back(random_sequence(rng, 1 + rng.below(3), spec));
  double total = 0.0, entropy = 0.0;
  std::size_t count = 0;
  for (const auto& seq : batch) {
    const auto heads = model.infer_all(seq);
    for (std::size_t t = 0; t < seq.length(); ++t) {
      const auto d = DiscretePolicyDist::from_logits(heads.logits.row_span(t));
      total -= d.log_prob(seq.steps[t].action);
      entropy += d.entropy();
      ++count;
    }
  }
  MaentConfig cfg;
  cfg.lambda_init = 0.4;
  cfg.beta = 0.2;
  MaentTrainer trainer(cfg);
  nn::Graph g;
  const auto l = trainer.loss(g, model, batch);
  const double j = total / static_cast<double>(count), h = entropy / static_cast<double>(count);
  EXPECT_NEAR(g.scalar_value(l.nll), j, 1e-10);
  EXPECT_NEAR(evaluate_nll(model, batch), j, 1e-10);
  EXPECT_NEAR(g.scalar_value(l.entropy), h, 1e-10);
  EXPECT_NEAR(g.scalar_value(l.total), j - 0.4 * (h - 0.2), 1e-10);
}

TEST(Maent, SlackConstraintDrivesLambdaToZero) {
  Rng rng(8);
  const auto spec = tiny_spec();
  SequenceModel model(spec, rng);
  std::vector<TokenSequence> batch;
  for (int i = 0; i < 4; ++i) batch.push_back(random_sequence(rng, 3, spec));
  MaentConfig cfg;
  cfg.beta = default_entropy_floor(spec.action_count);
  cfg.lambda_init = 0.05;
  cfg.dual_lr = 0.1;
  MaentTrainer trainer(cfg);
  double last = trainer.lambda();
  for (int k = 0; k < 20; ++k) {
    const auto stats = trainer.update(model, batch);
    EXPECT_GE(stats.lambda, 0.0);
    EXPECT_LE(stats.lambda, last);
    last = stats.lambda;
  }
  EXPECT_EQ(trainer.lambda(), 0.0);
  EXPECT_THROW(trainer.update(model, std::vector<TokenSequence>{}), StateError);
}

TEST(Maent, LambdaRisesWhenEntropyIsBelowTheFloor) {
  Rng rng(9);
  const auto spec = tiny_spec();
  SequenceModel model(spec, rng);
  std::vector<TokenSequence> batch{random_sequence(rng, 3, spec)};
  MaentConfig cfg;
  cfg.beta = 5.0;
  cfg.dual_lr = 0.1;
  MaentTrainer trainer(cfg);
  const auto stats = trainer.update(model, batch);
  EXPECT_NEAR(stats.lambda, 0.1 * (5.0 - stats.entropy), 1e-12);
}

TEST(Maent, ExpertNllFallsMonotonicallyOnAFrozenBatch) {
  Rng rng(10);
  const auto spec = tiny_spec();
  SequenceModel model(spec, rng);
  std::vector<TokenSequence> batch;
  for (int i = 0; i < 8; ++i) {
    auto seq = random_sequence(rng, 3, spec);
    // Deterministic expert: the action is the index of the largest patch sum among the first three.
    for (auto& s : seq.steps) {
      std::size_t best = 0;
      double best_sum = -1.0;
      for (std::size_t p = 0; p < spec.action_count; ++p) {
        double sum = 0.0;
        for (std::size_t i = 0; i < spec.patch_size; ++i) sum += s.patches[p * spec.patch_size + i];
        if (sum > best_sum) best_sum = sum, best = p;
      }
      s.action = best;
    }
    batch.push_back(std::move(seq));
  }
  MaentConfig cfg;
  cfg.beta = 0.0;
  cfg.optimizer = {1e-3, 0.0};
  MaentTrainer trainer(cfg);
  double last = evaluate_nll(model, batch);
  const double first = last;
  for (int k = 0; k < 100; ++k) {
    trainer.update(model, batch);
    const double now = evaluate_nll(model, batch);
    EXPECT_LT(now, last);
    EXPECT_EQ(trainer.lambda(), 0.0);
    last = now;
  }
  EXPECT_LT(last, first - 0.1);
}
