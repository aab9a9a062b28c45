#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "genrl/core_types.hpp"
#include "genrl/errors.hpp"
#include "genrl/rng.hpp"

using namespace genrl;

namespace {

std::vector<double> random_probs(Rng& rng, std::size_t n) {
  std::vector<double> p(n);
  for (auto& x : p) x = rng.uniform() + 1e-3;
  const double s = std::accumulate(p.begin(), p.end(), 0.0);
  for (auto& x : p) x /= s;
  // Absorb rounding so the sum passes the 1e-9 check exactly.
  p.back() = 1.0 - std::accumulate(p.begin(), p.end() - 1, 0.0);
  return p;
}

}  // namespace

TEST(DiscountedReturn, Examples) {
  EXPECT_DOUBLE_EQ(discounted_return(std::vector<double>{1, 1, 1}, 0.5), 1.75);
  EXPECT_EQ(discounted_return(std::vector<double>{}, 0.9), 0.0);
  EXPECT_DOUBLE_EQ(discounted_return(std::vector<double>{2, -1, 3}, 1.0), 4.0);
}

TEST(DiscountedReturn, ZeroGammaKeepsFirstReward) {
  Rng rng(1);
  for (int k = 0; k < 100; ++k) {
    std::vector<double> r(1 + rng.below(8));
    for (auto& x : r) x = rng.uniform(-10, 10);
    EXPECT_EQ(discounted_return(r, 0.0), r[0]);
  }
}

TEST(DiscountedReturn, RejectsGammaOutsideUnitInterval) {
  EXPECT_THROW(discounted_return(std::vector<double>{1.0}, 1.5), ConfigError);
}

TEST(DiscretePolicyDist, EntropyExamples) {
  EXPECT_NEAR(DiscretePolicyDist::uniform(4).entropy(), std::log(4.0), 1e-12);
  EXPECT_EQ(DiscretePolicyDist({0.0, 1.0, 0.0}).entropy(), 0.0);
  EXPECT_NEAR(DiscretePolicyDist({0.5, 0.5, 0.0, 0.0}).entropy(), std::log(2.0), 1e-12);
}

TEST(DiscretePolicyDist, LogProbExamples) {
  EXPECT_NEAR(DiscretePolicyDist::uniform(4).log_prob(2), std::log(0.25), 1e-12);
  EXPECT_EQ(DiscretePolicyDist({0.0, 1.0}).log_prob(1), 0.0);
  EXPECT_NEAR(DiscretePolicyDist({0.9, 0.1}).log_prob(1), -2.302585, 1e-6);
  EXPECT_EQ(DiscretePolicyDist({0.0, 1.0}).log_prob(0), -INFINITY);
  EXPECT_THROW(DiscretePolicyDist::uniform(2).log_prob(2), std::out_of_range);
}

TEST(DiscretePolicyDist, RejectsInvalidInput) {
  EXPECT_THROW(DiscretePolicyDist({0.5, 0.6}), InvalidDistributionError);
  EXPECT_THROW(DiscretePolicyDist({-0.1, 1.1}), InvalidDistributionError);
  EXPECT_THROW(DiscretePolicyDist({NAN, 1.0}), InvalidDistributionError);
  EXPECT_THROW(DiscretePolicyDist(std::vector<double>{}), InvalidDistributionError);
}

TEST(DiscretePolicyDist, ProbabilitiesOfLogProbsSumToOne) {
  Rng rng(2);
  for (int k = 0; k < 200; ++k) {
    const auto d = DiscretePolicyDist(random_probs(rng, 1 + rng.below(10)));
    double s = 0.0;
    for (std::size_t a = 0; a < d.action_count(); ++a) s += std::exp(d.log_prob(a));
    EXPECT_NEAR(s, 1.0, 1e-9);
  }
}

TEST(DiscretePolicyDist, EntropyIsPermutationInvariant) {
  Rng rng(3);
  for (int k = 0; k < 100; ++k) {
    auto p = random_probs(rng, 2 + rng.below(8));
    const double h = DiscretePolicyDist(p).entropy();
    for (std::size_t i = p.size(); i > 1; --i) std::swap(p[i - 1], p[rng.below(i)]);
    p.back() = 1.0 - std::accumulate(p.begin(), p.end() - 1, 0.0);
    EXPECT_NEAR(DiscretePolicyDist(p).entropy(), h, 1e-12);
  }
}

TEST(DiscretePolicyDist, FromLogitsMasksAndSharpens) {
  const std::vector<double> logits{1.0, 3.0, 2.0};
  const auto masked = DiscretePolicyDist::from_logits(logits, ActionMask{1, 0, 1});
  EXPECT_EQ(masked.probs()[1], 0.0);
  EXPECT_EQ(masked.argmax(), 2u);
  const auto greedy = DiscretePolicyDist::from_logits(logits, {}, 0.0);
  EXPECT_EQ(greedy.probs()[1], 1.0);
  EXPECT_THROW(DiscretePolicyDist::from_logits(logits, ActionMask{0, 0, 0}), InvalidDistributionError);
  EXPECT_THROW(DiscretePolicyDist::from_logits(logits, ActionMask{1, 1}), ShapeError);
}

TEST(DiscretePolicyDist, SamplingFrequenciesMatchProbabilities) {
  const DiscretePolicyDist d({0.1, 0.2, 0.3, 0.4});
  Rng rng(4);
  std::vector<int> counts(4, 0);
  const int n = 20000;
  for (int k = 0; k < n; ++k) ++counts[d.sample(rng)];
  for (std::size_t a = 0; a < 4; ++a) {
    const double p = d.probs()[a];
    EXPECT_NEAR(counts[a] / double(n), p, 4.0 * std::sqrt(p * (1 - p) / n));
  }
}

TEST(Trajectory, EnforcesTerminalAndLogProbContracts) {
  Trajectory t;
  Transition a;
  a.reward = 2.0;
  a.behavior_log_prob = -0.5;
  t.push_back(a);
  EXPECT_THROW(t.push_back(Transition{.behavior_log_prob = 0.3}), ContractError);
  a.terminal = true;
  a.reward = -1.0;
  t.push_back(a);
  EXPECT_TRUE(t.terminated());
  EXPECT_EQ(t.episode_return(), 1.0);
  EXPECT_THROW(t.push_back(Transition{}), StateError);
}

TEST(Observation, RejectsMismatchedShape) {
  EXPECT_THROW(Observation(2, 2, {1.0, 2.0, 3.0}), ShapeError);
  const auto o = Observation::flat({1.0, 2.0});
  EXPECT_EQ(o.rows, 1u);
  EXPECT_EQ(o.cols, 2u);
}

TEST(Rng, SplitStreamsAreIndependentOfParentState) {
  Rng a(42), b(42);
  a();
  a();
  EXPECT_EQ(a.split(7)(), b.split(7)());
  EXPECT_NE(a.split(7)(), a.split(8)());
  Rng c(42);
  EXPECT_EQ(c.at(5), Rng(42).at(5));
}

TEST(Rng, BelowStaysInRange) {
  Rng rng(5);
  for (int k = 0; k < 10000; ++k) {
    const auto n = 1 + rng.below(100);
    EXPECT_LT(rng.below(n), n);
  }
}
