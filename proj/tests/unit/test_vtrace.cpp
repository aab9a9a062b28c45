#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <vector>

#include "genrl/errors.hpp"
#include "genrl/rng.hpp"
#include "genrl/vtrace.hpp"
#include "oracles.hpp"

using namespace genrl;
using namespace genrl::vtrace;

namespace {

struct Segment {
  std::vector<double> values, rewards, ratios;
};

Segment random_segment(Rng& rng, std::size_t n) {
  Segment s;
  for (std::size_t i = 0; i <= n; ++i) s.values.push_back(rng.uniform(-2, 2));
  for (std::size_t i = 0; i < n; ++i) {
    s.rewards.push_back(rng.uniform(-1, 1));
    s.ratios.push_back(std::exp(rng.uniform(-1.5, 1.5)));
  }
  return s;
}

VTraceConfig config(double rho_bar, double c_bar, double gamma) {
  VTraceConfig c;
  c.rho_bar = rho_bar;
  c.c_bar = c_bar;
  c.gamma = gamma;
  return c;
}

// Solves a x = b by Gaussian elimination with partial pivoting.
template <std::size_t K>
std::array<double, K> solve(std::array<std::array<double, K>, K> a, std::array<double, K> b) {
  for (std::size_t c = 0; c < K; ++c) {
    std::size_t p = c;
    for (std::size_t r = c + 1; r < K; ++r)
      if (std::abs(a[r][c]) > std::abs(a[p][c])) p = r;
    std::swap(a[c], a[p]);
    std::swap(b[c], b[p]);
    for (std::size_t r = c + 1; r < K; ++r) {
      const double f = a[r][c] / a[c][c];
      for (std::size_t k = c; k < K; ++k) a[r][k] -= f * a[c][k];
      b[r] -= f * b[c];
    }
  }
  std::array<double, K> x{};
  for (std::size_t c = K; c-- > 0;) {
    double s = b[c];
    for (std::size_t k = c + 1; k < K; ++k) s -= a[c][k] * x[k];
    x[c] = s / a[c][c];
  }
  return x;
}

}  // namespace

TEST(VTrace, WorkedExample) {
  const std::vector<double> v{1.0, 0.5, 0.0}, r{1.0, 2.0}, ratios{2.0, 0.5};
  const auto out = compute_vtrace(v, r, ratios, config(1.0, 1.0, 0.9));
  EXPECT_NEAR(out.targets[0], 2.125, 1e-12);
  EXPECT_NEAR(out.targets[1], 1.25, 1e-12);
  EXPECT_NEAR(out.pg_advantages[0], 1.125, 1e-12);
  EXPECT_EQ(out.truncated_rhos, (std::vector<double>{1.0, 0.5}));
}

TEST(VTrace, ZeroRewardsAndValuesGiveZeros) {
  const std::vector<double> v(5, 0.0), r(4, 0.0), ratios{0.3, 2.0, 1.0, 5.0};
  const auto out = compute_vtrace(v, r, ratios, {});
  for (double x : out.targets) EXPECT_EQ(x, 0.0);
  for (double x : out.pg_advantages) EXPECT_EQ(x, 0.0);
}

TEST(VTrace, OnPolicyReducesToNStepReturn) {
  Rng rng(1);
  for (int k = 0; k < 100; ++k) {
    auto s = random_segment(rng, 1 + rng.below(12));
    std::fill(s.ratios.begin(), s.ratios.end(), 1.0);
    const double gamma = rng.uniform(0.0, 1.0);
    const auto out = compute_vtrace(s.values, s.rewards, s.ratios, config(1.0, 1.0, gamma));
    for (std::size_t t = 0; t < s.rewards.size(); ++t)
      EXPECT_NEAR(out.targets[t], oracle::nstep_return(s.rewards, s.values.back(), gamma, t), 1e-9);
  }
}

TEST(VTrace, RecursionMatchesDirectSummation) {
  Rng rng(2);
  for (int k = 0; k < 200; ++k) {
    const auto s = random_segment(rng, 1 + rng.below(15));
    const double c_bar = rng.uniform(0.2, 2.0);
    const double rho_bar = c_bar + rng.uniform(0.0, 2.0);
    const double gamma = rng.uniform(0.0, 1.0);
    const auto out = compute_vtrace(s.values, s.rewards, s.ratios, config(rho_bar, c_bar, gamma));
    const auto direct = oracle::vtrace_direct(s.values, s.rewards, s.ratios, rho_bar, c_bar, gamma);
    ASSERT_EQ(out.targets.size(), s.rewards.size());
    for (std::size_t t = 0; t < direct.size(); ++t) {
      EXPECT_NEAR(out.targets[t], direct[t], 1e-9);
      EXPECT_LE(out.truncated_rhos[t], rho_bar);
      EXPECT_LE(out.truncated_cs[t], c_bar);
      const double next = t + 1 < direct.size() ? direct[t + 1] : s.values.back();
      const double rho = std::min(rho_bar, s.ratios[t]);
      EXPECT_NEAR(out.pg_advantages[t], rho * (s.rewards[t] + gamma * next - s.values[t]), 1e-9);
    }
  }
}

TEST(VTrace, TruncationAboveMaxRatioIsInert) {
  Rng rng(3);
  for (int k = 0; k < 50; ++k) {
    const auto s = random_segment(rng, 1 + rng.below(10));
    const double top = *std::max_element(s.ratios.begin(), s.ratios.end());
    const auto a = compute_vtrace(s.values, s.rewards, s.ratios, config(top + 0.5, top, 0.95));
    const auto b = compute_vtrace(s.values, s.rewards, s.ratios, config(top * 10, top * 5, 0.95));
    EXPECT_EQ(a.targets, b.targets);
    EXPECT_EQ(a.pg_advantages, b.pg_advantages);
  }
}

TEST(VTrace, TabularEvaluationConvergesToTruncatedPolicyValue) {
  constexpr std::size_t S = 5, A = 2;
  Rng rng(4);
  std::array<std::array<std::array<double, S>, A>, S> P{};
  std::array<std::array<double, A>, S> R{}, pi{}, mu{}, pibar{};
  for (std::size_t s = 0; s < S; ++s)
    for (std::size_t a = 0; a < A; ++a) {
      double total = 0.0;
      for (auto& p : P[s][a]) total += (p = rng.uniform(0.05, 1.0));
      for (auto& p : P[s][a]) p /= total;
      R[s][a] = rng.uniform(-1, 1);
    }
  const double rho_bar = 1.0, c_bar = 1.0, gamma = 0.9;
  for (std::size_t s = 0; s < S; ++s) {
    pi[s][0] = rng.uniform(0.1, 0.9);
    pi[s][1] = 1 - pi[s][0];
    mu[s][0] = rng.uniform(0.1, 0.9);
    mu[s][1] = 1 - mu[s][0];
    double z = 0.0;
    for (std::size_t a = 0; a < A; ++a) z += (pibar[s][a] = std::min(rho_bar * mu[s][a], pi[s][a]));
    for (auto& p : pibar[s]) p /= z;
  }
  std::array<std::array<double, S>, S> lhs{};
  std::array<double, S> rhs{};
  for (std::size_t s = 0; s < S; ++s) {
    lhs[s][s] = 1.0;
    for (std::size_t a = 0; a < A; ++a) {
      rhs[s] += pibar[s][a] * R[s][a];
      for (std::size_t t = 0; t < S; ++t) lhs[s][t] -= gamma * pibar[s][a] * P[s][a][t];
    }
  }
  const auto truth = solve<S>(lhs, rhs);

  // Expected two-step V-trace operator, evaluated by enumerating every path under mu.
  std::array<double, S> V{};
  const auto cfg = config(rho_bar, c_bar, gamma);
  for (int iter = 0; iter < 300; ++iter) {
    std::array<double, S> next{};
    for (std::size_t x0 = 0; x0 < S; ++x0)
      for (std::size_t a0 = 0; a0 < A; ++a0)
        for (std::size_t x1 = 0; x1 < S; ++x1)
          for (std::size_t a1 = 0; a1 < A; ++a1)
            for (std::size_t x2 = 0; x2 < S; ++x2) {
              const double p = mu[x0][a0] * P[x0][a0][x1] * mu[x1][a1] * P[x1][a1][x2];
              const std::vector<double> values{V[x0], V[x1], V[x2]};
              const std::vector<double> rewards{R[x0][a0], R[x1][a1]};
              const std::vector<double> ratios{pi[x0][a0] / mu[x0][a0], pi[x1][a1] / mu[x1][a1]};
              next[x0] += p * compute_vtrace(values, rewards, ratios, cfg).targets[0];
            }
    V = next;
  }
  for (std::size_t s = 0; s < S; ++s) EXPECT_NEAR(V[s], truth[s], 1e-3);
}

TEST(VTrace, RejectsInvalidInput) {
  const std::vector<double> v{0.0, 0.0}, r{1.0}, ratio{1.0};
  EXPECT_THROW(compute_vtrace(std::vector<double>{0.0}, r, ratio, {}), ShapeError);
  EXPECT_THROW(compute_vtrace(std::vector<double>{0.0}, std::vector<double>{}, std::vector<double>{}, {}),
               ShapeError);
  EXPECT_THROW(compute_vtrace(v, std::vector<double>{NAN}, ratio, {}), NumericError);
  EXPECT_THROW(compute_vtrace(v, r, std::vector<double>{0.0}, {}), ContractError);
  EXPECT_THROW(config(0.5, 1.0, 0.9).validate(), ConfigError);
  EXPECT_THROW(config(1.0, 1.0, 1.5).validate(), ConfigError);
  EXPECT_NO_THROW(VTraceConfig{}.validate());
}

TEST(VTraceConfig, DefaultCosts) {
  EXPECT_EQ(VTraceConfig{}.entropy_cost, 0.0006);
  EXPECT_EQ(VTraceConfig{}.baseline_cost, 0.5);
}

TEST(ValueGrad, Examples) {
  nn::Matrix x(1, 1, 2.0);
  EXPECT_EQ(value_grad_direction(std::vector<double>{5.0}, std::vector<double>{2.0}, x),
            std::vector<double>{-6.0});
  const std::vector<double> same{0.3, -1.0, 2.0};
  for (double g : value_grad_direction(same, same, nn::Matrix(3, 2, 1.0))) EXPECT_EQ(g, 0.0);
  EXPECT_EQ(value_loss_grad(std::vector<double>{5.0, 1.0}, std::vector<double>{2.0, 1.0}),
            (std::vector<double>{-3.0, 0.0}));
}

TEST(ValueGrad, MatchesFiniteDifferences) {
  Rng rng(6);
  for (int k = 0; k < 20; ++k) {
    const std::size_t n = 1 + rng.below(6), d = 1 + rng.below(4);
    nn::Matrix f(n, d);
    for (auto& v : f.data) v = rng.uniform(-1, 1);
    std::vector<double> w(d), targets(n);
    for (auto& v : w) v = rng.uniform(-1, 1);
    for (auto& v : targets) v = rng.uniform(-2, 2);
    auto predict = [&](const std::vector<double>& weights) {
      std::vector<double> p(n, 0.0);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) p[i] += f(i, j) * weights[j];
      return p;
    };
    auto loss = [&](const std::vector<double>& weights) {
      const auto p = predict(weights);
      double l = 0.0;
      for (std::size_t i = 0; i < n; ++i) l += 0.5 * (targets[i] - p[i]) * (targets[i] - p[i]);
      return l;
    };
    const auto g = value_grad_direction(targets, predict(w), f);
    for (std::size_t j = 0; j < d; ++j) {
      auto up = w, down = w;
      up[j] += 1e-6;
      down[j] -= 1e-6;
      EXPECT_LT(oracle::relative_error(g[j], (loss(up) - loss(down)) / 2e-6), 1e-6);
    }
  }
}

TEST(PolicyGrad, ZeroAdvantageAndNoEntropyIsZero) {
  nn::Matrix logits(3, 4, 0.2);
  logits(1, 2) = 1.5;
  const std::vector<std::size_t> actions{0, 2, 3};
  for (double g : policy_grad_direction(std::vector<double>(3, 0.0), logits, actions, 0.0).data) EXPECT_EQ(g, 0.0);
}

TEST(PolicyGrad, MatchesFiniteDifferences) {
  Rng rng(7);
  for (int k = 0; k < 30; ++k) {
    const std::size_t n = 1 + rng.below(4), a = 2 + rng.below(4);
    nn::Matrix logits(n, a);
    for (auto& v : logits.data) v = rng.uniform(-2, 2);
    std::vector<double> adv(n);
    std::vector<std::size_t> actions(n);
    for (std::size_t i = 0; i < n; ++i) {
      adv[i] = k == 0 ? 2.0 : rng.uniform(-2, 2);
      actions[i] = rng.below(a);
    }
    const double cost = k % 2 == 0 ? 0.0006 : 0.3;
    auto loss = [&](const nn::Matrix& z) {
      double l = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        double m = z(i, 0), s = 0.0;
        for (std::size_t j = 1; j < a; ++j) m = std::max(m, z(i, j));
        for (std::size_t j = 0; j < a; ++j) s += std::exp(z(i, j) - m);
        double h = 0.0;
        for (std::size_t j = 0; j < a; ++j) {
          const double lp = z(i, j) - m - std::log(s);
          h -= std::exp(lp) * lp;
        }
        l += -adv[i] * (z(i, actions[i]) - m - std::log(s)) - cost * h;
      }
      return l;
    };
    const auto g = policy_grad_direction(adv, logits, actions, cost);
    for (std::size_t i = 0; i < logits.data.size(); ++i) {
      auto up = logits, down = logits;
      up.data[i] += 1e-6;
      down.data[i] -= 1e-6;
      EXPECT_LT(oracle::relative_error(g.data[i], (loss(up) - loss(down)) / 2e-6), 1e-5);
    }
  }
}
