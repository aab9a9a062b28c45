#include <gtest/gtest.h>

#include <queue>
#include <vector>

#include "genrl/env/pacgrid.hpp"
#include "genrl/errors.hpp"
#include "genrl/rng.hpp"

using namespace genrl;
using namespace genrl::env;

namespace {

constexpr int N = 0, S = 1, E = 2, W = 3, NOOP = 4;

constexpr const char* kSmallGrid =
    "#######\n"
    "#Po.A.#\n"
    "#.###o#\n"
    "#B.g.C#\n"
    "#o.Do.#\n"
    "#######\n";

PacGridOptions no_ghosts() {
  PacGridOptions o;
  o.ghosts_enabled = false;
  return o;
}

// First move on a shortest wall-free path from the pac to the nearest dot.
int toward_nearest_dot(const PacGrid& env) {
  const auto& spec = env.spec();
  const auto& st = env.state();
  std::vector<int> first(spec.walls.size(), -1);
  std::queue<Cell> q;
  for (int a = 0; a < 4; ++a) {
    const Cell n = moved(st.pac, static_cast<Move>(a));
    if (spec.wall(n) || first[spec.index(n)] >= 0) continue;
    first[spec.index(n)] = a;
    q.push(n);
  }
  while (!q.empty()) {
    const Cell c = q.front();
    q.pop();
    if (st.dots[spec.index(c)]) return first[spec.index(c)];
    for (Move m : kCardinalMoves) {
      const Cell n = moved(c, m);
      if (spec.wall(n) || first[spec.index(n)] >= 0 || n == st.pac) continue;
      first[spec.index(n)] = first[spec.index(c)];
      q.push(n);
    }
  }
  return NOOP;
}

}  // namespace

TEST(PacGridLayout, DefaultLayoutFacts) {
  const auto spec = default_pacgrid();
  EXPECT_EQ(spec.rows, 21);
  EXPECT_EQ(spec.cols, 19);
  EXPECT_EQ(spec.gate_at({3, 1}), 1);
  EXPECT_EQ(spec.gate_at({3, 17}), 2);
  EXPECT_EQ(spec.gate_at({16, 1}), 3);
  EXPECT_EQ(spec.gate_at({16, 17}), 4);
  EXPECT_EQ(spec.ghost_starts.size(), 2u);
  for (std::size_t i = 0; i < spec.dots.size(); ++i)
    if (spec.dots[i]) EXPECT_EQ(spec.walls[i], 0);
}

TEST(PacGrid, DotPaysOneAndDecrements) {
  PacGrid env(parse_pacgrid(kSmallGrid), no_ghosts());
  const auto before = env.state().dots_remaining;
  const auto r = env.step(E);
  EXPECT_EQ(r.reward, 1.0);
  EXPECT_EQ(env.state().dots_remaining, before - 1);
  EXPECT_EQ(env.step(W).reward, 0.0);
}

TEST(PacGrid, NoopInEmptyCorridorPaysNothing) {
  PacGrid env(parse_pacgrid(kSmallGrid), no_ghosts());
  const auto r = env.step(NOOP);
  EXPECT_EQ(r.reward, 0.0);
  EXPECT_TRUE(r.events.empty());
}

TEST(PacGrid, GateBountyPaidOncePerEvaluation) {
  PacGrid env(parse_pacgrid(kSmallGrid), no_ghosts());
  env.step(E);
  env.step(E);
  auto r = env.step(E);
  EXPECT_EQ(r.reward, 50.0);
  EXPECT_EQ(r.events, std::vector<int>{1});
  env.step(W);
  r = env.step(E);
  EXPECT_EQ(r.reward, 0.0);
  EXPECT_EQ(r.events, std::vector<int>{1});

  env.reset();
  env.step(S);
  r = env.step(S);
  EXPECT_EQ(r.events, std::vector<int>{2});
  EXPECT_EQ(r.reward, 50.0);
  env.step(N);
  EXPECT_EQ(env.step(S).reward, 0.0);

  env.reset();
  for (int a : {E, E, E}) r = env.step(a);
  EXPECT_EQ(r.reward, 0.0);
  env.begin_evaluation();
  env.step(W);
  EXPECT_EQ(env.step(E).reward, 50.0);
}

TEST(PacGrid, PerEpisodeRearmRepaysAfterReset) {
  auto opts = no_ghosts();
  opts.rearm = GateRearm::kPerEpisode;
  PacGrid env(parse_pacgrid(kSmallGrid), opts);
  StepResult r;
  for (int a : {E, E, E}) r = env.step(a);
  EXPECT_EQ(r.reward, 50.0);
  env.reset();
  for (int a : {E, E, E}) r = env.step(a);
  EXPECT_EQ(r.reward, 50.0);
}

TEST(PacGrid, WallsBlockAndStepAfterDoneThrows) {
  auto opts = no_ghosts();
  opts.step_cap = 2;
  PacGrid env(parse_pacgrid(kSmallGrid), opts);
  env.step(N);
  EXPECT_EQ(env.state().pac, (Cell{1, 1}));
  EXPECT_TRUE(env.step(W).done);
  EXPECT_THROW(env.step(NOOP), StateError);
}

TEST(PacGrid, GhostContactEndsEpisodeWithZeroReward) {
  const auto spec = parse_pacgrid("#########\n#Pg.ABCD#\n#########\n");
  PacGrid env(spec);
  const auto r = env.step(E);
  EXPECT_TRUE(r.done);
  EXPECT_EQ(r.reward, 0.0);
}

TEST(PacGrid, GhostTrajectoriesIgnorePacActions) {
  const auto spec = default_pacgrid();
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    PacGrid a(spec), b(spec);
    a.reset(seed);
    b.reset(seed);
    Rng rng(seed);
    for (int t = 0; t < 200 && !a.done() && !b.done(); ++t) {
      a.step(static_cast<int>(rng.below(5)));
      b.step(NOOP);
      if (a.done() || b.done()) break;
      ASSERT_EQ(a.state().ghosts, b.state().ghosts);
    }
    PacGrid c(spec);
    c.reset(seed);
    PacGrid d(spec);
    d.reset(seed);
    for (int t = 0; t < 50 && !c.done(); ++t) {
      c.step(NOOP);
      d.step(NOOP);
      ASSERT_EQ(c.state().ghosts, d.state().ghosts);
    }
  }
}

TEST(PacGrid, ScoreIsDotsPlusFiftyPerFirstGateEntry) {
  const auto spec = default_pacgrid();
  PacGrid env(spec);
  env.begin_evaluation();
  Rng rng(21);
  double total = 0.0;
  std::size_t dots = 0;
  std::set<int> gates;
  for (int episode = 0; episode < 30; ++episode) {
    env.reset(static_cast<std::uint64_t>(episode));
    while (!env.done()) {
      const auto r = env.step(static_cast<int>(rng.below(5)));
      total += r.reward;
      gates.insert(r.events.begin(), r.events.end());
    }
    dots += env.dots_eaten();
    EXPECT_EQ(env.state().score, static_cast<double>(env.dots_eaten()) + 50.0 * env.bounties_paid());
  }
  EXPECT_EQ(total, static_cast<double>(dots) + 50.0 * static_cast<double>(gates.size()));
}

TEST(PacGrid, DotsRemainingNeverIncreases) {
  PacGrid env(default_pacgrid());
  Rng rng(2);
  for (int episode = 0; episode < 10; ++episode) {
    env.reset(static_cast<std::uint64_t>(episode));
    std::size_t last = env.state().dots_remaining;
    while (!env.done()) {
      env.step(static_cast<int>(rng.below(5)));
      EXPECT_LE(env.state().dots_remaining, last);
      last = env.state().dots_remaining;
    }
  }
}

TEST(PacGrid, GhostFreeSweepClearsEveryDot) {
  auto opts = no_ghosts();
  opts.step_cap = 0;
  PacGrid env(default_pacgrid(), opts);
  int steps = 0;
  while (!env.done() && steps < 100000) {
    env.step(toward_nearest_dot(env));
    ++steps;
  }
  EXPECT_TRUE(env.done());
  EXPECT_EQ(env.state().dots_remaining, 0u);
}

TEST(GateCensus, StationaryPolicyCountsNothing) {
  PacGrid env(parse_pacgrid(kSmallGrid), no_ghosts());
  GateCensus census;
  for (int t = 0; t < 20; ++t) census.record(env.step(NOOP).events);
  EXPECT_EQ(census.entries(), (std::array<std::size_t, 4>{0, 0, 0, 0}));
}

TEST(GateCensus, ScriptedTourCountsVisits) {
  PacGrid env(parse_pacgrid(kSmallGrid), no_ghosts());
  GateCensus census;
  // Gate 1 entered three times, gate 2 twice.
  for (int a : {E, E, E, W, E, W, E, W, W, W, S, S, N, S}) census.record(env.step(a).events);
  census.end_episode();
  EXPECT_EQ(census.entries(), (std::array<std::size_t, 4>{3, 2, 0, 0}));
  EXPECT_EQ(census.per_episode_distinct(), (std::array<std::size_t, 4>{1, 1, 0, 0}));
  env.reset();
  for (int a : {E, E, E}) census.record(env.step(a).events);
  census.end_episode();
  EXPECT_EQ(census.per_episode_distinct(), (std::array<std::size_t, 4>{2, 1, 0, 0}));
  EXPECT_EQ(census.evaluation_distinct(), (std::array<std::size_t, 4>{1, 1, 0, 0}));
  EXPECT_THROW(census.record(std::vector<int>{5}), std::out_of_range);
}

TEST(PacGridText, RoundTripsAndRejectsMalformed) {
  EXPECT_EQ(format_pacgrid(parse_pacgrid(kSmallGrid)), kSmallGrid);
  const auto spec = default_pacgrid();
  EXPECT_EQ(parse_pacgrid(format_pacgrid(spec)), spec);
  EXPECT_THROW(parse_pacgrid("#P#\n#x#\n"), ParseError);
  EXPECT_THROW(parse_pacgrid("#P.A#\n#BC.#\n"), ParseError);
}
