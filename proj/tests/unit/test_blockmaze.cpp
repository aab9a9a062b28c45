#include <gtest/gtest.h>

#include <algorithm>
#include <vector>

#include "genrl/env/blockmaze.hpp"
#include "genrl/errors.hpp"
#include "genrl/rng.hpp"

using namespace genrl;
using namespace genrl::env;

namespace {

constexpr int N = 0, S = 1, E = 2, W = 3;

// Two Type-1 bugs on the corridors, one Type-2 bug on the wall south of (3,1).
constexpr const char* kScriptMaze =
    "#######\n"
    "#S..1.#\n"
    "#.###.#\n"
    "#.1...#\n"
    "#2##G.#\n"
    "#######\n";

struct Trace {
  std::vector<Cell> cells;
  std::vector<double> rewards;
  std::vector<std::vector<int>> events;
  bool operator==(const Trace&) const = default;
};

Trace rollout(const MazeSpec& spec, const std::vector<int>& actions, BlockmazeOptions options = {}) {
  Blockmaze env(spec, options);
  env.reset();
  Trace t;
  for (int a : actions) {
    if (env.done()) break;
    const auto r = env.step(a);
    t.cells.push_back(env.state().agent);
    t.rewards.push_back(r.reward);
    t.events.push_back(r.events);
  }
  return t;
}

}  // namespace

TEST(Maze, ShippedLayoutsHaveReachableGoals) {
  for (const auto& m : {default_maze(), small_maze()}) {
    const auto reach = reachable_cells(m);
    EXPECT_NE(std::find(reach.begin(), reach.end(), m.goal), reach.end());
    EXPECT_TRUE(m.bugs.empty());
  }
  EXPECT_EQ(default_maze().rows, 20);
  EXPECT_EQ(default_maze().cols, 20);
}

TEST(Maze, GeneratedLayoutsHaveBlockedBorderAndReachableGoal) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto m = generate_maze(12, 15, 0.3, seed);
    for (int c = 0; c < m.cols; ++c) {
      EXPECT_EQ(m.tile({0, c}), MazeTile::kBlock);
      EXPECT_EQ(m.tile({m.rows - 1, c}), MazeTile::kBlock);
    }
    const auto reach = reachable_cells(m);
    EXPECT_NE(std::find(reach.begin(), reach.end(), m.goal), reach.end());
    EXPECT_EQ(m, generate_maze(12, 15, 0.3, seed));
  }
}

TEST(InjectBugs, DeterministicAndWellPlaced) {
  const auto layout = default_maze();
  const auto reach = reachable_cells(layout);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto a = inject_bugs(layout, seed);
    EXPECT_EQ(a, inject_bugs(layout, seed));
    const auto other = inject_bugs(layout, seed + 1);
    if (other.bugs == a.bugs) EXPECT_EQ(other, inject_bugs(layout, seed + 1));
    ASSERT_EQ(a.bugs.size(), 25u);
    EXPECT_EQ(a.count_bugs(BugType::kExploratory), 13u);
    EXPECT_EQ(a.count_bugs(BugType::kInvalidLocation), 12u);
    std::vector<Cell> cells;
    for (const auto& b : a.bugs) {
      cells.push_back(b.cell);
      if (b.type == BugType::kExploratory) {
        EXPECT_EQ(a.tile(b.cell), MazeTile::kFree);
        EXPECT_NE(std::find(reach.begin(), reach.end(), b.cell), reach.end());
        EXPECT_NE(b.cell, a.start);
      } else {
        EXPECT_EQ(a.tile(b.cell), MazeTile::kBlock);
      }
    }
    std::sort(cells.begin(), cells.end());
    EXPECT_EQ(std::adjacent_find(cells.begin(), cells.end()), cells.end());
  }
}

TEST(InjectBugs, TinyLayoutIsAConfigError) {
  const auto tiny = parse_maze("S.G\n...\n...\n");
  EXPECT_THROW(inject_bugs(tiny, 0), ConfigError);
  EXPECT_THROW(inject_bugs(default_maze(), 0, {.bug_count = 25, .type1_fraction = 1.5}), ConfigError);
}

TEST(Blockmaze, BlockedMoveStaysInPlace) {
  Blockmaze env(parse_maze(kScriptMaze));
  env.reset();
  const auto r = env.step(N);
  EXPECT_EQ(env.state().agent, (Cell{1, 1}));
  EXPECT_EQ(r.reward, -1.0);
  EXPECT_FALSE(r.done);
}

TEST(Blockmaze, GoalPaysAndEnds) {
  const auto t = rollout(parse_maze(kScriptMaze), {E, E, E, E, S, S, W, S});
  ASSERT_EQ(t.rewards.size(), 8u);
  EXPECT_EQ(t.cells.back(), (Cell{4, 4}));
  EXPECT_EQ(t.rewards.back(), 100.0);
}

TEST(Blockmaze, TypeTwoBugEndsTheEpisodeWithoutMoving) {
  const auto spec = parse_maze(kScriptMaze);
  Blockmaze env(spec);
  env.reset();
  env.step(S);
  env.step(S);
  const auto r = env.step(S);
  EXPECT_TRUE(r.done);
  ASSERT_EQ(r.events.size(), 1u);
  EXPECT_EQ(r.events[0], spec.bug_at({4, 1}));
  EXPECT_EQ(env.state().agent, (Cell{3, 1}));
  EXPECT_THROW(env.step(E), StateError);
}

TEST(Blockmaze, StepCapEndsEpisode) {
  Blockmaze env(parse_maze(kScriptMaze), {.step_cap = 3});
  env.reset();
  EXPECT_FALSE(env.step(N).done);
  EXPECT_FALSE(env.step(N).done);
  EXPECT_TRUE(env.step(N).done);
}

TEST(Blockmaze, InvalidActionIsRejected) {
  Blockmaze env(small_maze());
  env.reset();
  EXPECT_THROW(env.step(4), std::out_of_range);
}

TEST(Blockmaze, ObservationMarksAgentAndHidesBugs) {
  Blockmaze env(parse_maze(kScriptMaze));
  const auto obs = env.reset();
  EXPECT_EQ(obs.rows, 6u);
  EXPECT_EQ(obs.cols, 7u);
  EXPECT_EQ(obs.at(1, 1), 3.0);
  EXPECT_EQ(obs.at(1, 4), 0.0);
  EXPECT_EQ(obs.at(4, 1), 1.0);
  EXPECT_EQ(obs.at(4, 4), 2.0);
}

TEST(BugCensus, ScriptedWalkCountsDistinctTypeOneBugs) {
  const auto spec = parse_maze(kScriptMaze);
  const std::vector<int> walk{E, E, E, W, E, E, S, S, W, W, W, E, W};
  const auto t = rollout(spec, walk);
  BugCensus census(spec);
  for (const auto& e : t.events) census.record(e);
  EXPECT_EQ(census.distinct(BugType::kExploratory), 2u);
  EXPECT_EQ(census.distinct(BugType::kInvalidLocation), 0u);
  EXPECT_EQ(census.total_triggers(), 4u);

  const auto once = rollout(spec, walk, {.retrigger_type1 = false});
  BugCensus first_only(spec);
  for (const auto& e : once.events) first_only.record(e);
  EXPECT_EQ(first_only.distinct(BugType::kExploratory), 2u);
  EXPECT_EQ(first_only.total_triggers(), 2u);
}

TEST(BugCensus, StationaryPolicyFindsNothing) {
  const auto spec = parse_maze(kScriptMaze);
  const auto t = rollout(spec, std::vector<int>(20, N));
  BugCensus census(spec);
  for (const auto& e : t.events) census.record(e);
  EXPECT_EQ(census.distinct(BugType::kExploratory), 0u);
  EXPECT_EQ(census.distinct(BugType::kInvalidLocation), 0u);
}

TEST(Blockmaze, RandomRolloutProperties) {
  const auto spec = inject_bugs(default_maze(), 3);
  Rng rng(11);
  BugCensus census(spec);
  std::size_t last_distinct = 0;
  for (int episode = 0; episode < 200; ++episode) {
    Blockmaze env(spec);
    env.reset();
    std::vector<int> actions;
    double ret = 0.0;
    bool goal = false;
    while (!env.done()) {
      actions.push_back(static_cast<int>(rng.below(4)));
      const auto r = env.step(actions.back());
      ret += r.reward;
      goal = goal || r.reward > 0;
      ASSERT_NE(spec.tile(env.state().agent), MazeTile::kBlock);
      census.record(r.events);
    }
    const int k = env.state().steps_taken;
    EXPECT_LE(k, 400);
    EXPECT_GE(ret, -400.0);
    if (goal) EXPECT_EQ(ret, 100.0 - (k - 1));
    else EXPECT_EQ(ret, -static_cast<double>(k));
    const std::size_t distinct = census.distinct_ids().size();
    EXPECT_GE(distinct, last_distinct);
    EXPECT_LE(distinct, 25u);
    last_distinct = distinct;
    EXPECT_EQ(rollout(spec, actions), rollout(spec, actions));
  }
}

TEST(MazeText, RoundTrips) {
  const auto spec = parse_maze(kScriptMaze);
  EXPECT_EQ(format_maze(spec), kScriptMaze);
  const auto bugged = inject_bugs(default_maze(), 7);
  EXPECT_EQ(parse_maze(format_maze(bugged)), bugged);
}

TEST(MazeText, RejectsMalformedMaps) {
  EXPECT_THROW(parse_maze("S.x\n..G\n"), ParseError);
  EXPECT_THROW(parse_maze("S..\n.G\n"), ParseError);
  EXPECT_THROW(parse_maze("...\n..G\n"), ParseError);
  EXPECT_THROW(parse_maze("S.S\n..G\n"), ParseError);
  EXPECT_THROW(parse_maze(""), ParseError);
}
