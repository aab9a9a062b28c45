#include "genrl/env/blockmaze.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <stdexcept>

#include "genrl/errors.hpp"

namespace genrl::env {

namespace {

constexpr std::string_view kDefaultMaze =
    "####################\n"
    "#S.....#.......#...#\n"
    "#.###..#.#####.#.#.#\n"
    "#.#....#.....#...#.#\n"
    "#.#.######.#.###.#.#\n"
    "#...#......#...#.#.#\n"
    "###.#.####.###.#...#\n"
    "#...#....#...#.###.#\n"
    "#.######.###.#.....#\n"
    "#......#...#.#####.#\n"
    "#.####.###.#.....#.#\n"
    "#.#..........###.#.#\n"
    "#.#.#######.#....#.#\n"
    "#...#.....#.#.####.#\n"
    "###.#.###.#.#......#\n"
    "#...#...#...#.####.#\n"
    "#.#####.#####.#....#\n"
    "#.......#.....#.##.#\n"
    "#.#####...###.....G#\n"
    "####################\n";

constexpr std::string_view kSmallMaze =
    "##########\n"
    "#S...#...#\n"
    "#.##.#.#.#\n"
    "#.#..#.#.#\n"
    "#.#.##.#.#\n"
    "#...#..#.#\n"
    "###.#.##.#\n"
    "#...#....#\n"
    "#.#...##G#\n"
    "##########\n";

}  // namespace

int MazeSpec::bug_at(Cell c) const noexcept {
  for (const auto& b : bugs)
    if (b.cell == c) return b.id;
  return -1;
}

std::size_t MazeSpec::count_bugs(BugType type) const noexcept {
  return static_cast<std::size_t>(
      std::count_if(bugs.begin(), bugs.end(), [type](const MazeBug& b) { return b.type == type; }));
}

MazeSpec parse_maze(std::string_view text) {
  const auto lines = split_map_rows(text);
  MazeSpec spec;
  spec.rows = static_cast<int>(lines.size());
  spec.cols = static_cast<int>(lines.front().size());
  spec.tiles.assign(static_cast<std::size_t>(spec.rows * spec.cols), MazeTile::kFree);
  int starts = 0, goals = 0;
  for (int r = 0; r < spec.rows; ++r) {
    for (int c = 0; c < spec.cols; ++c) {
      const Cell cell{r, c};
      switch (lines[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)]) {
        case '.': break;
        case '#': spec.tile(cell) = MazeTile::kBlock; break;
        case 'G':
          spec.tile(cell) = MazeTile::kGoal;
          spec.goal = cell;
          ++goals;
          break;
        case 'S':
          spec.start = cell;
          ++starts;
          break;
        case '1':
          spec.bugs.push_back({static_cast<int>(spec.bugs.size()), cell, BugType::kExploratory});
          break;
        case '2':
          spec.tile(cell) = MazeTile::kBlock;
          spec.bugs.push_back({static_cast<int>(spec.bugs.size()), cell, BugType::kInvalidLocation});
          break;
        default:
          throw ParseError(std::string("maze: unknown glyph '") + lines[r][c] + "'");
      }
    }
  }
  if (starts != 1 || goals != 1) throw ParseError("maze: need exactly one S and one G");
  return spec;
}

std::string format_maze(const MazeSpec& spec) {
  std::string out;
  out.reserve(static_cast<std::size_t>(spec.rows * (spec.cols + 1)));
  for (int r = 0; r < spec.rows; ++r) {
    for (int c = 0; c < spec.cols; ++c) {
      const Cell cell{r, c};
      const int bug = spec.bug_at(cell);
      char ch = '.';
      if (bug >= 0) {
        ch = spec.bugs[static_cast<std::size_t>(bug)].type == BugType::kExploratory ? '1' : '2';
      } else if (cell == spec.start) {
        ch = 'S';
      } else if (spec.tile(cell) == MazeTile::kBlock) {
        ch = '#';
      } else if (spec.tile(cell) == MazeTile::kGoal) {
        ch = 'G';
      }
      out.push_back(ch);
    }
    out.push_back('\n');
  }
  return out;
}

MazeSpec default_maze() { return parse_maze(kDefaultMaze); }
MazeSpec small_maze() { return parse_maze(kSmallMaze); }

std::vector<Cell> reachable_cells(const MazeSpec& spec) {
  std::vector<char> seen(spec.tiles.size(), 0);
  std::vector<Cell> out;
  std::queue<Cell> frontier;
  frontier.push(spec.start);
  seen[static_cast<std::size_t>(spec.start.row * spec.cols + spec.start.col)] = 1;
  while (!frontier.empty()) {
    const Cell c = frontier.front();
    frontier.pop();
    out.push_back(c);
    for (Move m : kCardinalMoves) {
      const Cell n = moved(c, m);
      if (!spec.in_bounds(n) || spec.tile(n) == MazeTile::kBlock) continue;
      auto& s = seen[static_cast<std::size_t>(n.row * spec.cols + n.col)];
      if (s) continue;
      s = 1;
      frontier.push(n);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

MazeSpec generate_maze(int rows, int cols, double block_density, std::uint64_t seed) {
  if (rows < 3 || cols < 3) throw ConfigError("generate_maze: need at least 3x3");
  if (block_density < 0.0 || block_density >= 1.0) throw ConfigError("generate_maze: density outside [0, 1)");
  Rng rng(seed, 0x6d617a65);
  for (int attempt = 0; attempt < 1000; ++attempt) {
    MazeSpec spec;
    spec.rows = rows;
    spec.cols = cols;
    spec.seed = seed;
    spec.tiles.assign(static_cast<std::size_t>(rows * cols), MazeTile::kFree);
    for (int r = 0; r < rows; ++r) {
      for (int c = 0; c < cols; ++c) {
        const bool border = r == 0 || c == 0 || r == rows - 1 || c == cols - 1;
        if (border || rng.bernoulli(block_density)) spec.tile({r, c}) = MazeTile::kBlock;
      }
    }
    spec.start = {1, 1};
    spec.goal = {rows - 2, cols - 2};
    spec.tile(spec.start) = MazeTile::kFree;
    spec.tile(spec.goal) = MazeTile::kGoal;
    const auto reach = reachable_cells(spec);
    if (std::binary_search(reach.begin(), reach.end(), spec.goal)) return spec;
  }
  throw ConfigError("generate_maze: no layout with a reachable goal after 1000 attempts");
}

MazeSpec inject_bugs(MazeSpec layout, std::uint64_t seed, BugInjectionOptions options) {
  if (options.bug_count < 0) throw ConfigError("inject_bugs: negative bug count");
  if (options.type1_fraction < 0.0 || options.type1_fraction > 1.0) {
    throw ConfigError("inject_bugs: type1_fraction outside [0, 1]");
  }
  // Any glyph-level bugs on the layout are replaced; Type-2 cells stay blocks.
  layout.bugs.clear();
  layout.seed = seed;

  const auto reach = reachable_cells(layout);
  std::vector<Cell> type1_pool;
  for (const Cell& c : reach) {
    if (c != layout.start && c != layout.goal && layout.tile(c) == MazeTile::kFree) type1_pool.push_back(c);
  }
  std::set<Cell> type2_set;
  for (const Cell& c : reach) {
    for (Move m : kCardinalMoves) {
      const Cell n = moved(c, m);
      if (layout.in_bounds(n) && layout.tile(n) == MazeTile::kBlock) type2_set.insert(n);
    }
  }
  std::vector<Cell> type2_pool(type2_set.begin(), type2_set.end());

  const int n1 = static_cast<int>(std::lround(options.bug_count * options.type1_fraction));
  const int n2 = options.bug_count - n1;
  if (static_cast<std::size_t>(n1) > type1_pool.size() || static_cast<std::size_t>(n2) > type2_pool.size()) {
    throw ConfigError("inject_bugs: layout has " + std::to_string(type1_pool.size()) + " Type-1 and " +
                      std::to_string(type2_pool.size()) + " Type-2 candidate cells; need " +
                      std::to_string(n1) + " and " + std::to_string(n2));
  }

  Rng rng(seed, 0x62756773);
  auto draw = [&rng](std::vector<Cell>& pool, int count) {
    // Partial Fisher-Yates.
    for (int i = 0; i < count; ++i) {
      const std::size_t j = static_cast<std::size_t>(i) + rng.below(pool.size() - static_cast<std::size_t>(i));
      std::swap(pool[static_cast<std::size_t>(i)], pool[j]);
    }
    return std::vector<Cell>(pool.begin(), pool.begin() + count);
  };
  for (const Cell& c : draw(type1_pool, n1)) layout.bugs.push_back({0, c, BugType::kExploratory});
  for (const Cell& c : draw(type2_pool, n2)) layout.bugs.push_back({0, c, BugType::kInvalidLocation});
  // Row-major ids, matching the parser, so the text form round-trips.
  std::sort(layout.bugs.begin(), layout.bugs.end(), [](const MazeBug& a, const MazeBug& b) { return a.cell < b.cell; });
  for (std::size_t i = 0; i < layout.bugs.size(); ++i) layout.bugs[i].id = static_cast<int>(i);
  return layout;
}

Blockmaze::Blockmaze(MazeSpec spec, BlockmazeOptions options)
    : spec_(std::move(spec)), options_(options) {
  if (spec_.rows <= 0 || spec_.cols <= 0 ||
      spec_.tiles.size() != static_cast<std::size_t>(spec_.rows * spec_.cols)) {
    throw ConfigError("blockmaze: malformed spec");
  }
  if (options_.step_cap <= 0) throw ConfigError("blockmaze: step cap must be positive");
  bug_index_.assign(spec_.tiles.size(), -1);
  for (const auto& b : spec_.bugs) {
    if (!spec_.in_bounds(b.cell)) throw ConfigError("blockmaze: bug outside the grid");
    bug_index_[static_cast<std::size_t>(b.cell.row * spec_.cols + b.cell.col)] = b.id;
  }
  reset(spec_.seed);
}

Observation Blockmaze::reset(std::uint64_t) {
  state_ = MazeState{};
  state_.agent = spec_.start;
  return observe();
}

Observation Blockmaze::observe() const {
  std::vector<double> v(spec_.tiles.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = static_cast<double>(spec_.tiles[i]);
  v[static_cast<std::size_t>(state_.agent.row * spec_.cols + state_.agent.col)] = 3.0;
  return Observation(static_cast<std::size_t>(spec_.rows), static_cast<std::size_t>(spec_.cols), std::move(v));
}

StepResult Blockmaze::step(int action) {
  if (state_.done) throw StateError("blockmaze: step after episode end");
  if (action < 0 || action >= 4) throw std::out_of_range("blockmaze: action " + std::to_string(action));
  StepResult out;
  out.reward = options_.step_penalty;
  ++state_.steps_taken;

  const Cell target = moved(state_.agent, static_cast<Move>(action));
  if (spec_.in_bounds(target)) {
    const int bug = bug_index_[static_cast<std::size_t>(target.row * spec_.cols + target.col)];
    const MazeBug* b = bug >= 0 ? &spec_.bugs[static_cast<std::size_t>(bug)] : nullptr;
    if (b != nullptr && b->type == BugType::kInvalidLocation) {
      out.events.push_back(b->id);
      state_.triggered_bugs.insert(b->id);
      state_.done = true;
    } else if (spec_.tile(target) != MazeTile::kBlock) {
      state_.agent = target;
      if (spec_.tile(target) == MazeTile::kGoal) {
        out.reward = options_.goal_reward;
        state_.done = true;
      } else if (b != nullptr) {
        const bool fresh = state_.triggered_bugs.insert(b->id).second;
        if (fresh || options_.retrigger_type1) out.events.push_back(b->id);
      }
    }
  }
  if (state_.steps_taken >= options_.step_cap) state_.done = true;
  out.done = state_.done;
  out.observation = observe();
  return out;
}

BugCensus::BugCensus(const MazeSpec& spec) {
  types_.resize(spec.bugs.size());
  for (const auto& b : spec.bugs) types_.at(static_cast<std::size_t>(b.id)) = b.type;
}

void BugCensus::record(std::span<const int> bug_events) {
  for (int id : bug_events) {
    const BugType t = types_.at(static_cast<std::size_t>(id));
    seen_.insert(id);
    ++total_;
    ++per_type_[t == BugType::kExploratory ? 0 : 1];
  }
}

std::size_t BugCensus::distinct(BugType type) const noexcept {
  return static_cast<std::size_t>(std::count_if(
      seen_.begin(), seen_.end(), [&](int id) { return types_[static_cast<std::size_t>(id)] == type; }));
}

std::size_t BugCensus::triggers(BugType type) const noexcept {
  return per_type_[type == BugType::kExploratory ? 0 : 1];
}

}  // namespace genrl::env
