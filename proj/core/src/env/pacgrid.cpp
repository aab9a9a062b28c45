#include "genrl/env/pacgrid.hpp"

#include <algorithm>
#include <stdexcept>

#include "genrl/errors.hpp"

namespace genrl::env {

namespace {

constexpr std::string_view kDefaultPacGrid =
    "###################\n"
    "#oooooooo#oooooooo#\n"
    "#o##o###o#o###o##o#\n"
    "#A##o###o#o###o##B#\n"
    "#ooooooooooooooooo#\n"
    "#o##o#o#####o#o##o#\n"
    "#oooo#ooo#ooo#oooo#\n"
    "####o###.#.###o####\n"
    "####o#...g...#o####\n"
    "####o#.#####.#o####\n"
    "#ooooo.......ooooo#\n"
    "####o#.#####.#o####\n"
    "####o#...g...#o####\n"
    "####o#.#####.#o####\n"
    "#oooooooo#oooooooo#\n"
    "#o##o###o#o###o##o#\n"
    "#Coo.ooooPooooo.oD#\n"
    "##o#o#o#####o#o#o##\n"
    "#oooo#ooo#ooo#oooo#\n"
    "#ooooooooooooooooo#\n"
    "###################\n";

}  // namespace

int PacGridSpec::gate_at(Cell c) const noexcept {
  for (std::size_t g = 0; g < gates.size(); ++g)
    if (gates[g] == c) return static_cast<int>(g) + 1;
  return 0;
}

std::size_t PacGridSpec::dot_count() const noexcept {
  return static_cast<std::size_t>(std::count(dots.begin(), dots.end(), std::uint8_t{1}));
}

PacGridSpec parse_pacgrid(std::string_view text) {
  const auto lines = split_map_rows(text);
  PacGridSpec spec;
  spec.rows = static_cast<int>(lines.size());
  spec.cols = static_cast<int>(lines.front().size());
  spec.walls.assign(static_cast<std::size_t>(spec.rows * spec.cols), 0);
  spec.dots.assign(spec.walls.size(), 0);
  std::array<int, 4> gate_seen{};
  int pacs = 0;
  for (int r = 0; r < spec.rows; ++r) {
    for (int c = 0; c < spec.cols; ++c) {
      const Cell cell{r, c};
      const char ch = lines[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
      switch (ch) {
        case '#': spec.walls[spec.index(cell)] = 1; break;
        case '.': break;
        case 'o': spec.dots[spec.index(cell)] = 1; break;
        case 'P':
          spec.pac_start = cell;
          ++pacs;
          break;
        case 'g': spec.ghost_starts.push_back(cell); break;
        case 'A': case 'B': case 'C': case 'D': {
          const int g = ch - 'A';
          spec.gates[static_cast<std::size_t>(g)] = cell;
          ++gate_seen[static_cast<std::size_t>(g)];
          break;
        }
        default: throw ParseError(std::string("pacgrid: unknown glyph '") + ch + "'");
      }
    }
  }
  if (pacs != 1) throw ParseError("pacgrid: need exactly one P");
  for (int n : gate_seen) {
    if (n != 1) throw ParseError("pacgrid: need exactly one of each gate A..D");
  }
  return spec;
}

std::string format_pacgrid(const PacGridSpec& spec) {
  std::string out;
  for (int r = 0; r < spec.rows; ++r) {
    for (int c = 0; c < spec.cols; ++c) {
      const Cell cell{r, c};
      char ch = '.';
      if (spec.walls[spec.index(cell)]) ch = '#';
      else if (const int g = spec.gate_at(cell)) ch = static_cast<char>('A' + g - 1);
      else if (cell == spec.pac_start) ch = 'P';
      else if (std::find(spec.ghost_starts.begin(), spec.ghost_starts.end(), cell) != spec.ghost_starts.end()) ch = 'g';
      else if (spec.dots[spec.index(cell)]) ch = 'o';
      out.push_back(ch);
    }
    out.push_back('\n');
  }
  return out;
}

PacGridSpec default_pacgrid() { return parse_pacgrid(kDefaultPacGrid); }

PacGrid::PacGrid(PacGridSpec spec, PacGridOptions options) : spec_(std::move(spec)), options_(options) {
  if (spec_.walls.size() != static_cast<std::size_t>(spec_.rows * spec_.cols) || spec_.dots.size() != spec_.walls.size()) {
    throw ConfigError("pacgrid: malformed spec");
  }
  for (std::size_t i = 0; i < spec_.dots.size(); ++i) {
    if (spec_.dots[i] && spec_.walls[i]) throw ConfigError("pacgrid: dot on a wall cell");
  }
  for (const Cell& g : spec_.gates) {
    if (spec_.wall(g)) throw ConfigError("pacgrid: gate on a wall cell");
  }
  if (spec_.wall(spec_.pac_start)) throw ConfigError("pacgrid: pac starts on a wall");
  if (options_.step_cap < 0) throw ConfigError("pacgrid: negative step cap");
  reset(0);
}

Observation PacGrid::reset(std::uint64_t seed) {
  state_ = PacGridState{};
  state_.pac = spec_.pac_start;
  state_.dots = spec_.dots;
  state_.dots_remaining = spec_.dot_count();
  initial_dots_ = state_.dots_remaining;
  bounties_this_episode_ = 0;
  ghost_rng_ = Rng(mix64(spec_.ghost_policy_seed) ^ seed, 0x67686f7374);
  if (options_.ghosts_enabled) {
    state_.ghosts = spec_.ghost_starts;
    for (std::size_t g = 0; g < state_.ghosts.size(); ++g) {
      std::vector<Move> valid;
      for (Move m : kCardinalMoves)
        if (!spec_.wall(moved(state_.ghosts[g], m))) valid.push_back(m);
      state_.ghost_headings.push_back(valid.empty() ? Move::kNoop
                                                    : valid[ghost_rng_.at(g) % valid.size()]);
    }
  }
  if (options_.rearm == GateRearm::kPerEpisode) evaluation_gates_.clear();
  return observe();
}

Observation PacGrid::observe() const {
  std::vector<double> v(spec_.walls.size(), 0.0);
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (spec_.walls[i]) v[i] = 1.0;
    else if (state_.dots[i]) v[i] = 2.0;
  }
  for (const Cell& g : spec_.gates) v[spec_.index(g)] = 3.0;
  v[spec_.index(state_.pac)] = 4.0;
  for (const Cell& g : state_.ghosts) v[spec_.index(g)] = 5.0;
  return Observation(static_cast<std::size_t>(spec_.rows), static_cast<std::size_t>(spec_.cols), std::move(v));
}

bool PacGrid::ghost_contact() const {
  return std::find(state_.ghosts.begin(), state_.ghosts.end(), state_.pac) != state_.ghosts.end();
}

void PacGrid::move_ghosts() {
  const std::size_t n = state_.ghosts.size();
  for (std::size_t g = 0; g < n; ++g) {
    Cell& cell = state_.ghosts[g];
    Move& heading = state_.ghost_headings[g];
    std::vector<Move> valid;
    for (Move m : kCardinalMoves)
      if (!spec_.wall(moved(cell, m))) valid.push_back(m);
    if (valid.empty()) continue;
    // Two draws per ghost per step, addressed by step index.
    const std::uint64_t base = (static_cast<std::uint64_t>(state_.steps_taken) * n + g) * 2 + 64;
    const bool can_continue = std::find(valid.begin(), valid.end(), heading) != valid.end();
    if (!(can_continue && Rng::to_unit(ghost_rng_.at(base)) < options_.ghost_continue_prob)) {
      heading = valid[ghost_rng_.at(base + 1) % valid.size()];
    }
    cell = moved(cell, heading);
  }
}

StepResult PacGrid::step(int action) {
  if (state_.done) throw StateError("pacgrid: step after episode end");
  if (action < 0 || action >= 5) throw std::out_of_range("pacgrid: action " + std::to_string(action));
  StepResult out;
  const Cell target = moved(state_.pac, static_cast<Move>(action));
  if (!spec_.wall(target)) state_.pac = target;

  bool contact = ghost_contact();
  if (!contact) {
    move_ghosts();
    contact = ghost_contact();
  }
  ++state_.steps_taken;

  if (contact) {
    state_.done = true;
  } else {
    const std::size_t idx = spec_.index(state_.pac);
    if (state_.dots[idx]) {
      state_.dots[idx] = 0;
      --state_.dots_remaining;
      out.reward += options_.dot_reward;
    }
    if (const int gate = spec_.gate_at(state_.pac)) {
      out.events.push_back(gate);
      state_.triggered_gates.insert(gate);
      if (evaluation_gates_.insert(gate).second) {
        out.reward += options_.gate_bounty;
        ++bounties_this_episode_;
      }
    }
    if (state_.dots_remaining == 0) state_.done = true;
  }
  if (options_.step_cap > 0 && state_.steps_taken >= options_.step_cap) state_.done = true;
  state_.score += out.reward;
  out.done = state_.done;
  out.observation = observe();
  return out;
}

void GateCensus::record(std::span<const int> gate_events) {
  for (int g : gate_events) {
    if (g < 1 || g > 4) throw std::out_of_range("gate census: gate " + std::to_string(g));
    ++entries_[static_cast<std::size_t>(g - 1)];
    if (episode_seen_.insert(g).second) ++per_episode_[static_cast<std::size_t>(g - 1)];
    seen_.insert(g);
  }
}

void GateCensus::end_episode() { episode_seen_.clear(); }

std::array<std::size_t, 4> GateCensus::evaluation_distinct() const noexcept {
  std::array<std::size_t, 4> out{};
  for (int g : seen_) out[static_cast<std::size_t>(g - 1)] = 1;
  return out;
}

}  // namespace genrl::env
