#pragma once

#include <compare>
#include <string>
#include <string_view>
#include <vector>

namespace genrl::env {

struct Cell {
  int row = 0;
  int col = 0;
  auto operator<=>(const Cell&) const = default;
};

enum class Move : int { kNorth = 0, kSouth = 1, kEast = 2, kWest = 3, kNoop = 4 };

constexpr Cell moved(Cell c, Move m) noexcept {
  switch (m) {
    case Move::kNorth: return {c.row - 1, c.col};
    case Move::kSouth: return {c.row + 1, c.col};
    case Move::kEast: return {c.row, c.col + 1};
    case Move::kWest: return {c.row, c.col - 1};
    case Move::kNoop: return c;
  }
  return c;
}

constexpr Move kCardinalMoves[] = {Move::kNorth, Move::kSouth, Move::kEast, Move::kWest};

/// Splits a text map into rows, dropping a trailing empty line and '\r'.
/// Throws ParseError when the map is empty or ragged.
std::vector<std::string> split_map_rows(std::string_view text);

}  // namespace genrl::env
