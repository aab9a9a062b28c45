#include "genrl/env/grid.hpp"

#include "genrl/errors.hpp"

namespace genrl::env {

std::vector<std::string> split_map_rows(std::string_view text) {
  std::vector<std::string> rows;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t nl = text.find('\n', pos);
    std::string line(text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos));
    if (!line.empty() && line.back() == '\r') line.pop_back();
    rows.push_back(std::move(line));
    if (nl == std::string_view::npos) break;
    pos = nl + 1;
  }
  while (!rows.empty() && rows.back().empty()) rows.pop_back();
  if (rows.empty()) throw ParseError("map: empty");
  for (const auto& r : rows) {
    if (r.size() != rows.front().size() || r.empty()) throw ParseError("map: rows must be non-empty and equal length");
  }
  return rows;
}

}  // namespace genrl::env
