#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <span>
#include <string>

#include "genrl/nn/graph.hpp"

namespace genrl::nn {

// Text checkpoint layout (version 1):
//
//   genrl-checkpoint 1
//   meta <count>
//   <key> <value>                 (count lines, keys without whitespace)
//   params <count>
//   <name> <rows> <cols>          (per parameter, followed by)
//   <v00> <v01> ...               (one line per row, shortest round-trip decimal)
//
// Loading checks names and shapes against the receiving parameters in order.
using CheckpointMeta = std::map<std::string, double>;

void write_checkpoint(std::ostream& out, std::span<const Parameter* const> params,
                      const CheckpointMeta& meta = {});
/// Returns the stored metadata. Throws ParseError or ShapeError.
CheckpointMeta read_checkpoint(std::istream& in, std::span<Parameter* const> params);

void save_checkpoint(const std::filesystem::path& path, std::span<const Parameter* const> params,
                     const CheckpointMeta& meta = {});
CheckpointMeta load_checkpoint(const std::filesystem::path& path, std::span<Parameter* const> params);

}  // namespace genrl::nn
