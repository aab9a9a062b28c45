#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>

namespace genrl::runtime {

struct TransitionLogLine {
  std::size_t actor = 0;
  std::uint64_t policy_version = 0;
  std::uint64_t episode = 0;
  std::uint64_t t = 0;
  int action = 0;
  double reward = 0.0;
  double behavior_log_prob = 0.0;
  bool done = false;
};

/// Append-only JSONL file, one transition per line.
class SegmentLog {
 public:
  SegmentLog() = default;
  /// Throws std::runtime_error if the file cannot be opened.
  explicit SegmentLog(const std::filesystem::path& path);

  bool enabled() const noexcept { return out_.is_open(); }
  void write(const TransitionLogLine& line);
  void flush();

 private:
  std::ofstream out_;
};

}  // namespace genrl::runtime
