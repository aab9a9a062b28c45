#include "genrl/runtime/segment_log.hpp"

#include <stdexcept>

#include "json.hpp"

namespace genrl::runtime {

SegmentLog::SegmentLog(const std::filesystem::path& path) : out_(path, std::ios::trunc) {
  if (!out_) throw std::runtime_error("segment log: cannot open " + path.string());
}

void SegmentLog::write(const TransitionLogLine& line) {
  if (!out_.is_open()) return;
  nlohmann::ordered_json j;
  j["actor"] = line.actor;
  j["policy_version"] = line.policy_version;
  j["episode"] = line.episode;
  j["t"] = line.t;
  j["action"] = line.action;
  j["reward"] = line.reward;
  j["behavior_log_prob"] = line.behavior_log_prob;
  j["done"] = line.done;
  out_ << j.dump() << '\n';
}

void SegmentLog::flush() {
  if (out_.is_open()) out_.flush();
}

}  // namespace genrl::runtime
