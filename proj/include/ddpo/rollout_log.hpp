#pragma once

// JSON-lines rollout log. One line per group:
//   {"query_id":..., "class_id":..., "step":..., "rollouts":[{"length","correct","action_index","old_prob"}]}

#include <cstdint>
#include <istream>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ddpo/core.hpp"

namespace ddpo {

struct LoggedBatch {
  std::int64_t step = 0;
  Batch batch;
};

inline nlohmann::json group_to_json(const RolloutGroup& group, std::int64_t step) {
  nlohmann::json rollouts = nlohmann::json::array();
  for (const auto& r : group.rollouts()) {
    rollouts.push_back({{"length", r.length()},
                        {"correct", r.correct()},
                        {"action_index", r.action_index()},
                        {"old_prob", r.old_prob()}});
  }
  nlohmann::json j;
  j["query_id"] = group.query_id();
  j["class_id"] = group.class_id();
  j["step"] = step;
  j["rollouts"] = std::move(rollouts);
  return j;
}

inline RolloutGroup group_from_json(const nlohmann::json& j) {
  std::vector<Rollout> rollouts;
  for (const auto& r : j.at("rollouts")) {
    rollouts.emplace_back(r.at("length").get<int>(), r.at("correct").get<bool>(), r.at("action_index").get<int>(),
                          r.at("old_prob").get<double>());
  }
  return RolloutGroup(j.at("query_id").get<std::string>(), j.at("class_id").get<std::string>(), std::move(rollouts));
}

inline void write_batch_jsonl(std::ostream& out, const Batch& batch, std::int64_t step) {
  for (const auto& g : batch.groups()) out << group_to_json(g, step).dump() << '\n';
}

// Reads every line of a rollout log and regroups the lines by step, in ascending step order.
inline std::vector<LoggedBatch> read_rollout_log(std::istream& in) {
  std::map<std::int64_t, std::vector<RolloutGroup>> by_step;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      auto j = nlohmann::json::parse(line);
      by_step[j.at("step").get<std::int64_t>()].push_back(group_from_json(j));
    } catch (const nlohmann::json::exception& e) {
      throw InvariantError("rollout log line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  std::vector<LoggedBatch> out;
  out.reserve(by_step.size());
  for (auto& [step, groups] : by_step) out.push_back({step, Batch(std::move(groups))});
  return out;
}

}  // namespace ddpo
