#pragma once

// Domain types shared across the ddpo library: rollouts, groups, batches and
// the shaping / optimizer configuration blocks.

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

namespace ddpo {

// Raised for malformed configuration; the message names the offending field.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Raised when a constructed value would violate a type invariant.
class InvariantError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// One abstract rollout: a single length-bin action and its outcome.
class Rollout {
 public:
  Rollout(int length, bool correct, int action_index, double old_prob)
      : length_(length), correct_(correct), action_index_(action_index), old_prob_(old_prob) {
    if (length < 1) throw InvariantError("rollout length must be >= 1");
    if (action_index < 0) throw InvariantError("rollout action_index must be >= 0");
    if (!(old_prob > 0.0 && old_prob <= 1.0)) throw InvariantError("rollout old_prob must be in (0, 1]");
  }

  int length() const noexcept { return length_; }
  bool correct() const noexcept { return correct_; }
  int action_index() const noexcept { return action_index_; }
  double old_prob() const noexcept { return old_prob_; }
  double base_reward() const noexcept { return correct_ ? 1.0 : 0.0; }

  friend bool operator==(const Rollout&, const Rollout&) = default;

 private:
  int length_;
  bool correct_;
  int action_index_;
  double old_prob_;
};

// G rollouts answering one query.
class RolloutGroup {
 public:
  RolloutGroup(std::string query_id, std::string class_id, std::vector<Rollout> rollouts)
      : query_id_(std::move(query_id)), class_id_(std::move(class_id)), rollouts_(std::move(rollouts)) {
    if (rollouts_.size() < 2) throw InvariantError("group '" + query_id_ + "' must hold at least 2 rollouts");
  }

  const std::string& query_id() const noexcept { return query_id_; }
  const std::string& class_id() const noexcept { return class_id_; }
  const std::vector<Rollout>& rollouts() const noexcept { return rollouts_; }
  int size() const noexcept { return static_cast<int>(rollouts_.size()); }

  int correct_count() const noexcept {
    int n = 0;
    for (const auto& r : rollouts_) n += r.correct() ? 1 : 0;
    return n;
  }

  friend bool operator==(const RolloutGroup&, const RolloutGroup&) = default;

 private:
  std::string query_id_;
  std::string class_id_;
  std::vector<Rollout> rollouts_;
};

// B groups with unique query ids. Group sizes are checked against the configured G by validate_batch.
class Batch {
 public:
  explicit Batch(std::vector<RolloutGroup> groups) : groups_(std::move(groups)) {
    if (groups_.empty()) throw InvariantError("batch must hold at least one group");
    std::unordered_set<std::string_view> seen;
    for (const auto& g : groups_) {
      if (!seen.insert(g.query_id()).second) throw InvariantError("duplicate query_id '" + g.query_id() + "' in batch");
    }
  }

  const std::vector<RolloutGroup>& groups() const noexcept { return groups_; }
  int size() const noexcept { return static_cast<int>(groups_.size()); }

  friend bool operator==(const Batch&, const Batch&) = default;

 private:
  std::vector<RolloutGroup> groups_;
};

enum class NormMode { raw, query_mean, batch_mean, difficulty_mean };
enum class ZeroDiffMode { zero, similar_mean, batch_mean, query_mean };

inline std::string_view to_string(NormMode m) {
  switch (m) {
    case NormMode::raw: return "raw";
    case NormMode::query_mean: return "query_mean";
    case NormMode::batch_mean: return "batch_mean";
    case NormMode::difficulty_mean: return "difficulty_mean";
  }
  return "?";
}

inline std::string_view to_string(ZeroDiffMode m) {
  switch (m) {
    case ZeroDiffMode::zero: return "zero";
    case ZeroDiffMode::similar_mean: return "similar_mean";
    case ZeroDiffMode::batch_mean: return "batch_mean";
    case ZeroDiffMode::query_mean: return "query_mean";
  }
  return "?";
}

// Accepts both the long names and the short CLI spellings (raw|query|batch|difficulty).
inline NormMode parse_norm_mode(std::string_view s) {
  if (s == "raw") return NormMode::raw;
  if (s == "query" || s == "query_mean") return NormMode::query_mean;
  if (s == "batch" || s == "batch_mean") return NormMode::batch_mean;
  if (s == "difficulty" || s == "difficulty_mean") return NormMode::difficulty_mean;
  throw ConfigError("norm_mode: unknown value '" + std::string(s) + "'");
}

inline ZeroDiffMode parse_zero_diff_mode(std::string_view s) {
  if (s == "zero") return ZeroDiffMode::zero;
  if (s == "similar" || s == "similar_mean") return ZeroDiffMode::similar_mean;
  if (s == "batch" || s == "batch_mean") return ZeroDiffMode::batch_mean;
  if (s == "query" || s == "query_mean") return ZeroDiffMode::query_mean;
  throw ConfigError("zero_diff_mode: unknown value '" + std::string(s) + "'");
}

struct ShapingConfig {
  double theta = 0.4;
  int l_max = 12800;
  int l_high = 11520;  // 0.9 * l_max
  int l_low = 1280;    // 0.1 * l_max
  NormMode norm_mode = NormMode::difficulty_mean;
  ZeroDiffMode zero_diff_mode = ZeroDiffMode::zero;
  bool enable_lower_bar = true;
  bool enable_upper_bar = true;
  bool enable_alpha = true;

  bool operator==(const ShapingConfig&) const = default;
};

struct OptimizerConfig {
  double epsilon = 0.2;
  double beta = 0.04;
  double learning_rate = 1e-2;
  int group_size = 10;
  int batch_size = 32;
  int steps = 500;
  std::uint64_t seed = 0;

  bool operator==(const OptimizerConfig&) const = default;
};

// Throws ConfigError naming the first violated field; returns the inputs unchanged otherwise.
inline std::pair<ShapingConfig, OptimizerConfig> validate_config(const ShapingConfig& shaping,
                                                                 const OptimizerConfig& opt) {
  if (!(shaping.theta >= 0.0 && shaping.theta <= 1.0)) throw ConfigError("theta out of [0,1]");
  if (shaping.l_max < 1) throw ConfigError("l_max must be a positive integer");
  if (shaping.l_low < 0) throw ConfigError("l_low must be >= 0");
  if (!(shaping.l_low < shaping.l_high)) throw ConfigError("l_low < l_high violated");
  if (shaping.l_high > shaping.l_max) throw ConfigError("l_high <= l_max violated");
  if (!(opt.epsilon > 0.0 && opt.epsilon < 1.0)) throw ConfigError("epsilon out of (0,1)");
  if (!(opt.beta >= 0.0)) throw ConfigError("beta must be >= 0");
  if (!(opt.learning_rate > 0.0) || !std::isfinite(opt.learning_rate))
    throw ConfigError("learning_rate must be positive");
  if (opt.group_size < 2) throw ConfigError("group_size must be >= 2");
  if (opt.batch_size < 1) throw ConfigError("batch_size must be >= 1");
  // steps == 0 is accepted: the runner then only reports on the initial policy.
  if (opt.steps < 0) throw ConfigError("steps must be >= 0");
  return {shaping, opt};
}

// Checks a batch against run-level settings (configured G, l_max).
inline void validate_batch(const Batch& batch, int group_size, int l_max) {
  for (const auto& g : batch.groups()) {
    if (g.size() != group_size)
      throw InvariantError("group '" + g.query_id() + "' has " + std::to_string(g.size()) + " rollouts, configured G is " +
                           std::to_string(group_size));
    for (const auto& r : g.rollouts())
      if (r.length() > l_max)
        throw InvariantError("rollout length " + std::to_string(r.length()) + " exceeds l_max in '" +
                             g.query_id() + "'");
  }
}

struct LengthStats {
  double mean = 0.0;
  double variance = 0.0;  // population
  int count = 0;
};

template <typename Range>
LengthStats length_stats(const Range& values) {
  LengthStats s;
  double sum = 0.0;
  for (double v : values) {
    sum += v;
    ++s.count;
  }
  if (s.count == 0) return s;
  s.mean = sum / s.count;
  double ss = 0.0;
  for (double v : values) ss += (v - s.mean) * (v - s.mean);
  s.variance = ss / s.count;
  return s;
}

}  // namespace ddpo
