#pragma once

// Difficulty-differentiated reward shaping.
//
// A query's difficulty is the fraction of its G rollouts that are correct.
// Queries below the threshold theta are "hard": their length term rewards
// longer answers with weight (theta - diff). The rest are "easy": longer
// answers are penalised with weight diff. The length term is the deviation
// from a reference length divided by l_max; which reference is used is
// selected by ShapingConfig::norm_mode.

#include <cmath>
#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <fmt/format.h>

#include "ddpo/core.hpp"

namespace ddpo {

class ReferenceMissingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Exact rational k/G.
class Difficulty {
 public:
  Difficulty(int correct, int group_size) : correct_(correct), group_size_(group_size) {
    if (group_size < 1) throw InvariantError("difficulty denominator must be >= 1");
    if (correct < 0 || correct > group_size) throw InvariantError("difficulty numerator out of [0, G]");
  }

  int correct() const noexcept { return correct_; }
  int group_size() const noexcept { return group_size_; }
  double value() const noexcept { return static_cast<double>(correct_) / group_size_; }
  bool is_zero() const noexcept { return correct_ == 0; }
  bool is_one() const noexcept { return correct_ == group_size_; }

  friend std::strong_ordering operator<=>(const Difficulty& a, const Difficulty& b) noexcept {
    return static_cast<std::int64_t>(a.correct_) * b.group_size_ <=>
           static_cast<std::int64_t>(b.correct_) * a.group_size_;
  }
  friend bool operator==(const Difficulty& a, const Difficulty& b) noexcept { return (a <=> b) == 0; }

 private:
  int correct_;
  int group_size_;
};

inline Difficulty compute_difficulty(const RolloutGroup& group) {
  return Difficulty(group.correct_count(), group.size());
}

// Reference lengths built from the correct rollouts of one batch.
struct LengthReference {
  std::map<Difficulty, double> per_difficulty_mean;  // only difficulties > 0
  std::optional<double> batch_mean;
  std::map<std::string, double, std::less<>> per_query_mean;  // only queries with a correct rollout
  std::map<std::string, double, std::less<>> per_query_all_mean;  // every query, correct or not
};

inline LengthReference build_length_reference(const Batch& batch, const std::vector<Difficulty>& difficulties) {
  if (difficulties.size() != batch.groups().size())
    throw InvariantError("difficulties must align with batch groups");

  struct Acc {
    double sum = 0.0;
    std::int64_t count = 0;
  };
  std::map<Difficulty, Acc> by_diff;
  Acc all;
  LengthReference ref;

  for (std::size_t g = 0; g < batch.groups().size(); ++g) {
    const auto& group = batch.groups()[g];
    Acc q;
    double all_lengths = 0.0;
    for (const auto& r : group.rollouts()) all_lengths += r.length();
    ref.per_query_all_mean.emplace(group.query_id(), all_lengths / group.size());
    for (const auto& r : group.rollouts()) {
      if (!r.correct()) continue;
      q.sum += r.length();
      ++q.count;
    }
    if (q.count == 0) continue;
    ref.per_query_mean.emplace(group.query_id(), q.sum / static_cast<double>(q.count));
    auto& d = by_diff[difficulties[g]];
    d.sum += q.sum;
    d.count += q.count;
    all.sum += q.sum;
    all.count += q.count;
  }
  for (const auto& [diff, acc] : by_diff) ref.per_difficulty_mean.emplace(diff, acc.sum / static_cast<double>(acc.count));
  if (all.count > 0) ref.batch_mean = all.sum / static_cast<double>(all.count);
  return ref;
}

struct NormalizedLength {
  double z = 0.0;
  // Set when the configured diff = 0 reference was undefined and L / l_max was used instead.
  bool fell_back_to_zero = false;
};

namespace detail {

// Mean at the difficulty value nearest to `diff`; ties resolve to the smaller difficulty.
inline std::optional<double> nearest_difficulty_mean(const LengthReference& ref, Difficulty diff) {
  std::optional<double> best;
  double best_dist = 0.0;
  for (const auto& [d, mean] : ref.per_difficulty_mean) {
    double dist = std::abs(d.value() - diff.value());
    // Map iteration is ascending, so strict < keeps the smaller difficulty on ties.
    if (!best || dist < best_dist) {
      best = mean;
      best_dist = dist;
    }
  }
  return best;
}

}  // namespace detail

inline NormalizedLength normalize_length(int length, Difficulty diff, std::string_view query_id,
                                         const LengthReference& ref, const ShapingConfig& cfg) {
  if (length < 1 || length > cfg.l_max) throw InvariantError("length out of [1, l_max]");
  const double l_max = cfg.l_max;
  const double raw = length / l_max;
  auto centered = [&](double mu) { return (length - mu) / l_max; };

  if (cfg.norm_mode == NormMode::raw) return {raw, false};

  if (diff.is_zero()) {
    std::optional<double> mu;
    switch (cfg.zero_diff_mode) {
      case ZeroDiffMode::zero: return {raw, false};
      case ZeroDiffMode::similar_mean: mu = detail::nearest_difficulty_mean(ref, diff); break;
      case ZeroDiffMode::batch_mean: mu = ref.batch_mean; break;
      case ZeroDiffMode::query_mean: {
        // No correct answer exists, so the query's reference is the mean length of all its answers.
        auto it = ref.per_query_all_mean.find(query_id);
        if (it == ref.per_query_all_mean.end())
          throw ReferenceMissingError(fmt::format("no answer-length mean for '{}'", query_id));
        mu = it->second;
        break;
      }
    }
    if (!mu) return {raw, true};
    return {centered(*mu), false};
  }

  switch (cfg.norm_mode) {
    case NormMode::difficulty_mean: {
      auto it = ref.per_difficulty_mean.find(diff);
      if (it == ref.per_difficulty_mean.end())
        throw ReferenceMissingError(fmt::format("no difficulty mean for diff={}", diff.value()));
      return {centered(it->second), false};
    }
    case NormMode::query_mean: {
      auto it = ref.per_query_mean.find(query_id);
      if (it == ref.per_query_mean.end())
        throw ReferenceMissingError(fmt::format("no query mean for '{}'", query_id));
      return {centered(it->second), false};
    }
    case NormMode::batch_mean:
      if (!ref.batch_mean) throw ReferenceMissingError("no batch mean");
      return {centered(*ref.batch_mean), false};
    case NormMode::raw: break;
  }
  return {raw, false};
}

enum class Branch { hard_in_range, hard_above_bar, easy_in_range, easy_below_bar, zero_difficulty };

inline std::string_view to_string(Branch b) {
  switch (b) {
    case Branch::hard_in_range: return "hard_in_range";
    case Branch::hard_above_bar: return "hard_above_bar";
    case Branch::easy_in_range: return "easy_in_range";
    case Branch::easy_below_bar: return "easy_below_bar";
    case Branch::zero_difficulty: return "zero_difficulty";
  }
  return "?";
}

struct ShapedReward {
  double base = 0.0;
  double shaped = 0.0;
  double alpha = 0.0;
  double z = 0.0;
  Branch branch = Branch::hard_in_range;
};

inline bool is_hard(Difficulty diff, double theta) { return diff.value() < theta; }

inline ShapedReward shape_reward(const Rollout& rollout, Difficulty diff, double z, const ShapingConfig& cfg) {
  ShapedReward out;
  out.base = rollout.base_reward();
  out.z = z;
  const int length = rollout.length();

  if (is_hard(diff, cfg.theta)) {
    out.alpha = cfg.enable_alpha ? cfg.theta - diff.value() : 1.0;
    if (cfg.enable_upper_bar && length > cfg.l_high) {
      out.branch = Branch::hard_above_bar;
      out.shaped = out.base;
    } else {
      out.branch = diff.is_zero() ? Branch::zero_difficulty : Branch::hard_in_range;
      out.shaped = out.base + out.alpha * z;
    }
  } else {
    out.alpha = cfg.enable_alpha ? diff.value() : 1.0;
    if (cfg.enable_lower_bar && length < cfg.l_low) {
      out.branch = Branch::easy_below_bar;
      out.shaped = out.base;
    } else {
      out.branch = Branch::easy_in_range;
      out.shaped = out.base - out.alpha * z;
    }
  }
  return out;
}

struct ShapedBatch {
  std::vector<Difficulty> difficulties;
  std::vector<std::vector<ShapedReward>> rewards;  // [group][rollout]
  LengthReference reference;
  int zero_fallbacks = 0;  // rollouts whose diff = 0 reference was undefined
};

// Difficulty per group, then the batch reference, then the per-rollout shaped reward.
inline ShapedBatch shape_batch(const Batch& batch, const ShapingConfig& cfg) {
  ShapedBatch out;
  out.difficulties.reserve(batch.groups().size());
  for (const auto& g : batch.groups()) out.difficulties.push_back(compute_difficulty(g));
  out.reference = build_length_reference(batch, out.difficulties);

  out.rewards.reserve(batch.groups().size());
  for (std::size_t gi = 0; gi < batch.groups().size(); ++gi) {
    const auto& group = batch.groups()[gi];
    const Difficulty diff = out.difficulties[gi];
    std::vector<ShapedReward> row;
    row.reserve(group.rollouts().size());
    for (const auto& r : group.rollouts()) {
      auto norm = normalize_length(r.length(), diff, group.query_id(), out.reference, cfg);
      out.zero_fallbacks += norm.fell_back_to_zero ? 1 : 0;
      row.push_back(shape_reward(r, diff, norm.z, cfg));
    }
    out.rewards.push_back(std::move(row));
  }
  return out;
}

inline void write_shaped_csv(std::ostream& out, const Batch& batch, const ShapedBatch& shaped) {
  out << "query_id,rollout_index,diff,branch,alpha,z,base,shaped\n";
  for (std::size_t g = 0; g < batch.groups().size(); ++g) {
    const auto& rewards = shaped.rewards[g];
    for (std::size_t i = 0; i < rewards.size(); ++i) {
      const auto& r = rewards[i];
      out << fmt::format("{},{},{},{},{},{},{},{}\n", batch.groups()[g].query_id(), i, shaped.difficulties[g].value(),
                         to_string(r.branch), r.alpha, r.z, r.base, r.shaped);
    }
  }
}

}  // namespace ddpo
