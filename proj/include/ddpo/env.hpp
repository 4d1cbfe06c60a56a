#pragma once

// Synthetic length-conditioned tasks. Every task class owns an accuracy curve
// f(l) with a single maximiser l_star; a rollout picks a length bin from the
// policy, draws a length uniformly inside it, and is correct with probability
// f(length).

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "ddpo/core.hpp"
#include "ddpo/policy.hpp"

namespace ddpo {

enum class Kernel { quadratic_concave, gaussian_unimodal };

inline std::string_view to_string(Kernel k) {
  return k == Kernel::quadratic_concave ? "quadratic_concave" : "gaussian_unimodal";
}

inline Kernel parse_kernel(std::string_view s) {
  if (s == "quadratic_concave" || s == "quadratic") return Kernel::quadratic_concave;
  if (s == "gaussian_unimodal" || s == "gaussian") return Kernel::gaussian_unimodal;
  throw ConfigError("kernel: unknown value '" + std::string(s) + "'");
}

struct AccuracyCurve {
  Kernel kernel = Kernel::quadratic_concave;
  double p_max = 1.0;
  double l_star = 1.0;
  double width = 1.0;

  bool operator==(const AccuracyCurve&) const = default;
};

inline double accuracy_at(const AccuracyCurve& c, double length) {
  const double u = (length - c.l_star) / c.width;
  double f = 0.0;
  switch (c.kernel) {
    case Kernel::quadratic_concave: f = c.p_max * (1.0 - u * u); break;
    case Kernel::gaussian_unimodal: f = c.p_max * std::exp(-0.5 * u * u); break;
  }
  return std::clamp(f, 0.0, 1.0);
}

// Finite distribution over (possibly fractional) lengths.
struct LengthDistribution {
  std::vector<double> lengths;
  std::vector<double> probs;

  static LengthDistribution point_mass(double at) { return {{at}, {1.0}}; }

  double mean() const {
    double m = 0.0;
    for (std::size_t i = 0; i < lengths.size(); ++i) m += probs[i] * lengths[i];
    return m;
  }
  double variance() const {
    const double m = mean();
    double v = 0.0;
    for (std::size_t i = 0; i < lengths.size(); ++i) v += probs[i] * (lengths[i] - m) * (lengths[i] - m);
    return v;
  }
};

inline double expected_accuracy(const AccuracyCurve& c, const LengthDistribution& dist) {
  double e = 0.0;
  for (std::size_t i = 0; i < dist.lengths.size(); ++i) e += dist.probs[i] * accuracy_at(c, dist.lengths[i]);
  return e;
}

// E[f] for the quadratic kernel when the distribution lies inside [l_star - w, l_star + w].
inline double quadratic_expected_accuracy(const AccuracyCurve& c, double mean, double variance) {
  const double d = mean - c.l_star;
  return c.p_max * (1.0 - (d * d + variance) / (c.width * c.width));
}

// Mean of f over the integer lengths of each bin.
inline std::vector<double> bin_accuracies(const AccuracyCurve& c, const LengthBins& bins) {
  std::vector<double> out(bins.num_bins());
  for (int k = 0; k < bins.num_bins(); ++k) {
    double s = 0.0;
    for (int l = bins.lo(k); l <= bins.hi(k); ++l) s += accuracy_at(c, l);
    out[k] = s / bins.width(k);
  }
  return out;
}

// The policy's exact distribution over integer lengths for one class.
inline LengthDistribution policy_length_distribution(const PolicyState& policy, int row) {
  const auto p = policy.probabilities(row);
  const auto& bins = policy.bins();
  LengthDistribution d;
  d.lengths.reserve(bins.l_max());
  d.probs.reserve(bins.l_max());
  for (int k = 0; k < bins.num_bins(); ++k) {
    const double each = p[k] / bins.width(k);
    for (int l = bins.lo(k); l <= bins.hi(k); ++l) {
      d.lengths.push_back(l);
      d.probs.push_back(each);
    }
  }
  return d;
}

// Quantile of the policy's integer-length distribution (smallest length with CDF >= q).
inline double policy_length_quantile(const PolicyState& policy, int row, double q) {
  const auto p = policy.probabilities(row);
  const auto& bins = policy.bins();
  double cdf = 0.0;
  for (int k = 0; k < bins.num_bins(); ++k) {
    const double each = p[k] / bins.width(k);
    if (cdf + p[k] < q) {
      cdf += p[k];
      continue;
    }
    for (int l = bins.lo(k); l <= bins.hi(k); ++l) {
      cdf += each;
      if (cdf >= q) return l;
    }
  }
  return bins.l_max();
}

enum class InitBias { neutral, overconfident };

inline std::string_view to_string(InitBias b) { return b == InitBias::neutral ? "neutral" : "overconfident"; }

inline InitBias parse_init_bias(std::string_view s) {
  if (s == "neutral") return InitBias::neutral;
  if (s == "overconfident") return InitBias::overconfident;
  throw ConfigError("init_bias: unknown value '" + std::string(s) + "'");
}

struct EnvClass {
  std::string class_id;
  AccuracyCurve curve;
  int query_count = 1;

  bool operator==(const EnvClass&) const = default;
};

// Classes are ordered from easiest to hardest.
struct EnvSpec {
  std::vector<EnvClass> classes;
  int l_max = 12800;
  InitBias init_bias = InitBias::overconfident;
  int num_bins = 64;

  bool operator==(const EnvSpec&) const = default;

  int class_index(std::string_view class_id) const {
    for (std::size_t i = 0; i < classes.size(); ++i)
      if (classes[i].class_id == class_id) return static_cast<int>(i);
    throw InvariantError("unknown class '" + std::string(class_id) + "'");
  }

  std::vector<std::string> class_ids() const {
    std::vector<std::string> ids;
    for (const auto& c : classes) ids.push_back(c.class_id);
    return ids;
  }
};

inline void validate_env(const EnvSpec& env) {
  if (env.classes.empty()) throw ConfigError("env.classes must not be empty");
  if (env.l_max < 2) throw ConfigError("env.l_max must be >= 2");
  if (env.num_bins < 1 || env.num_bins >= env.l_max) throw ConfigError("env.num_bins must be in [1, l_max)");
  std::set<std::string_view> ids;
  for (std::size_t i = 0; i < env.classes.size(); ++i) {
    const auto& c = env.classes[i];
    const std::string where = "class '" + c.class_id + "'";
    if (c.class_id.empty()) throw ConfigError("class_id must not be empty");
    if (!ids.insert(c.class_id).second) throw ConfigError("duplicate class_id '" + c.class_id + "'");
    if (!(c.curve.p_max > 0.0 && c.curve.p_max <= 1.0)) throw ConfigError(where + ": p_max out of (0,1]");
    if (!(c.curve.l_star >= 1.0 && c.curve.l_star <= env.l_max)) throw ConfigError(where + ": l_star out of [1,l_max]");
    if (!(c.curve.width > 0.0)) throw ConfigError(where + ": width must be positive");
    if (c.query_count < 1) throw ConfigError(where + ": query_count must be >= 1");
    if (i > 0) {
      const auto& prev = env.classes[i - 1].curve;
      if (c.curve.l_star < prev.l_star) throw ConfigError(where + ": l_star must be non-decreasing with difficulty");
      if (c.curve.p_max > prev.p_max) throw ConfigError(where + ": p_max must be non-increasing with difficulty");
    }
  }
}

// Four classes from easy to hard; width = 0.6 * l_star.
inline EnvSpec default_env() {
  EnvSpec env;
  const std::array<std::pair<double, double>, 4> shape{{{0.95, 2000}, {0.8, 4500}, {0.6, 7000}, {0.25, 9500}}};
  const std::array<const char*, 4> names{"easy", "medium", "hard", "hardest"};
  for (std::size_t i = 0; i < shape.size(); ++i) {
    auto [p_max, l_star] = shape[i];
    env.classes.push_back({names[i], {Kernel::quadratic_concave, p_max, l_star, 0.6 * l_star}, 64});
  }
  return env;
}

struct Query {
  std::string query_id;
  int class_index = 0;
};

// Every query of every class, in class order.
inline std::vector<Query> query_pool(const EnvSpec& env) {
  std::vector<Query> pool;
  for (std::size_t c = 0; c < env.classes.size(); ++c)
    for (int j = 0; j < env.classes[c].query_count; ++j)
      pool.push_back({env.classes[c].class_id + "-" + std::to_string(j), static_cast<int>(c)});
  return pool;
}

enum class StreamPurpose : std::uint32_t { train = 1, eval = 2, batch_draw = 3, monte_carlo = 4 };

// Independent generator for (seed, step, query, purpose); the result does not depend on call order.
inline std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t step, std::uint64_t query_index,
                                   StreamPurpose purpose) {
  auto lo = [](std::uint64_t v) { return static_cast<std::uint32_t>(v); };
  auto hi = [](std::uint64_t v) { return static_cast<std::uint32_t>(v >> 32); };
  std::seed_seq seq{lo(seed), hi(seed), lo(step), hi(step), lo(query_index), hi(query_index),
                    static_cast<std::uint32_t>(purpose)};
  return std::mt19937_64(seq);
}

template <std::uniform_random_bit_generator Rng>
RolloutGroup sample_group(const PolicyState& policy, const EnvSpec& env, std::string_view class_id,
                          std::string query_id, int group_size, Rng& rng) {
  const auto& curve = env.classes.at(env.class_index(class_id)).curve;
  const auto probs = policy.probabilities(policy.row_of(class_id));
  const auto& bins = policy.bins();
  std::discrete_distribution<int> pick_bin(probs.begin(), probs.end());
  std::vector<Rollout> rollouts;
  rollouts.reserve(group_size);
  for (int i = 0; i < group_size; ++i) {
    const int k = pick_bin(rng);
    const int length = std::uniform_int_distribution<int>(bins.lo(k), bins.hi(k))(rng);
    const bool correct = std::bernoulli_distribution(accuracy_at(curve, length))(rng);
    rollouts.emplace_back(length, correct, k, probs[k]);
  }
  return RolloutGroup(std::move(query_id), std::string(class_id), std::move(rollouts));
}

inline PolicyState neutral_policy(const EnvSpec& env) {
  return PolicyState(env.class_ids(), LengthBins::uniform(env.l_max, env.num_bins));
}

// Pre-RL prior: every solvable class starts as a broad bump centred beyond its
// optimal length (overthinking) while the hardest class is pulled well short of
// its optimum, so that its mean length falls below the second-hardest class's.
inline PolicyState make_overconfident_init(const EnvSpec& env, const PolicyState& policy) {
  if (env.init_bias != InitBias::overconfident) throw InvariantError("make_overconfident_init needs init_bias = overconfident");
  PolicyState out = policy;
  auto set_bump = [&](int row, double center, double spread) {
    auto logits = out.logits(row);
    for (int k = 0; k < out.num_bins(); ++k) {
      const double u = (out.bins().midpoint(k) - center) / spread;
      logits[k] = -0.5 * u * u;
    }
  };
  const std::size_t n = env.classes.size();
  for (std::size_t c = 0; c + 1 < n; ++c) {
    const auto& curve = env.classes[c].curve;
    set_bump(out.row_of(env.classes[c].class_id), 1.25 * curve.l_star, 0.4 * curve.l_star);
  }
  const auto& hardest = env.classes.back().curve;
  const double second_mean = n > 1 ? out.length_stats(out.row_of(env.classes[n - 2].class_id)).mean : hardest.l_star;
  const double center = std::min(0.35 * hardest.l_star, 0.5 * second_mean);
  set_bump(out.row_of(env.classes.back().class_id), center, 0.1 * env.l_max);
  return out;
}

inline PolicyState initial_policy(const EnvSpec& env) {
  PolicyState p = neutral_policy(env);
  return env.init_bias == InitBias::overconfident ? make_overconfident_init(env, p) : p;
}

}  // namespace ddpo
