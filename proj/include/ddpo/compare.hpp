#pragma once

// Paired comparison of two training configurations over a list of seeds.
// Deltas are always b - a.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ddpo/analytics.hpp"
#include "ddpo/config.hpp"
#include "ddpo/experiment.hpp"

namespace ddpo {

class ConfigMismatchError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

struct RunSummary {
  double expected_accuracy = 0.0;  // query-weighted over classes
  std::vector<ClassSnapshot> classes;
  ExtremeCounts final_extremes;
  std::optional<bool> initial_overconfident;  // absent when bucket 0 or 1 is empty
  std::optional<bool> final_overconfident;
};

inline std::optional<bool> overconfident_or_none(const EvalSnapshot& snap) {
  try {
    return detect_overconfidence(bucket_by_difficulty(snap.query_records)).overconfident;
  } catch (const InsufficientDataError&) {
    return std::nullopt;
  }
}

inline RunSummary summarize(const RunResult& r, const EnvSpec& env) {
  RunSummary s;
  s.classes = class_snapshots(r.final_policy, env);
  s.expected_accuracy = detail::weighted_mean(env, s.classes, &ClassSnapshot::expected_accuracy);
  s.final_extremes = r.extreme_series.back();
  s.initial_overconfident = overconfident_or_none(r.initial_eval);
  s.final_overconfident = overconfident_or_none(r.final_eval);
  return s;
}

struct ClassDelta {
  std::string class_id;
  double mean_length = 0.0;
  double var_length = 0.0;
  double iqr = 0.0;
  double expected_accuracy = 0.0;
};

struct SeedComparison {
  std::uint64_t seed = 0;
  RunSummary a;
  RunSummary b;
  double accuracy_delta = 0.0;
  std::vector<ClassDelta> classes;
};

// Per-class seed counts; a verdict holds when its count is a strict majority.
struct ClassVerdict {
  std::string class_id;
  int b_shorter = 0;
  int b_longer = 0;
  int b_more_accurate = 0;
  int b_iqr_not_larger = 0;
};

struct ComparisonReport {
  std::string label_a;
  std::string label_b;
  std::vector<SeedComparison> seeds;
  std::vector<ClassVerdict> verdicts;
  int b_more_accurate = 0;  // seeds where b's overall expected accuracy is higher

  bool majority(int count) const { return 2 * count > static_cast<int>(seeds.size()); }
};

inline std::string describe(const ExperimentConfig& cfg) {
  if (!cfg.shaping) return "grpo";
  return "ddpo/" + std::string(to_string(cfg.shaping->norm_mode)) + "/theta=" + fmt::format("{}", cfg.shaping->theta);
}

// Both configs must share env and optimizer settings; the seed fields are replaced by each listed seed.
inline ComparisonReport compare(const ExperimentConfig& a, const ExperimentConfig& b,
                                const std::vector<std::uint64_t>& seeds) {
  if (!(a.env == b.env)) throw ConfigMismatchError("compare: the two configs use different environments");
  auto oa = a.optimizer, ob = b.optimizer;
  oa.seed = ob.seed = 0;
  if (!(oa == ob)) throw ConfigMismatchError("compare: the two configs use different optimizer settings");
  if (seeds.empty()) throw ConfigError("compare: at least one seed is required");
  validate_experiment(a);
  validate_experiment(b);

  ComparisonReport report;
  report.label_a = describe(a);
  report.label_b = describe(b);
  for (const auto& c : a.env.classes) report.verdicts.push_back({c.class_id});

  for (auto seed : seeds) {
    ExperimentConfig ca = a, cb = b;
    ca.optimizer.seed = cb.optimizer.seed = seed;
    SeedComparison sc;
    sc.seed = seed;
    sc.a = summarize(run_experiment(ca), a.env);
    sc.b = summarize(run_experiment(cb), b.env);
    sc.accuracy_delta = sc.b.expected_accuracy - sc.a.expected_accuracy;
    report.b_more_accurate += sc.accuracy_delta > 0.0 ? 1 : 0;
    for (std::size_t c = 0; c < sc.a.classes.size(); ++c) {
      const auto& x = sc.a.classes[c];
      const auto& y = sc.b.classes[c];
      ClassDelta d{x.class_id, y.mean_length - x.mean_length, y.var_length - x.var_length, y.iqr() - x.iqr(),
                   y.expected_accuracy - x.expected_accuracy};
      auto& v = report.verdicts[c];
      v.b_shorter += d.mean_length < 0.0 ? 1 : 0;
      v.b_longer += d.mean_length > 0.0 ? 1 : 0;
      v.b_more_accurate += d.expected_accuracy > 0.0 ? 1 : 0;
      v.b_iqr_not_larger += d.iqr <= 0.0 ? 1 : 0;
      sc.classes.push_back(std::move(d));
    }
    report.seeds.push_back(std::move(sc));
  }
  return report;
}

inline nlohmann::json to_json(const RunSummary& s) {
  auto classes = nlohmann::json::array();
  for (const auto& c : s.classes)
    classes.push_back({{"class_id", c.class_id},
                       {"mean_length", c.mean_length},
                       {"var_length", c.var_length},
                       {"iqr", c.iqr()},
                       {"expected_accuracy", c.expected_accuracy}});
  auto opt = [](const std::optional<bool>& v) { return v ? nlohmann::json(*v) : nlohmann::json(); };
  return {{"expected_accuracy", s.expected_accuracy},
          {"classes", classes},
          {"count_acc0", s.final_extremes.count_acc0},
          {"count_acc1", s.final_extremes.count_acc1},
          {"initial_overconfident", opt(s.initial_overconfident)},
          {"final_overconfident", opt(s.final_overconfident)}};
}

inline nlohmann::json to_json(const ComparisonReport& r) {
  auto seeds = nlohmann::json::array();
  for (const auto& s : r.seeds) {
    auto deltas = nlohmann::json::array();
    for (const auto& d : s.classes)
      deltas.push_back({{"class_id", d.class_id},
                        {"mean_length", d.mean_length},
                        {"var_length", d.var_length},
                        {"iqr", d.iqr},
                        {"expected_accuracy", d.expected_accuracy}});
    seeds.push_back(
        {{"seed", s.seed}, {"a", to_json(s.a)}, {"b", to_json(s.b)}, {"accuracy_delta", s.accuracy_delta},
         {"class_deltas", deltas}});
  }
  auto verdicts = nlohmann::json::array();
  for (const auto& v : r.verdicts)
    verdicts.push_back({{"class_id", v.class_id},
                        {"b_shorter", v.b_shorter},
                        {"b_longer", v.b_longer},
                        {"b_more_accurate", v.b_more_accurate},
                        {"b_iqr_not_larger", v.b_iqr_not_larger},
                        {"majority_b_shorter", r.majority(v.b_shorter)},
                        {"majority_b_longer", r.majority(v.b_longer)},
                        {"majority_b_more_accurate", r.majority(v.b_more_accurate)},
                        {"majority_b_iqr_not_larger", r.majority(v.b_iqr_not_larger)}});
  return {{"a", r.label_a},
          {"b", r.label_b},
          {"num_seeds", r.seeds.size()},
          {"b_more_accurate", r.b_more_accurate},
          {"majority_b_more_accurate", r.majority(r.b_more_accurate)},
          {"seeds", seeds},
          {"verdicts", verdicts}};
}

}  // namespace ddpo
