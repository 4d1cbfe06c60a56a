#pragma once

// Training loop, run artifacts and offline analysis of rollout logs.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <optional>
#include <ostream>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "ddpo/analytics.hpp"
#include "ddpo/config.hpp"
#include "ddpo/core.hpp"
#include "ddpo/env.hpp"
#include "ddpo/optimizer.hpp"
#include "ddpo/policy.hpp"
#include "ddpo/rollout_log.hpp"
#include "ddpo/shaping.hpp"

namespace ddpo {

struct ClassSnapshot {
  std::string class_id;
  double mean_length = 0.0;
  double var_length = 0.0;
  double expected_accuracy = 0.0;
  double q1 = 0.0;
  double q3 = 0.0;
  double iqr() const { return q3 - q1; }
};

struct StepMetrics {
  std::int64_t step = 0;
  SurrogateReport report;
  double expected_accuracy = 0.0;
  double empirical_accuracy = 0.0;
  double mean_length = 0.0;
  int zero_fallbacks = 0;
  std::vector<ClassSnapshot> classes;
};

// One sweep of G rollouts over every query in the env.
struct EvalSnapshot {
  std::int64_t step = 0;
  std::vector<Difficulty> difficulties;
  std::vector<DifficultyRecord> query_records;  // (diff, mean rollout length) per query
  std::vector<LengthRecord> rollouts;
  std::vector<int> class_of_query;
};

struct RunResult {
  PolicyState initial_policy;
  PolicyState final_policy;
  std::vector<StepMetrics> metrics;
  std::vector<ExtremeCounts> extreme_series;
  EvalSnapshot initial_eval;
  EvalSnapshot final_eval;
};

// Exact per-class length statistics and expected accuracy of a policy.
inline std::vector<ClassSnapshot> class_snapshots(const PolicyState& policy, const EnvSpec& env) {
  std::vector<ClassSnapshot> out;
  for (const auto& c : env.classes) {
    const int row = policy.row_of(c.class_id);
    const auto stats = policy.length_stats(row);
    const auto acc = bin_accuracies(c.curve, policy.bins());
    const auto p = policy.probabilities(row);
    const double e = std::inner_product(p.begin(), p.end(), acc.begin(), 0.0);
    out.push_back({c.class_id, stats.mean, stats.variance, e, policy_length_quantile(policy, row, 0.25),
                   policy_length_quantile(policy, row, 0.75)});
  }
  return out;
}

namespace detail {

// Samples one group per query. Each group has its own stream, so the result is
// independent of the thread count.
inline std::vector<RolloutGroup> sample_groups(const PolicyState& policy, const EnvSpec& env,
                                               const std::vector<Query>& pool, const std::vector<std::size_t>& picks,
                                               int group_size, std::uint64_t seed, std::uint64_t step,
                                               StreamPurpose purpose, int threads) {
  std::vector<std::optional<RolloutGroup>> slots(picks.size());
  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const auto& q = pool[picks[i]];
      auto rng = make_stream(seed, step, picks[i], purpose);
      slots[i].emplace(sample_group(policy, env, env.classes[q.class_index].class_id, q.query_id, group_size, rng));
    }
  };
  const std::size_t n_threads = std::min<std::size_t>(std::max(threads, 1), picks.size());
  if (n_threads <= 1) {
    work(0, picks.size());
  } else {
    std::vector<std::jthread> workers;
    const std::size_t chunk = (picks.size() + n_threads - 1) / n_threads;
    for (std::size_t t = 0; t < n_threads; ++t) {
      const std::size_t begin = t * chunk, end = std::min(picks.size(), begin + chunk);
      if (begin < end) workers.emplace_back(work, begin, end);
    }
  }
  std::vector<RolloutGroup> out;
  out.reserve(slots.size());
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

inline std::vector<std::size_t> draw_batch(std::size_t pool_size, int batch_size, std::uint64_t seed,
                                           std::uint64_t step) {
  std::vector<std::size_t> idx(pool_size);
  std::iota(idx.begin(), idx.end(), 0);
  auto rng = make_stream(seed, step, 0, StreamPurpose::batch_draw);
  for (int i = 0; i < batch_size; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, pool_size - 1);
    std::swap(idx[i], idx[pick(rng)]);
  }
  idx.resize(batch_size);
  return idx;
}

inline void append_groups(EvalSnapshot& snap, const std::vector<RolloutGroup>& groups,
                          const std::function<int(const RolloutGroup&)>& class_of) {
  for (const auto& g : groups) {
    const auto diff = compute_difficulty(g);
    double total = 0.0;
    for (const auto& r : g.rollouts()) {
      total += r.length();
      snap.rollouts.push_back({static_cast<double>(r.length()), r.correct()});
    }
    snap.difficulties.push_back(diff);
    snap.query_records.push_back({diff.value(), total / g.size()});
    if (class_of) snap.class_of_query.push_back(class_of(g));
  }
}

inline EvalSnapshot evaluate(const PolicyState& policy, const EnvSpec& env, const std::vector<Query>& pool,
                             int group_size, std::uint64_t seed, std::int64_t step, int threads) {
  std::vector<std::size_t> all(pool.size());
  std::iota(all.begin(), all.end(), 0);
  auto groups = sample_groups(policy, env, pool, all, group_size, seed, static_cast<std::uint64_t>(step),
                              StreamPurpose::eval, threads);
  EvalSnapshot snap;
  snap.step = step;
  append_groups(snap, groups, [&](const RolloutGroup& g) { return env.class_index(g.class_id()); });
  return snap;
}

inline double weighted_mean(const EnvSpec& env, const std::vector<ClassSnapshot>& snaps,
                            double ClassSnapshot::*field) {
  double num = 0.0, den = 0.0;
  for (std::size_t c = 0; c < snaps.size(); ++c) {
    num += env.classes[c].query_count * (snaps[c].*field);
    den += env.classes[c].query_count;
  }
  return num / den;
}

}  // namespace detail

// Runs the configured training loop in memory. When `rollout_log` is set every
// training batch is appended to it as JSON lines.
inline RunResult run_experiment(const ExperimentConfig& cfg, std::ostream* rollout_log = nullptr) {
  validate_experiment(cfg);
  const auto& opt = cfg.optimizer;
  const auto pool = query_pool(cfg.env);
  const int G = opt.group_size;

  PolicyState policy = initial_policy(cfg.env);
  RunResult result{policy, policy, {}, {}, {}, {}};
  result.initial_eval = detail::evaluate(policy, cfg.env, pool, G, opt.seed, 0, cfg.threads);
  result.extreme_series.push_back(extreme_counts(0, result.initial_eval.difficulties));
  result.final_eval = result.initial_eval;

  for (int step = 1; step <= opt.steps; ++step) {
    const auto picks = detail::draw_batch(pool.size(), opt.batch_size, opt.seed, step);
    Batch batch(detail::sample_groups(policy, cfg.env, pool, picks, G, opt.seed, step, StreamPurpose::train,
                                      cfg.threads));
    if (rollout_log) write_batch_jsonl(*rollout_log, batch, step);

    StepMetrics m;
    m.step = step;
    std::vector<AdvantageVector> advantages;
    advantages.reserve(batch.size());
    if (cfg.shaping) {
      const auto shaped = shape_batch(batch, *cfg.shaping);
      m.zero_fallbacks = shaped.zero_fallbacks;
      for (const auto& row : shaped.rewards) {
        std::vector<double> r;
        r.reserve(row.size());
        for (const auto& s : row) r.push_back(s.shaped);
        advantages.push_back(group_advantages(r));
      }
    } else {
      for (const auto& g : batch.groups()) {
        std::vector<double> r;
        r.reserve(g.rollouts().size());
        for (const auto& ro : g.rollouts()) r.push_back(ro.base_reward());
        advantages.push_back(group_advantages(r));
      }
    }

    int correct = 0;
    for (const auto& g : batch.groups()) correct += g.correct_count();
    m.empirical_accuracy = static_cast<double>(correct) / (static_cast<double>(batch.size()) * G);

    auto [next, report] = gradient_step(policy, batch, advantages, opt);
    policy = std::move(next);
    m.report = report;
    m.classes = class_snapshots(policy, cfg.env);
    m.expected_accuracy = detail::weighted_mean(cfg.env, m.classes, &ClassSnapshot::expected_accuracy);
    m.mean_length = detail::weighted_mean(cfg.env, m.classes, &ClassSnapshot::mean_length);
    result.metrics.push_back(std::move(m));

    if (step % cfg.eval_interval == 0 || step == opt.steps) {
      auto snap = detail::evaluate(policy, cfg.env, pool, G, opt.seed, step, cfg.threads);
      result.extreme_series.push_back(extreme_counts(step, snap.difficulties));
      if (step == opt.steps) result.final_eval = std::move(snap);
    }
  }
  result.final_policy = std::move(policy);
  return result;
}

// ---------------------------------------------------------------------------
// Artifacts

inline nlohmann::json policy_to_json(const PolicyState& p) {
  nlohmann::json logits = nlohmann::json::array();
  for (int c = 0; c < p.num_classes(); ++c) {
    auto row = p.logits(c);
    logits.push_back(std::vector<double>(row.begin(), row.end()));
  }
  return {{"class_ids", p.class_ids()}, {"bin_edges", p.bins().edges()}, {"logits", logits}};
}

struct AnalyticsReport {
  nlohmann::json json;
  std::array<BucketDispersion, kNumDifficultyBuckets> dispersion;
  LengthHistogram histogram;
  std::vector<ExtremeCounts> extremes;
};

inline AnalyticsReport analytics_report(const EvalSnapshot& snap, const std::vector<ExtremeCounts>& series,
                                        const EnvSpec* env = nullptr, int histogram_bins = 10,
                                        HistogramMode mode = HistogramMode::equal_count) {
  AnalyticsReport r;
  r.dispersion = dispersion_by_difficulty(snap.query_records);
  r.histogram = length_histogram(snap.rollouts, mode, histogram_bins);
  r.json["step"] = snap.step;
  r.json["queries"] = snap.query_records.size();
  r.json["buckets"] = to_json(r.dispersion);
  r.json["histogram"] = to_json(r.histogram);
  r.extremes = series;
  r.json["extreme_counts"] = to_json(series);
  try {
    auto oc = detect_overconfidence(bucket_by_difficulty(snap.query_records));
    r.json["overconfidence"] = {{"overconfident", oc.overconfident}, {"gap", oc.gap}};
  } catch (const InsufficientDataError& e) {
    r.json["overconfidence"] = {{"overconfident", nullptr}, {"error", e.what()}};
  }
  if (env && !snap.class_of_query.empty()) {
    // Per-class histograms over the same sweep.
    nlohmann::json per_class = nlohmann::json::object();
    std::size_t offset = 0;
    std::vector<std::vector<LengthRecord>> by_class(env->classes.size());
    for (std::size_t q = 0; q < snap.class_of_query.size(); ++q) {
      const std::size_t g = snap.rollouts.size() / snap.class_of_query.size();
      for (std::size_t i = 0; i < g; ++i) by_class[snap.class_of_query[q]].push_back(snap.rollouts[offset + i]);
      offset += g;
    }
    for (std::size_t c = 0; c < by_class.size(); ++c)
      if (!by_class[c].empty())
        per_class[env->classes[c].class_id] = to_json(length_histogram(by_class[c], mode, histogram_bins));
    r.json["class_histograms"] = per_class;
  }
  return r;
}

// Analytics over a rollout log: the extreme-count series covers every logged
// step, while buckets and histograms use the last step (or all steps pooled).
// With env given, per-class histograms are added for classes it knows.
inline AnalyticsReport analyze_rollouts(const std::vector<LoggedBatch>& log, const EnvSpec* env = nullptr,
                                        bool pool_all_steps = false, int histogram_bins = 10,
                                        HistogramMode mode = HistogramMode::equal_count) {
  if (log.empty()) throw InsufficientDataError("rollout log has no batches");
  std::vector<ExtremeCounts> series;
  for (const auto& lb : log) {
    std::vector<Difficulty> diffs;
    for (const auto& g : lb.batch.groups()) diffs.push_back(compute_difficulty(g));
    series.push_back(extreme_counts(lb.step, diffs));
  }
  EvalSnapshot snap;
  snap.step = log.back().step;
  std::function<int(const RolloutGroup&)> class_of;
  if (env) class_of = [env](const RolloutGroup& g) { return env->class_index(g.class_id()); };
  for (std::size_t i = pool_all_steps ? 0 : log.size() - 1; i < log.size(); ++i)
    detail::append_groups(snap, log[i].batch.groups(), class_of);
  if (env && snap.class_of_query.empty()) env = nullptr;
  return analytics_report(snap, series, env, histogram_bins, mode);
}

namespace detail {

inline std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + p.string() + "'");
  return out;
}

inline void close_checked(std::ofstream& out, const std::filesystem::path& p) {
  out.close();
  if (!out) throw IoError("error while writing '" + p.string() + "'");
}

}  // namespace detail

// Writes analytics.json, buckets.csv, histogram.csv and extreme_counts.csv into dir.
inline void write_analytics(const std::filesystem::path& dir, const AnalyticsReport& r) {
  auto p = dir / "analytics.json";
  auto out = detail::open_out(p);
  out << r.json.dump(2) << '\n';
  detail::close_checked(out, p);
  p = dir / "buckets.csv";
  out = detail::open_out(p);
  write_buckets_csv(out, r.dispersion);
  detail::close_checked(out, p);
  p = dir / "histogram.csv";
  out = detail::open_out(p);
  write_histogram_csv(out, r.histogram);
  detail::close_checked(out, p);
  p = dir / "extreme_counts.csv";
  out = detail::open_out(p);
  write_extreme_counts_csv(out, r.extremes);
  detail::close_checked(out, p);
}

inline void write_metrics_csv(std::ostream& out, const std::vector<StepMetrics>& metrics) {
  write_metrics_header(out);
  out << ",expected_accuracy,empirical_accuracy,mean_length,zero_fallbacks\n";
  for (const auto& m : metrics) {
    write_metrics_fields(out, m.step, m.report);
    out << fmt::format(",{},{},{},{}\n", m.expected_accuracy, m.empirical_accuracy, m.mean_length, m.zero_fallbacks);
  }
}

inline void write_class_metrics_csv(std::ostream& out, const std::vector<StepMetrics>& metrics) {
  out << "step,class_id,mean_length,var_length,expected_accuracy,q1,q3\n";
  for (const auto& m : metrics)
    for (const auto& c : m.classes)
      out << fmt::format("{},{},{},{},{},{},{}\n", m.step, c.class_id, c.mean_length, c.var_length,
                         c.expected_accuracy, c.q1, c.q3);
}

// Runs the experiment and writes its artifacts into cfg.output_dir:
// metrics.csv, class_metrics.csv, extreme_counts.csv, final_policy.json,
// analytics.json, buckets.csv, histogram.csv and optionally rollouts.jsonl.
// With steps = 0 only the analytics of the initial policy are written.
inline RunResult run(const ExperimentConfig& cfg) {
  validate_experiment(cfg);
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(cfg.output_dir, ec);
  if (ec) throw IoError("cannot create output directory '" + cfg.output_dir.string() + "': " + ec.message());

  std::optional<std::ofstream> log;
  const auto log_path = cfg.output_dir / "rollouts.jsonl";
  if (cfg.log_rollouts && cfg.optimizer.steps > 0) log.emplace(detail::open_out(log_path));
  RunResult result = run_experiment(cfg, log ? &*log : nullptr);
  if (log) detail::close_checked(*log, log_path);

  const auto& snap = cfg.optimizer.steps > 0 ? result.final_eval : result.initial_eval;
  auto report = analytics_report(snap, result.extreme_series, &cfg.env);
  {
    auto initial = analytics_report(result.initial_eval, {}, &cfg.env);
    report.json["initial_overconfidence"] = initial.json["overconfidence"];
  }
  write_analytics(cfg.output_dir, report);
  if (cfg.optimizer.steps == 0) return result;

  auto p = cfg.output_dir / "metrics.csv";
  auto out = detail::open_out(p);
  write_metrics_csv(out, result.metrics);
  detail::close_checked(out, p);
  p = cfg.output_dir / "class_metrics.csv";
  out = detail::open_out(p);
  write_class_metrics_csv(out, result.metrics);
  detail::close_checked(out, p);
  p = cfg.output_dir / "final_policy.json";
  out = detail::open_out(p);
  out << policy_to_json(result.final_policy).dump() << '\n';
  detail::close_checked(out, p);
  return result;
}

}  // namespace ddpo
