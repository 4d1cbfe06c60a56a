#pragma once

// Diagnostics over rollout records: difficulty buckets, overconfidence,
// length histograms with per-bin accuracy, extreme-sample counts and
// per-bucket box statistics.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <vector>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "ddpo/core.hpp"
#include "ddpo/shaping.hpp"

namespace ddpo {

class InsufficientDataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr int kNumDifficultyBuckets = 6;

struct DifficultyRecord {
  double diff = 0.0;
  double length = 0.0;
};

struct LengthRecord {
  double length = 0.0;
  bool correct = false;
};

// floor(d / 0.2); d = 1.0 lands in bucket 5.
inline int difficulty_bucket(double diff) {
  if (!(diff >= 0.0 && diff <= 1.0)) throw InvariantError("difficulty out of [0,1]");
  // The epsilon keeps exact multiples such as 0.6 from rounding down to the bucket below.
  const int b = static_cast<int>(std::floor(diff * 5.0 + 1e-9));
  return std::clamp(b, 0, kNumDifficultyBuckets - 1);
}

// Linear interpolation between order statistics; `sorted` must be ascending and nonempty.
inline double quantile_sorted(const std::vector<double>& sorted, double q) {
  const double h = (static_cast<double>(sorted.size()) - 1.0) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= sorted.size()) return sorted.back();
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[lo + 1] - sorted[lo]);
}

struct BoxStats {
  double min = 0.0, q1 = 0.0, median = 0.0, q3 = 0.0, max = 0.0;
  double iqr() const { return q3 - q1; }
};

inline BoxStats box_stats(std::vector<double> values) {
  if (values.empty()) throw InsufficientDataError("box statistics need at least one value");
  std::sort(values.begin(), values.end());
  return {values.front(), quantile_sorted(values, 0.25), quantile_sorted(values, 0.5), quantile_sorted(values, 0.75),
          values.back()};
}

struct DifficultyBucket {
  int count = 0;
  std::optional<double> mean_length;
  LengthStats stats;
  std::vector<double> lengths;
};

struct DifficultyBuckets {
  static constexpr std::array<double, 6> edges{0.0, 0.2, 0.4, 0.6, 0.8, 1.0};
  std::array<DifficultyBucket, kNumDifficultyBuckets> buckets;

  int total() const {
    int n = 0;
    for (const auto& b : buckets) n += b.count;
    return n;
  }
};

inline DifficultyBuckets bucket_by_difficulty(const std::vector<DifficultyRecord>& records) {
  DifficultyBuckets out;
  for (const auto& r : records) out.buckets[difficulty_bucket(r.diff)].lengths.push_back(r.length);
  for (auto& b : out.buckets) {
    b.count = static_cast<int>(b.lengths.size());
    if (b.count == 0) continue;
    b.stats = length_stats(b.lengths);
    b.mean_length = b.stats.mean;
  }
  return out;
}

struct OverconfidenceResult {
  bool overconfident = false;
  double gap = 0.0;  // mean(bucket 1) - mean(bucket 0)
};

inline OverconfidenceResult detect_overconfidence(const DifficultyBuckets& buckets) {
  const auto& b0 = buckets.buckets[0];
  const auto& b1 = buckets.buckets[1];
  if (!b0.mean_length || !b1.mean_length)
    throw InsufficientDataError("overconfidence check needs nonempty buckets 0 and 1");
  const double gap = *b1.mean_length - *b0.mean_length;
  return {*b0.mean_length < *b1.mean_length, gap};
}

enum class HistogramMode { equal_width, equal_count };

inline HistogramMode parse_histogram_mode(std::string_view s) {
  if (s == "equal_width") return HistogramMode::equal_width;
  if (s == "equal_count") return HistogramMode::equal_count;
  throw ConfigError("histogram mode: unknown value '" + std::string(s) + "'");
}

struct HistogramBin {
  double lo = 0.0;
  double hi = 0.0;
  int count = 0;
  std::optional<double> accuracy;  // absent for empty bins
};

struct LengthHistogram {
  HistogramMode mode = HistogramMode::equal_width;
  std::vector<HistogramBin> bins;
};

inline LengthHistogram length_histogram(std::vector<LengthRecord> records, HistogramMode mode, int n_bins) {
  if (n_bins < 2) throw InvariantError("histogram needs n_bins >= 2");
  if (records.empty()) throw InsufficientDataError("histogram needs at least one record");
  std::sort(records.begin(), records.end(), [](const auto& a, const auto& b) { return a.length < b.length; });

  LengthHistogram h;
  h.mode = mode;
  h.bins.resize(n_bins);
  std::vector<int> correct(n_bins, 0);
  const std::size_t n = records.size();

  if (mode == HistogramMode::equal_count) {
    for (int b = 0; b < n_bins; ++b) {
      const std::size_t begin = b * n / n_bins, end = (b + 1) * n / n_bins;
      auto& bin = h.bins[b];
      bin.count = static_cast<int>(end - begin);
      if (bin.count == 0) continue;
      bin.lo = records[begin].length;
      bin.hi = records[end - 1].length;
      for (std::size_t i = begin; i < end; ++i) correct[b] += records[i].correct ? 1 : 0;
    }
  } else {
    const double lo = records.front().length, hi = records.back().length;
    const double width = (hi - lo) / n_bins;
    for (int b = 0; b < n_bins; ++b) {
      h.bins[b].lo = lo + b * width;
      h.bins[b].hi = b + 1 == n_bins ? hi : lo + (b + 1) * width;
    }
    for (const auto& r : records) {
      int b = width > 0.0 ? static_cast<int>((r.length - lo) / width) : 0;
      b = std::clamp(b, 0, n_bins - 1);
      ++h.bins[b].count;
      correct[b] += r.correct ? 1 : 0;
    }
  }
  for (int b = 0; b < n_bins; ++b)
    if (h.bins[b].count > 0) h.bins[b].accuracy = static_cast<double>(correct[b]) / h.bins[b].count;
  return h;
}

struct ExtremeCounts {
  std::int64_t step = 0;
  int count_acc0 = 0;
  int count_acc1 = 0;
};

inline ExtremeCounts extreme_counts(std::int64_t step, const std::vector<Difficulty>& difficulties) {
  ExtremeCounts c{step, 0, 0};
  for (const auto& d : difficulties) {
    c.count_acc0 += d.is_zero() ? 1 : 0;
    c.count_acc1 += d.is_one() ? 1 : 0;
  }
  return c;
}

inline std::vector<ExtremeCounts> extreme_counts(
    const std::vector<std::pair<std::int64_t, std::vector<Difficulty>>>& per_step) {
  std::vector<ExtremeCounts> out;
  out.reserve(per_step.size());
  for (const auto& [step, diffs] : per_step) out.push_back(extreme_counts(step, diffs));
  return out;
}

struct BucketDispersion {
  int count = 0;
  std::optional<double> mean_length;
  std::optional<BoxStats> box;
};

inline std::array<BucketDispersion, kNumDifficultyBuckets> dispersion_by_difficulty(
    const std::vector<DifficultyRecord>& records) {
  const auto buckets = bucket_by_difficulty(records);
  std::array<BucketDispersion, kNumDifficultyBuckets> out;
  for (int b = 0; b < kNumDifficultyBuckets; ++b) {
    const auto& src = buckets.buckets[b];
    out[b].count = src.count;
    out[b].mean_length = src.mean_length;
    if (src.count > 0) out[b].box = box_stats(src.lengths);
  }
  return out;
}

namespace detail {

inline std::string opt_field(const std::optional<double>& v) { return v ? fmt::format("{}", *v) : std::string(); }

inline nlohmann::json opt_json(const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(); }

}  // namespace detail

inline void write_buckets_csv(std::ostream& out, const std::array<BucketDispersion, kNumDifficultyBuckets>& d) {
  out << "bucket_index,count,mean_length,q1,median,q3,min,max\n";
  for (int b = 0; b < kNumDifficultyBuckets; ++b) {
    const auto& x = d[b];
    if (x.box) {
      out << fmt::format("{},{},{},{},{},{},{},{}\n", b, x.count, *x.mean_length, x.box->q1, x.box->median, x.box->q3,
                         x.box->min, x.box->max);
    } else {
      out << fmt::format("{},{},,,,,,\n", b, x.count);
    }
  }
}

inline void write_histogram_csv(std::ostream& out, const LengthHistogram& h) {
  out << "bin_lo,bin_hi,count,accuracy\n";
  for (const auto& b : h.bins)
    out << fmt::format("{},{},{},{}\n", b.lo, b.hi, b.count, detail::opt_field(b.accuracy));
}

inline void write_extreme_counts_csv(std::ostream& out, const std::vector<ExtremeCounts>& series) {
  out << "step,count_acc0,count_acc1\n";
  for (const auto& c : series) out << fmt::format("{},{},{}\n", c.step, c.count_acc0, c.count_acc1);
}

inline nlohmann::json to_json(const std::array<BucketDispersion, kNumDifficultyBuckets>& d) {
  auto arr = nlohmann::json::array();
  for (int b = 0; b < kNumDifficultyBuckets; ++b) {
    nlohmann::json j{{"bucket_index", b}, {"count", d[b].count}, {"mean_length", detail::opt_json(d[b].mean_length)}};
    if (d[b].box) {
      j["min"] = d[b].box->min;
      j["q1"] = d[b].box->q1;
      j["median"] = d[b].box->median;
      j["q3"] = d[b].box->q3;
      j["max"] = d[b].box->max;
    }
    arr.push_back(std::move(j));
  }
  return arr;
}

inline nlohmann::json to_json(const LengthHistogram& h) {
  auto arr = nlohmann::json::array();
  for (const auto& b : h.bins)
    arr.push_back({{"bin_lo", b.lo}, {"bin_hi", b.hi}, {"count", b.count}, {"accuracy", detail::opt_json(b.accuracy)}});
  return {{"mode", h.mode == HistogramMode::equal_width ? "equal_width" : "equal_count"}, {"bins", arr}};
}

inline nlohmann::json to_json(const std::vector<ExtremeCounts>& series) {
  auto arr = nlohmann::json::array();
  for (const auto& c : series) arr.push_back({{"step", c.step}, {"count_acc0", c.count_acc0}, {"count_acc1", c.count_acc1}});
  return arr;
}

}  // namespace ddpo
