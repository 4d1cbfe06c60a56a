#pragma once

// Tabular softmax policy: one row of logits per task class over K length bins.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ddpo/core.hpp"

namespace ddpo {

// K contiguous integer ranges covering [1, l_max]. Bin k spans [edge(k), edge(k+1) - 1],
// except the last bin, which also includes l_max.
class LengthBins {
 public:
  LengthBins(std::vector<int> edges) : edges_(std::move(edges)) {
    if (edges_.size() < 2) throw InvariantError("length bins need at least two edges");
    if (edges_.front() != 1) throw InvariantError("first bin edge must be 1");
    for (std::size_t i = 1; i < edges_.size(); ++i)
      if (edges_[i] <= edges_[i - 1]) throw InvariantError("bin edges must be strictly increasing");
  }

  static LengthBins uniform(int l_max, int num_bins) {
    if (num_bins < 1 || l_max < num_bins + 1) throw InvariantError("need l_max > num_bins >= 1");
    std::vector<int> edges(num_bins + 1);
    for (int k = 0; k <= num_bins; ++k)
      edges[k] = 1 + static_cast<int>((static_cast<long long>(k) * (l_max - 1)) / num_bins);
    return LengthBins(std::move(edges));
  }

  int num_bins() const noexcept { return static_cast<int>(edges_.size()) - 1; }
  int l_max() const noexcept { return edges_.back(); }
  const std::vector<int>& edges() const noexcept { return edges_; }

  int lo(int k) const { return edges_.at(k); }
  // Inclusive upper end.
  int hi(int k) const { return k + 1 == num_bins() ? edges_.back() : edges_.at(k + 1) - 1; }
  int width(int k) const { return hi(k) - lo(k) + 1; }
  double midpoint(int k) const { return 0.5 * (lo(k) + hi(k)); }

  int bin_of(int length) const {
    if (length < 1 || length > l_max()) throw InvariantError("length outside bin range");
    auto it = std::upper_bound(edges_.begin(), edges_.end() - 1, length);
    return static_cast<int>(it - edges_.begin()) - 1;
  }

  friend bool operator==(const LengthBins&, const LengthBins&) = default;

 private:
  std::vector<int> edges_;
};

inline std::vector<double> softmax(std::span<const double> logits) {
  std::vector<double> p(logits.size());
  const double m = *std::max_element(logits.begin(), logits.end());
  double z = 0.0;
  for (std::size_t k = 0; k < logits.size(); ++k) {
    p[k] = std::exp(logits[k] - m);
    z += p[k];
  }
  for (double& v : p) v /= z;
  return p;
}

class PolicyState {
 public:
  PolicyState(std::vector<std::string> class_ids, LengthBins bins)
      : class_ids_(std::move(class_ids)), bins_(std::move(bins)), logits_(class_ids_.size() * bins_.num_bins(), 0.0) {
    if (class_ids_.empty()) throw InvariantError("policy needs at least one class");
  }

  int num_classes() const noexcept { return static_cast<int>(class_ids_.size()); }
  int num_bins() const noexcept { return bins_.num_bins(); }
  const LengthBins& bins() const noexcept { return bins_; }
  const std::vector<std::string>& class_ids() const noexcept { return class_ids_; }

  int row_of(std::string_view class_id) const {
    auto it = std::find(class_ids_.begin(), class_ids_.end(), class_id);
    if (it == class_ids_.end()) throw InvariantError("unknown class '" + std::string(class_id) + "'");
    return static_cast<int>(it - class_ids_.begin());
  }

  std::span<const double> logits(int row) const {
    return {logits_.data() + static_cast<std::size_t>(row) * num_bins(), static_cast<std::size_t>(num_bins())};
  }
  std::span<double> logits(int row) {
    return {logits_.data() + static_cast<std::size_t>(row) * num_bins(), static_cast<std::size_t>(num_bins())};
  }
  const std::vector<double>& flat_logits() const noexcept { return logits_; }
  std::vector<double>& flat_logits() noexcept { return logits_; }

  std::vector<double> probabilities(int row) const { return softmax(logits(row)); }
  double probability(int row, int action) const { return probabilities(row).at(action); }

  // Exact mean and variance of the sampled length (uniform within the chosen bin).
  LengthStats length_stats(int row) const {
    auto p = probabilities(row);
    double mean = 0.0, second = 0.0;
    for (int k = 0; k < num_bins(); ++k) {
      const double a = bins_.lo(k), b = bins_.hi(k), n = b - a + 1;
      const double m = 0.5 * (a + b);
      // Discrete uniform on {a..b}: variance (n^2 - 1) / 12.
      mean += p[k] * m;
      second += p[k] * (m * m + (n * n - 1.0) / 12.0);
    }
    return {mean, std::max(0.0, second - mean * mean), 1};
  }

  friend bool operator==(const PolicyState&, const PolicyState&) = default;

 private:
  std::vector<std::string> class_ids_;
  LengthBins bins_;
  std::vector<double> logits_;  // row-major [class][bin]
};

}  // namespace ddpo
