#pragma once

// Group-relative clipped surrogate over a tabular softmax policy.
//
//   J = 1/B sum_groups 1/G sum_i [ min(w_i A_i, clip(w_i, 1-eps, 1+eps) A_i) - beta (w_i - ln w_i - 1) ]
//
// with w_i = pi(a_i | class) / old_prob_i and A_i the group-standardised reward.

#include <algorithm>
#include <cmath>
#include <functional>
#include <ostream>
#include <span>
#include <utility>
#include <vector>

#include <fmt/format.h>

#include "ddpo/core.hpp"
#include "ddpo/policy.hpp"

namespace ddpo {

using AdvantageVector = std::vector<double>;

// (r - mean) / std with the population std; a group of identical rewards yields all zeros.
inline AdvantageVector group_advantages(std::span<const double> rewards) {
  AdvantageVector a(rewards.size(), 0.0);
  // Checked on the values themselves: the mean of equal values can differ from them by an ulp.
  if (std::adjacent_find(rewards.begin(), rewards.end(), std::not_equal_to<>()) == rewards.end()) return a;
  const auto n = static_cast<double>(rewards.size());
  double mean = 0.0;
  for (double r : rewards) mean += r;
  mean /= n;
  double ss = 0.0;
  for (double r : rewards) ss += (r - mean) * (r - mean);
  const double sd = std::sqrt(ss / n);
  if (sd == 0.0) return a;
  for (std::size_t i = 0; i < rewards.size(); ++i) a[i] = (rewards[i] - mean) / sd;
  return a;
}

inline double importance_ratio(const PolicyState& policy, double old_prob, std::string_view class_id,
                               int action_index) {
  return policy.probability(policy.row_of(class_id), action_index) / old_prob;
}

inline double kl_term(double w) { return w - std::log(w) - 1.0; }

inline double clipped_term(double w, double advantage, double epsilon) {
  return std::min(w * advantage, std::clamp(w, 1.0 - epsilon, 1.0 + epsilon) * advantage);
}

struct SurrogateReport {
  double objective = 0.0;
  double clip_fraction = 0.0;  // share of rollouts where the clipped branch is strictly smaller
  double mean_kl = 0.0;
  double grad_norm = 0.0;
};

namespace detail {

struct SurrogateEval {
  SurrogateReport report;
  std::vector<double> gradient;  // same layout as PolicyState::flat_logits
};

inline SurrogateEval evaluate_surrogate(const PolicyState& policy, const Batch& batch,
                                        const std::vector<AdvantageVector>& advantages, const OptimizerConfig& cfg) {
  if (advantages.size() != batch.groups().size()) throw InvariantError("advantages must align with batch groups");

  const int K = policy.num_bins();
  std::vector<std::vector<double>> probs(policy.num_classes());
  for (int c = 0; c < policy.num_classes(); ++c) probs[c] = policy.probabilities(c);

  SurrogateEval out;
  out.gradient.assign(policy.flat_logits().size(), 0.0);
  const double batch_scale = 1.0 / batch.size();
  long clipped = 0, total = 0;
  double kl_sum = 0.0;

  for (std::size_t g = 0; g < batch.groups().size(); ++g) {
    const auto& group = batch.groups()[g];
    const auto& adv = advantages[g];
    if (adv.size() != group.rollouts().size()) throw InvariantError("advantage vector size != group size");
    const int row = policy.row_of(group.class_id());
    const auto& p = probs[row];
    const double scale = batch_scale / group.size();
    double group_sum = 0.0;

    for (std::size_t i = 0; i < group.rollouts().size(); ++i) {
      const auto& r = group.rollouts()[i];
      const double w = p.at(r.action_index()) / r.old_prob();
      const double a = adv[i];
      const double unclipped = w * a;
      const double clipped_val = std::clamp(w, 1.0 - cfg.epsilon, 1.0 + cfg.epsilon) * a;
      const bool clip_active = clipped_val < unclipped;
      const double kl = kl_term(w);
      group_sum += std::min(unclipped, clipped_val) - cfg.beta * kl;
      kl_sum += kl;
      clipped += clip_active ? 1 : 0;
      ++total;

      // d/dw of the summand; the clipped branch is flat in w.
      const double dterm_dw = (clip_active ? 0.0 : a) - cfg.beta * (1.0 - 1.0 / w);
      const double coeff = scale * dterm_dw * w;  // dw/dlogit_k = w (1[k = a] - p_k)
      if (coeff == 0.0) continue;
      double* grad = out.gradient.data() + static_cast<std::size_t>(row) * K;
      for (int k = 0; k < K; ++k) grad[k] -= coeff * p[k];
      grad[r.action_index()] += coeff;
    }
    out.report.objective += group_sum / group.size();
  }
  out.report.objective *= batch_scale;
  out.report.clip_fraction = total ? static_cast<double>(clipped) / total : 0.0;
  out.report.mean_kl = total ? kl_sum / total : 0.0;
  double sq = 0.0;
  for (double v : out.gradient) sq += v * v;
  out.report.grad_norm = std::sqrt(sq);
  return out;
}

}  // namespace detail

inline SurrogateReport surrogate_objective(const PolicyState& policy, const Batch& batch,
                                           const std::vector<AdvantageVector>& advantages,
                                           const OptimizerConfig& cfg) {
  return detail::evaluate_surrogate(policy, batch, advantages, cfg).report;
}

// Analytic gradient of surrogate_objective with respect to every logit.
inline std::vector<double> surrogate_gradient(const PolicyState& policy, const Batch& batch,
                                              const std::vector<AdvantageVector>& advantages,
                                              const OptimizerConfig& cfg) {
  return detail::evaluate_surrogate(policy, batch, advantages, cfg).gradient;
}

// One ascent step: logits += learning_rate * grad J. The report describes the pre-update policy.
inline std::pair<PolicyState, SurrogateReport> gradient_step(const PolicyState& policy, const Batch& batch,
                                                             const std::vector<AdvantageVector>& advantages,
                                                             const OptimizerConfig& cfg) {
  auto eval = detail::evaluate_surrogate(policy, batch, advantages, cfg);
  PolicyState next = policy;
  auto& logits = next.flat_logits();
  for (std::size_t i = 0; i < logits.size(); ++i) logits[i] += cfg.learning_rate * eval.gradient[i];
  return {std::move(next), eval.report};
}

inline void write_metrics_header(std::ostream& out) {
  out << "step,objective,clip_fraction,mean_kl,grad_norm";
}

inline void write_metrics_fields(std::ostream& out, long step, const SurrogateReport& r) {
  out << fmt::format("{},{},{},{},{}", step, r.objective, r.clip_fraction, r.mean_kl, r.grad_norm);
}

}  // namespace ddpo
