#pragma once

// Numerical checks of the two length lemmas on a quadratic accuracy curve:
// E[f] peaks when the mean length sits at l_star, and at l_star it falls as
// the variance grows. Each check is run over several distribution families.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "ddpo/core.hpp"
#include "ddpo/env.hpp"

namespace ddpo {

enum class DistributionFamily { two_point, uniform_grid, discretized_gaussian };

inline std::string_view to_string(DistributionFamily f) {
  switch (f) {
    case DistributionFamily::two_point: return "two_point";
    case DistributionFamily::uniform_grid: return "uniform_grid";
    case DistributionFamily::discretized_gaussian: return "discretized_gaussian";
  }
  return "?";
}

inline constexpr int kUniformGridPoints = 101;
inline constexpr int kGaussianPoints = 161;
inline constexpr double kGaussianTails = 4.0;

// Half-width of the support of a family with standard deviation sigma.
inline double family_half_width(DistributionFamily f, double sigma) {
  switch (f) {
    case DistributionFamily::two_point: return sigma;
    case DistributionFamily::uniform_grid:
      return sigma * std::sqrt(3.0 * (kUniformGridPoints - 1) / (kUniformGridPoints + 1));
    case DistributionFamily::discretized_gaussian: return kGaussianTails * sigma;
  }
  return sigma;
}

// A distribution with mean mu. two_point and uniform_grid have variance sigma^2
// exactly; the discretised Gaussian is truncated at 4 sigma, so its variance is
// slightly below sigma^2.
inline LengthDistribution family_distribution(DistributionFamily f, double mu, double sigma) {
  if (sigma < 0.0) throw InvariantError("sigma must be >= 0");
  if (sigma == 0.0) return LengthDistribution::point_mass(mu);
  LengthDistribution d;
  switch (f) {
    case DistributionFamily::two_point:
      d.lengths = {mu - sigma, mu + sigma};
      d.probs = {0.5, 0.5};
      break;
    case DistributionFamily::uniform_grid: {
      const double a = family_half_width(f, sigma);
      for (int j = 0; j < kUniformGridPoints; ++j) {
        d.lengths.push_back(mu - a + 2.0 * a * j / (kUniformGridPoints - 1));
        d.probs.push_back(1.0 / kUniformGridPoints);
      }
      break;
    }
    case DistributionFamily::discretized_gaussian: {
      double total = 0.0;
      for (int j = 0; j < kGaussianPoints; ++j) {
        const double t = -kGaussianTails + 2.0 * kGaussianTails * j / (kGaussianPoints - 1);
        d.lengths.push_back(mu + sigma * t);
        d.probs.push_back(std::exp(-0.5 * t * t));
        total += d.probs.back();
      }
      for (double& p : d.probs) p /= total;
      break;
    }
  }
  return d;
}

inline bool within_support(const AccuracyCurve& c, const LengthDistribution& d) {
  const auto [lo, hi] = std::minmax_element(d.lengths.begin(), d.lengths.end());
  return *lo >= c.l_star - c.width && *hi <= c.l_star + c.width;
}

inline double monte_carlo_accuracy(const AccuracyCurve& c, const LengthDistribution& d, std::int64_t samples,
                                   std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::discrete_distribution<std::size_t> pick(d.probs.begin(), d.probs.end());
  double s = 0.0;
  for (std::int64_t i = 0; i < samples; ++i) s += accuracy_at(c, d.lengths[pick(rng)]);
  return s / static_cast<double>(samples);
}

struct LemmaCheckConfig {
  double sigma = 500.0;
  int sweep_points = 101;
  std::int64_t mc_samples = 1'000'000;
  std::uint64_t seed = 0;
  double closed_form_tol = 1e-9;
  double mc_tol = 1e-3;
  std::vector<DistributionFamily> families{DistributionFamily::two_point, DistributionFamily::uniform_grid,
                                           DistributionFamily::discretized_gaussian};
};

struct Lemma1Family {
  DistributionFamily family{};
  std::vector<double> mus;
  std::vector<double> expected;  // E[f] per mu
  double max_closed_form_error = 0.0;
  int argmax = -1;
  bool unique_max_at_l_star = false;
  double mc_expected = 0.0;  // at mu = l_star
  double mc_error = 0.0;
  bool pass = false;
};

struct Lemma2Family {
  DistributionFamily family{};
  std::vector<double> sigmas;
  std::vector<double> expected;
  double max_closed_form_error = 0.0;
  bool strictly_decreasing = false;
  bool pass = false;
};

struct LemmaReport {
  AccuracyCurve curve;
  std::vector<Lemma1Family> lemma1;
  std::vector<Lemma2Family> lemma2;
  bool lemma1_pass = false;
  bool lemma2_pass = false;
  bool pass() const { return lemma1_pass && lemma2_pass; }
};

// Lemma 1 sweeps mu over the widest range that keeps every family inside the
// curve's support; Lemma 2 fixes mu = l_star and uses sigma in {0, w/8, w/4, w/2},
// skipping a family whose support would leave the curve's.
inline LemmaReport check_lemmas(const AccuracyCurve& curve, const LemmaCheckConfig& cfg = {}) {
  if (curve.kernel != Kernel::quadratic_concave) throw ConfigError("check_lemmas needs the quadratic_concave kernel");
  if (cfg.sweep_points < 3 || cfg.sweep_points % 2 == 0) throw ConfigError("sweep_points must be odd and >= 3");
  LemmaReport report;
  report.curve = curve;

  double reach = 0.0;
  for (auto f : cfg.families) reach = std::max(reach, family_half_width(f, cfg.sigma));
  const double half_range = curve.width - reach;
  if (half_range <= 0.0) throw ConfigError("sigma too large for the curve's support");

  report.lemma1_pass = !cfg.families.empty();
  for (std::size_t fi = 0; fi < cfg.families.size(); ++fi) {
    const auto family = cfg.families[fi];
    Lemma1Family r;
    r.family = family;
    const int mid = cfg.sweep_points / 2;
    for (int j = 0; j < cfg.sweep_points; ++j) {
      // The midpoint is l_star exactly.
      const double mu = j == mid ? curve.l_star : curve.l_star + half_range * (j - mid) / mid;
      const auto d = family_distribution(family, mu, cfg.sigma);
      const double e = expected_accuracy(curve, d);
      const double closed = quadratic_expected_accuracy(curve, d.mean(), d.variance());
      r.max_closed_form_error = std::max(r.max_closed_form_error, std::abs(e - closed));
      r.mus.push_back(mu);
      r.expected.push_back(e);
    }
    r.argmax = static_cast<int>(std::max_element(r.expected.begin(), r.expected.end()) - r.expected.begin());
    r.unique_max_at_l_star = r.argmax == mid;
    for (int j = 0; j < cfg.sweep_points; ++j)
      if (j != mid && !(r.expected[j] < r.expected[mid])) r.unique_max_at_l_star = false;
    const auto at_star = family_distribution(family, curve.l_star, cfg.sigma);
    r.mc_expected = monte_carlo_accuracy(curve, at_star, cfg.mc_samples, cfg.seed + fi);
    r.mc_error = std::abs(r.mc_expected - r.expected[mid]);
    r.pass = r.unique_max_at_l_star && r.max_closed_form_error <= cfg.closed_form_tol && r.mc_error <= cfg.mc_tol;
    report.lemma1_pass = report.lemma1_pass && r.pass;
    report.lemma1.push_back(std::move(r));
  }

  report.lemma2_pass = false;
  bool all = true;
  for (auto family : cfg.families) {
    if (family_half_width(family, curve.width / 2.0) > curve.width) continue;
    Lemma2Family r;
    r.family = family;
    r.strictly_decreasing = true;
    for (double frac : {0.0, 0.125, 0.25, 0.5}) {
      const double sigma = frac * curve.width;
      const auto d = family_distribution(family, curve.l_star, sigma);
      const double e = expected_accuracy(curve, d);
      const double closed = curve.p_max * (1.0 - d.variance() / (curve.width * curve.width));
      r.max_closed_form_error = std::max(r.max_closed_form_error, std::abs(e - closed));
      if (!r.expected.empty() && !(e < r.expected.back())) r.strictly_decreasing = false;
      r.sigmas.push_back(sigma);
      r.expected.push_back(e);
    }
    r.pass = r.strictly_decreasing && r.max_closed_form_error <= cfg.closed_form_tol;
    all = all && r.pass;
    report.lemma2_pass = true;
    report.lemma2.push_back(std::move(r));
  }
  report.lemma2_pass = report.lemma2_pass && all;
  return report;
}

inline nlohmann::json to_json(const LemmaReport& r) {
  nlohmann::json l1 = nlohmann::json::array(), l2 = nlohmann::json::array();
  for (const auto& f : r.lemma1)
    l1.push_back({{"family", to_string(f.family)},
                  {"max_closed_form_error", f.max_closed_form_error},
                  {"argmax_mu", f.mus.at(f.argmax)},
                  {"unique_max_at_l_star", f.unique_max_at_l_star},
                  {"monte_carlo", f.mc_expected},
                  {"monte_carlo_error", f.mc_error},
                  {"pass", f.pass}});
  for (const auto& f : r.lemma2)
    l2.push_back({{"family", to_string(f.family)},
                  {"sigmas", f.sigmas},
                  {"expected_accuracy", f.expected},
                  {"max_closed_form_error", f.max_closed_form_error},
                  {"strictly_decreasing", f.strictly_decreasing},
                  {"pass", f.pass}});
  return {{"curve",
           {{"p_max", r.curve.p_max}, {"l_star", r.curve.l_star}, {"width", r.curve.width}}},
          {"lemma1", {{"pass", r.lemma1_pass}, {"families", l1}}},
          {"lemma2", {{"pass", r.lemma2_pass}, {"families", l2}}},
          {"pass", r.pass()}};
}

}  // namespace ddpo
