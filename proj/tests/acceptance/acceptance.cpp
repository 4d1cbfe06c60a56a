// Acceptance harness: one PASS/FAIL line per criterion.
//
// Exits 0 once every criterion has been evaluated, so ctest records the run
// even when a behavioural criterion fails; --strict exits 1 on any FAIL.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <functional>
#include <future>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "ddpo/ddpo.hpp"
#include "oracles.hpp"

using namespace ddpo;

namespace {

struct Outcome {
  bool pass = true;
  std::vector<std::string> notes;

  void expect(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      notes.push_back("failed: " + what);
    }
  }
  void note(std::string s) { notes.push_back(std::move(s)); }
};

bool close(double a, double b, double tol = 1e-12) { return std::abs(a - b) <= tol; }

// ---------------------------------------------------------------------------

Outcome equation_fidelity() {
  Outcome o;
  ShapingConfig cfg;

  std::vector<std::pair<int, bool>> lc;
  for (int c : {1, 0, 1, 1, 0, 1, 0, 1, 1, 0}) lc.push_back({100, c == 1});
  o.expect(close(compute_difficulty(oracle::group_of("q", lc)).value(), 0.6), "difficulty 0.6");
  o.expect(compute_difficulty(oracle::group_of("q", {{1, false}, {2, false}})).value() == 0.0, "difficulty 0");
  o.expect(compute_difficulty(oracle::group_of("q", {{1, true}, {2, true}})).value() == 1.0, "difficulty 1");

  {
    Batch b({oracle::group_of("a", {{2000, true}, {4000, true}, {100, false}, {100, false}}),
             oracle::group_of("b", {{3000, true}, {100, false}})});
    auto ref = build_length_reference(b, {compute_difficulty(b.groups()[0]), compute_difficulty(b.groups()[1])});
    o.expect(close(ref.per_difficulty_mean.at(Difficulty(1, 2)), 3000.0), "reference mean at 0.5");
    Batch c({oracle::group_of("a", {{7000, true}, {1, false}, {1, false}, {1, false}, {1, false}, {1, false},
                                    {1, false}, {1, false}, {1, false}, {1, false}})});
    auto rc = build_length_reference(c, {compute_difficulty(c.groups()[0])});
    o.expect(close(rc.per_difficulty_mean.at(Difficulty(1, 10)), 7000.0), "reference mean at 0.1");
    Batch d({oracle::group_of("a", {{2000, true}, {4000, true}}), oracle::group_of("b", {{3000, true}, {7000, true}})});
    auto rd = build_length_reference(d, {compute_difficulty(d.groups()[0]), compute_difficulty(d.groups()[1])});
    o.expect(rd.batch_mean && close(*rd.batch_mean, 4000.0), "batch mean 4000");
  }

  LengthReference ref;
  ref.per_difficulty_mean.emplace(Difficulty(2, 10), 6000.0);
  o.expect(close(normalize_length(5000, Difficulty(2, 10), "q", ref, cfg).z, -0.078125), "z = -0.078125");
  o.expect(normalize_length(6000, Difficulty(2, 10), "q", ref, cfg).z == 0.0, "z = 0");
  o.expect(close(normalize_length(5000, Difficulty(0, 10), "q", ref, cfg).z, 0.390625), "z = 0.390625");

  auto hard = shape_reward(Rollout(5000, true, 0, 1.0), Difficulty(2, 10), -0.078125, cfg);
  o.expect(close(hard.alpha, 0.2) && close(hard.shaped, 0.984375), "hard shaped 0.984375");
  o.expect(shape_reward(Rollout(12000, true, 0, 1.0), Difficulty(2, 10), 0.3, cfg).shaped == 1.0, "above bar");
  auto easy = shape_reward(Rollout(4000, true, 0, 1.0), Difficulty(8, 10), 0.078125, cfg);
  o.expect(close(easy.alpha, 0.8) && close(easy.shaped, 0.9375), "easy shaped 0.9375");
  auto zero = shape_reward(Rollout(5000, false, 0, 1.0), Difficulty(0, 10), 0.390625, cfg);
  o.expect(close(zero.alpha, 0.4) && close(zero.shaped, 0.15625), "zero-difficulty shaped 0.15625");

  {
    // Distinct difficulties (2/3 and 1) keep the two references apart.
    Batch b({oracle::group_of("a", {{3000, true}, {3000, true}, {3000, false}}),
             oracle::group_of("b", {{5000, true}, {5000, true}})});
    bool all_base = true;
    for (const auto& row : shape_batch(b, cfg).rewards)
      for (const auto& r : row) all_base = all_base && r.shaped == r.base;
    o.expect(all_base, "zero deviation keeps base");
    std::vector<std::pair<int, bool>> inc;
    for (int l = 1300; l <= 12800; l += 1150) inc.push_back({l, true});
    auto s = shape_batch(Batch({oracle::group_of("a", inc)}), cfg).rewards[0];
    bool decreasing = true;
    for (std::size_t i = 1; i < s.size(); ++i) decreasing = decreasing && s[i].shaped < s[i - 1].shaped;
    o.expect(decreasing, "all-correct group strictly decreasing");
    ShapingConfig raw = cfg;
    raw.norm_mode = NormMode::raw;
    raw.enable_alpha = raw.enable_lower_bar = raw.enable_upper_bar = false;
    auto g = oracle::group_of("a", {{6400, true}, {3200, false}, {12800, false}});
    auto rs = shape_batch(Batch({g}), raw).rewards[0];
    bool ablated = true;
    for (std::size_t i = 0; i < rs.size(); ++i)
      ablated = ablated && close(rs[i].shaped, g.rollouts()[i].base_reward() + g.rollouts()[i].length() / 12800.0);
    o.expect(ablated, "ablated raw shaping");
  }

  auto a2 = group_advantages(std::vector<double>{1, 0});
  o.expect(close(a2[0], 1.0) && close(a2[1], -1.0), "advantages [1,0]");
  for (double v : group_advantages(std::vector<double>{1, 1, 1})) o.expect(v == 0.0, "advantages [1,1,1]");
  auto a4 = group_advantages(std::vector<double>{1, 1, 0, 0});
  o.expect(close(a4[0], 1) && close(a4[1], 1) && close(a4[2], -1) && close(a4[3], -1), "advantages [1,1,0,0]");

  PolicyState policy({"c0"}, LengthBins::uniform(12800, 2));  // p = 0.5 per action
  o.expect(importance_ratio(policy, 0.5, "c0", 0) == 1.0, "ratio 1");
  o.expect(close(importance_ratio(policy, 0.25, "c0", 0), 2.0), "ratio 2");
  o.expect(close(importance_ratio(policy, 1.0, "c0", 0), 0.5), "ratio 0.5");
  o.expect(kl_term(1.0) == 0.0, "kl(1)");
  o.expect(close(kl_term(2.0), 0.3068528194400547), "kl(2)");
  o.expect(close(kl_term(0.5), 0.1931471805599453), "kl(0.5)");
  o.expect(close(clipped_term(1.3, 1.0, 0.2), 1.2), "clip 1.2");
  o.expect(close(clipped_term(0.7, -1.0, 0.2), -0.8), "clip -0.8");
  o.expect(clipped_term(1.0, 0.37, 0.7) == 0.37, "clip identity");

  OptimizerConfig ocfg;
  Batch unit({RolloutGroup("q", "c0", {Rollout(1, true, 0, 0.5), Rollout(1, false, 1, 0.5), Rollout(1, true, 0, 0.5)})});
  auto adv = group_advantages(std::vector<double>{1, 0, 1});
  o.expect(close(surrogate_objective(policy, unit, {adv}, ocfg).objective, 0.0), "unit ratios give 0");
  o.expect(surrogate_objective(policy, unit, {{0, 0, 0}}, ocfg).objective == 0.0, "zero advantages give 0");
  OptimizerConfig nokl = ocfg;
  nokl.beta = 0.0;
  Batch pair({RolloutGroup("q", "c0", {Rollout(1, true, 0, 0.5 / 1.3), Rollout(1, false, 1, 0.5 / 0.7)})});
  o.expect(close(surrogate_objective(policy, pair, {{1.0, -1.0}}, nokl).objective, 0.2), "objective 0.2");

  std::mt19937_64 rng(1);
  auto p = oracle::random_policy(rng, 2, 4, 12800);
  auto b = oracle::random_batch(rng, p, 4, 4);
  std::vector<AdvantageVector> advs(4, AdvantageVector{0.5, -1.0, 1.5, -1.0});
  o.expect(oracle::relative_error(surrogate_gradient(p, b, advs, ocfg), oracle::fd_gradient(p, b, advs, ocfg)) < 1e-5,
           "2-class 4-bin gradient");
  o.expect(gradient_step(p, b, std::vector<AdvantageVector>(4, AdvantageVector(4, 0.0)), nokl).first == p,
           "zero advantages leave logits");
  Batch single({RolloutGroup("q", "c0", {Rollout(1, true, 1, 0.5), Rollout(1, false, 1, 0.5)})});
  o.expect(gradient_step(policy, single, {{1.0, 0.0}}, nokl).first.logits(0)[1] > 0.0, "positive advantage raises logit");
  return o;
}

Outcome lemma1() {
  Outcome o;
  const AccuracyCurve curve{Kernel::quadratic_concave, 0.8, 6000.0, 4000.0};
  LemmaCheckConfig cfg;  // sigma 500, 101 points, 10^6 samples, tolerance 1e-3
  auto r = check_lemmas(curve, cfg);
  for (const auto& f : r.lemma1) {
    o.note(fmt::format("{}: argmax {:.0f}, mc error {:.1e}", to_string(f.family), f.mus.at(f.argmax), f.mc_error));
    o.expect(f.pass, std::string(to_string(f.family)));
  }
  o.expect(r.lemma1_pass, "lemma 1");
  return o;
}

Outcome lemma2() {
  Outcome o;
  const AccuracyCurve curve{Kernel::quadratic_concave, 0.8, 6000.0, 4000.0};
  LemmaCheckConfig cfg;
  cfg.mc_samples = 1;
  auto r = check_lemmas(curve, cfg);
  for (const auto& f : r.lemma2) {
    o.note(fmt::format("{}: closed form error {:.1e}", to_string(f.family), f.max_closed_form_error));
    o.expect(f.pass, std::string(to_string(f.family)));
  }
  o.expect(r.lemma2_pass && !r.lemma2.empty(), "lemma 2");
  return o;
}

// ---------------------------------------------------------------------------

constexpr int kSeeds = 5;
constexpr int kSteps = 500;

struct Arm {
  std::string label;
  ExperimentConfig cfg;
  std::vector<RunSummary> runs;  // one per seed
};

ExperimentConfig arm_config(std::optional<NormMode> norm) {
  ExperimentConfig cfg;
  cfg.optimizer.steps = kSteps;
  cfg.eval_interval = kSteps;
  if (!norm) cfg.shaping.reset();
  else cfg.shaping->norm_mode = *norm;
  return cfg;
}

std::vector<Arm> train_arms() {
  std::vector<Arm> arms{{"grpo", arm_config(std::nullopt), {}},
                        {"ddpo", arm_config(NormMode::difficulty_mean), {}},
                        {"batch", arm_config(NormMode::batch_mean), {}},
                        {"query", arm_config(NormMode::query_mean), {}}};
  std::vector<std::future<RunSummary>> jobs;
  for (auto& arm : arms)
    for (int s = 0; s < kSeeds; ++s) {
      auto cfg = arm.cfg;
      cfg.optimizer.seed = static_cast<std::uint64_t>(s);
      jobs.push_back(std::async(std::launch::async, [cfg] { return summarize(run_experiment(cfg), cfg.env); }));
    }
  std::size_t j = 0;
  for (auto& arm : arms)
    for (int s = 0; s < kSeeds; ++s) arm.runs.push_back(jobs[j++].get());
  return arms;
}

const Arm& arm(const std::vector<Arm>& arms, const std::string& label) {
  for (const auto& a : arms)
    if (a.label == label) return a;
  throw std::logic_error("no arm " + label);
}

Outcome distribution_shift(const std::vector<Arm>& arms) {
  Outcome o;
  const auto& g = arm(arms, "grpo").runs;
  const auto& d = arm(arms, "ddpo").runs;
  const std::size_t easy = 0, hardest = g[0].classes.size() - 1;
  int easy_ok = 0, long_ok = 0, acc_ok = 0;
  for (int s = 0; s < kSeeds; ++s) {
    const auto &ge = g[s].classes[easy], &de = d[s].classes[easy];
    const auto &gh = g[s].classes[hardest], &dh = d[s].classes[hardest];
    easy_ok += de.mean_length < ge.mean_length && de.expected_accuracy >= ge.expected_accuracy - 0.02;
    long_ok += dh.mean_length > gh.mean_length;
    acc_ok += dh.expected_accuracy > gh.expected_accuracy;
    o.note(fmt::format("seed {}: easy {:.0f} vs {:.0f} (acc {:.4f} vs {:.4f}); hardest {:.0f} vs {:.0f} (acc {:.4f} vs "
                       "{:.4f})",
                       s, de.mean_length, ge.mean_length, de.expected_accuracy, ge.expected_accuracy, dh.mean_length,
                       gh.mean_length, dh.expected_accuracy, gh.expected_accuracy));
  }
  o.note(fmt::format("easy shorter at matched accuracy {}/5, hardest longer {}/5, hardest more accurate {}/5", easy_ok,
                     long_ok, acc_ok));
  o.expect(easy_ok >= 4, "easiest class shorter");
  o.expect(long_ok >= 4, "hardest class longer");
  o.expect(acc_ok >= 4, "hardest class more accurate");
  return o;
}

Outcome extreme_counts_shift(const std::vector<Arm>& arms) {
  Outcome o;
  const auto& g = arm(arms, "grpo").runs;
  const auto& d = arm(arms, "ddpo").runs;
  int acc0 = 0, acc1 = 0;
  for (int s = 0; s < kSeeds; ++s) {
    acc0 += d[s].final_extremes.count_acc0 <= g[s].final_extremes.count_acc0;
    acc1 += d[s].final_extremes.count_acc1 >= g[s].final_extremes.count_acc1;
    o.note(fmt::format("seed {}: acc0 {} vs {}, acc1 {} vs {}", s, d[s].final_extremes.count_acc0,
                       g[s].final_extremes.count_acc0, d[s].final_extremes.count_acc1, g[s].final_extremes.count_acc1));
  }
  o.note(fmt::format("acc0 not higher {}/5, acc1 not lower {}/5", acc0, acc1));
  o.expect(acc0 >= 4, "count_acc0");
  o.expect(acc1 >= 3, "count_acc1");
  return o;
}

Outcome length_concentration(const std::vector<Arm>& arms) {
  Outcome o;
  const auto& g = arm(arms, "grpo").runs;
  const auto& d = arm(arms, "ddpo").runs;
  int seeds_ok = 0;
  for (int s = 0; s < kSeeds; ++s) {
    int classes_ok = 0;
    const int n = static_cast<int>(g[s].classes.size());
    for (int c = 0; c < n; ++c) classes_ok += d[s].classes[c].iqr() <= g[s].classes[c].iqr();
    seeds_ok += 2 * classes_ok > n;
    o.note(fmt::format("seed {}: iqr not larger in {}/{} classes", s, classes_ok, n));
  }
  o.expect(2 * seeds_ok > kSeeds, "majority of seeds");
  return o;
}

Outcome norm_mode_ablation(const std::vector<Arm>& arms) {
  Outcome o;
  const auto& d = arm(arms, "ddpo").runs;
  const auto& b = arm(arms, "batch").runs;
  const auto& q = arm(arms, "query").runs;
  const std::size_t hardest = d[0].classes.size() - 1;
  int longer = 0, less_accurate = 0;
  double max_len_gap = 0.0, max_acc_gap = 0.0;
  for (int s = 0; s < kSeeds; ++s) {
    const double len_gap = b[s].classes[0].mean_length - d[s].classes[0].mean_length;
    const double acc_gap = q[s].classes[hardest].expected_accuracy - d[s].classes[hardest].expected_accuracy;
    max_len_gap = std::max(max_len_gap, std::abs(len_gap));
    max_acc_gap = std::max(max_acc_gap, std::abs(acc_gap));
    longer += len_gap > 0.0;
    less_accurate += acc_gap < 0.0;
    o.note(fmt::format("seed {}: easy batch {:.1f} vs difficulty {:.1f}; hardest acc query {:.5f} vs difficulty {:.5f}", s,
                       b[s].classes[0].mean_length, d[s].classes[0].mean_length, q[s].classes[hardest].expected_accuracy,
                       d[s].classes[hardest].expected_accuracy));
  }
  o.note(fmt::format("batch_mean longer {}/5, query_mean less accurate {}/5", longer, less_accurate));
  // A reference that is constant within a group cancels in the standardized advantage,
  // so the modes differ only through the bar branches; the gaps show how much that is.
  o.note(fmt::format("largest |easy length gap| {:.2f} tokens, largest |hardest accuracy gap| {:.2e}", max_len_gap,
                     max_acc_gap));
  o.expect(longer >= 4, "batch_mean easiest class longer");
  o.expect(less_accurate >= 3, "query_mean hardest class less accurate");
  return o;
}

Outcome overconfidence(const std::vector<Arm>& arms) {
  Outcome o;
  int ok = 0;
  for (int s = 0; s < kSeeds; ++s) {
    const auto& r = arm(arms, "ddpo").runs[s];
    ok += r.initial_overconfident.value_or(false) && !r.final_overconfident.value_or(true);
    auto show = [](const std::optional<bool>& v) { return v ? (*v ? "true" : "false") : "undefined"; };
    o.note(fmt::format("seed {}: step 0 {}, final {}", s, show(r.initial_overconfident), show(r.final_overconfident)));
  }
  o.note(fmt::format("{}/5 seeds flip from true to false", ok));
  o.expect(ok >= 4, "flag cleared by training");
  return o;
}

// ---------------------------------------------------------------------------

Outcome property_suites() {
  Outcome o;
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(0.0, 1.0);

  bool inv = true;
  for (int t = 0; t < 1000; ++t) {
    std::vector<double> r(2 + t % 15), s;
    for (double& x : r) x = 6.0 * u(rng) - 3.0;
    const double shift = 10.0 * u(rng) - 5.0, scale = 0.01 + 50.0 * u(rng);
    for (double x : r) s.push_back(scale * x + shift);
    auto a = group_advantages(r), b = group_advantages(s);
    for (std::size_t i = 0; i < a.size(); ++i) inv = inv && std::abs(a[i] - b[i]) < 1e-9;
  }
  o.expect(inv, "advantage shift/scale invariance");

  bool kl = kl_term(1.0) == 0.0;
  for (int i = 1; i <= 1000; ++i) {
    const double w = 0.01 * i;
    if (i != 100) kl = kl && kl_term(w) > 0.0;
  }
  o.expect(kl, "KL nonnegative, zero only at w = 1");

  bool mono = true, alpha = true;
  for (int t = 0; t < 300; ++t) {
    ShapingConfig cfg;
    cfg.theta = 0.05 + 0.95 * u(rng);
    cfg.l_low = static_cast<int>(6000 * u(rng));
    cfg.l_high = cfg.l_low + 1 + static_cast<int>((12799 - cfg.l_low) * u(rng));
    cfg.norm_mode = static_cast<NormMode>(rng() % 4);
    const Difficulty diff(static_cast<int>(rng() % 11), 10);
    LengthReference ref;
    const double mu = 1.0 + 12799.0 * u(rng);
    ref.per_difficulty_mean.emplace(diff, mu);
    ref.batch_mean = mu;
    ref.per_query_mean.emplace("q", mu);
    ref.per_query_all_mean.emplace("q", mu);
    std::optional<double> prev;
    const bool hard = diff.value() < cfg.theta;
    for (int L = 1; L <= 12800; L += 41) {
      auto r = shape_reward(Rollout(L, true, 0, 1.0), diff, normalize_length(L, diff, "q", ref, cfg).z, cfg);
      alpha = alpha && (hard ? r.alpha > 0.0 && r.alpha <= cfg.theta : r.alpha >= cfg.theta && r.alpha <= 1.0);
      const bool in_range = hard ? L <= cfg.l_high : L >= cfg.l_low;
      if (!in_range) {
        mono = mono && r.shaped == r.base;
        prev.reset();
        continue;
      }
      if (prev) mono = mono && (hard ? r.shaped >= *prev : r.shaped <= *prev);
      prev = r.shaped;
    }
  }
  o.expect(mono, "shaping monotone per branch");
  o.expect(alpha, "alpha ranges");

  bool total = true;
  for (int t = 0; t < 200; ++t) {
    std::vector<DifficultyRecord> recs(1 + t);
    for (auto& r : recs) {
      const int g = 2 + static_cast<int>(rng() % 15);
      r = {Difficulty(static_cast<int>(rng() % (g + 1)), g).value(), 1.0 + 12799.0 * u(rng)};
    }
    total = total && bucket_by_difficulty(recs).total() == static_cast<int>(recs.size());
  }
  o.expect(total, "bucket totality");

  bool quant = true;
  for (int t = 0; t < 300; ++t) {
    std::vector<double> v(1 + t % 50);
    for (double& x : v) x = 12800.0 * u(rng);
    auto b = box_stats(v);
    quant = quant && b.min <= b.q1 && b.q1 <= b.median && b.median <= b.q3 && b.q3 <= b.max;
  }
  o.expect(quant, "quantile monotonicity");

  double worst = 0.0;
  std::normal_distribution<double> n(0.0, 1.0);
  for (int t = 0; t < 20; ++t) {
    auto p = oracle::random_policy(rng, 1 + t % 4, 4 + t % 13, 12800);
    auto b = oracle::random_batch(rng, p, 3 + t % 5, 2 + t % 7);
    std::vector<AdvantageVector> adv;
    for (const auto& g : b.groups()) {
      AdvantageVector a(g.size());
      for (double& x : a) x = n(rng);
      adv.push_back(a);
    }
    OptimizerConfig cfg;
    worst = std::max(worst, oracle::relative_error(surrogate_gradient(p, b, adv, cfg), oracle::fd_gradient(p, b, adv, cfg)));
  }
  o.note(fmt::format("worst gradient relative error {:.1e}", worst));
  o.expect(worst < 1e-5, "gradient vs finite differences");

  namespace fs = std::filesystem;
  const auto root = fs::temp_directory_path() / "ddpo_acceptance_determinism";
  std::string first;
  for (int i = 0; i < 2; ++i) {
    ExperimentConfig cfg;
    cfg.optimizer.steps = 50;
    cfg.optimizer.seed = 11;
    cfg.output_dir = root / std::to_string(i);
    fs::remove_all(cfg.output_dir);
    run(cfg);
    const auto bytes = oracle::slurp((cfg.output_dir / "metrics.csv").string());
    if (i == 0) first = bytes;
    else o.expect(!bytes.empty() && bytes == first, "byte-identical metrics.csv");
  }
  fs::remove_all(root);
  return o;
}

void report(const std::string& name, const Outcome& o, double seconds, int& failures) {
  fmt::print("{:<22} {}  ({:.1f}s)\n", name, o.pass ? "PASS" : "FAIL", seconds);
  for (const auto& n : o.notes) fmt::print("    {}\n", n);
  failures += o.pass ? 0 : 1;
}

template <typename F>
Outcome timed(F&& f, double& seconds) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = f();
  } catch (const std::exception& e) {
    o.pass = false;
    o.note(std::string("exception: ") + e.what());
  }
  seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  bool strict = false;
  for (int i = 1; i < argc; ++i) strict = strict || std::strcmp(argv[i], "--strict") == 0;

  int failures = 0;
  double secs = 0.0;
  auto o = timed(equation_fidelity, secs);
  report("equation-fidelity", o, secs, failures);
  o = timed(lemma1, secs);
  report("lemma-1", o, secs, failures);
  o = timed(lemma2, secs);
  report("lemma-2", o, secs, failures);

  std::vector<Arm> arms;
  double train_secs = 0.0;
  auto trained = timed(
      [&] {
        arms = train_arms();
        return Outcome{};
      },
      train_secs);
  fmt::print("trained 4 arms x {} seeds x {} steps in {:.1f}s\n", kSeeds, kSteps, train_secs);
  auto behavioural = [&](const std::string& name, Outcome (*f)(const std::vector<Arm>&)) {
    if (!trained.pass) {
      report(name, trained, 0.0, failures);
      return;
    }
    auto r = timed([&] { return f(arms); }, secs);
    report(name, r, secs, failures);
  };
  behavioural("distribution-shift", distribution_shift);
  behavioural("extreme-counts", extreme_counts_shift);
  behavioural("length-concentration", length_concentration);
  behavioural("norm-mode-ablation", norm_mode_ablation);
  o = timed(property_suites, secs);
  report("property-suites", o, secs, failures);
  behavioural("overconfidence", overconfidence);

  fmt::print("{} of 9 criteria failed\n", failures);
  return strict && failures > 0 ? 1 : 0;
}
