// Command-line front end: run, compare, check-lemmas, analyze.
//
// Exit codes: 0 success, 1 failed check or unexpected error, 2 config or
// usage error, 3 I/O error.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "ddpo/ddpo.hpp"

namespace {

enum ExitCode { kOk = 0, kFailure = 1, kConfig = 2, kIo = 3 };

struct Overrides {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> steps;
  std::optional<std::string> mode;
  std::optional<std::string> norm;
  std::optional<double> theta;
  std::optional<std::string> out;
  std::optional<int> threads;
  bool log_rollouts = false;
};

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config, "Config file (INI)");
  cmd->add_option("--steps", o.steps, "Training steps")->check(CLI::NonNegativeNumber);
  cmd->add_option("--mode", o.mode, "grpo or ddpo")->check(CLI::IsMember({"grpo", "ddpo"}));
  cmd->add_option("--norm", o.norm, "raw, query, batch or difficulty")
      ->check(CLI::IsMember({"raw", "query", "batch", "difficulty", "query_mean", "batch_mean", "difficulty_mean"}));
  cmd->add_option("--theta", o.theta, "Difficulty threshold in [0,1]");
  cmd->add_option("--out", o.out, "Output directory");
  cmd->add_option("--threads", o.threads, "Sampling threads")->check(CLI::PositiveNumber);
}

ddpo::ExperimentConfig build_config(const Overrides& o) {
  auto cfg = o.config.empty() ? ddpo::ExperimentConfig{} : ddpo::load_config(o.config);
  if (o.seed) cfg.optimizer.seed = *o.seed;
  if (o.steps) cfg.optimizer.steps = *o.steps;
  if (o.out) cfg.output_dir = *o.out;
  if (o.threads) cfg.threads = *o.threads;
  if (o.log_rollouts) cfg.log_rollouts = true;
  if (o.mode == "grpo") {
    if (o.norm || o.theta) throw ddpo::ConfigError("--norm and --theta need --mode ddpo");
    cfg.shaping.reset();
  } else if (o.mode == "ddpo" && !cfg.shaping) {
    cfg.shaping = ddpo::default_shaping_for(cfg.env.l_max);
  }
  if (o.norm || o.theta) {
    if (!cfg.shaping) throw ddpo::ConfigError("--norm and --theta need shaping enabled");
    if (o.norm) cfg.shaping->norm_mode = ddpo::parse_norm_mode(*o.norm);
    if (o.theta) cfg.shaping->theta = *o.theta;
  }
  ddpo::validate_experiment(cfg);
  return cfg;
}

void print_classes(const std::vector<ddpo::ClassSnapshot>& classes) {
  for (const auto& c : classes)
    fmt::print("  {:<12} mean_length {:8.1f}  iqr {:7.1f}  expected_accuracy {:.4f}\n", c.class_id, c.mean_length,
               c.iqr(), c.expected_accuracy);
}

int cmd_run(const Overrides& o) {
  const auto cfg = build_config(o);
  const auto result = ddpo::run(cfg);
  fmt::print("{} seed {} steps {} -> {}\n", ddpo::describe(cfg), cfg.optimizer.seed, cfg.optimizer.steps,
             cfg.output_dir.string());
  print_classes(ddpo::class_snapshots(result.final_policy, cfg.env));
  return kOk;
}

int cmd_compare(const Overrides& o, const std::string& against, const std::vector<std::uint64_t>& seeds) {
  ddpo::ExperimentConfig b = build_config(o);
  ddpo::ExperimentConfig a = b;
  if (against.empty()) {
    a.shaping.reset();
    if (!b.shaping) b.shaping = ddpo::default_shaping_for(b.env.l_max);
  } else {
    Overrides oa = o;
    oa.config = against;
    oa.mode.reset();
    oa.norm.reset();
    oa.theta.reset();
    a = build_config(oa);
  }
  const auto report = ddpo::compare(a, b, seeds);
  namespace fs = std::filesystem;
  const fs::path dir = o.out ? fs::path(*o.out) : fs::path("ddpo_compare");
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ddpo::IoError("cannot create output directory '" + dir.string() + "': " + ec.message());
  const auto path = dir / "compare.json";
  std::ofstream out(path);
  out << ddpo::to_json(report).dump(2) << '\n';
  out.close();
  if (!out) throw ddpo::IoError("error while writing '" + path.string() + "'");

  fmt::print("a = {}\nb = {}\nseeds {}\n", report.label_a, report.label_b, report.seeds.size());
  fmt::print("b more accurate overall in {} seeds\n", report.b_more_accurate);
  for (const auto& v : report.verdicts)
    fmt::print("  {:<12} b shorter {}  b longer {}  b more accurate {}  b iqr <= a {}\n", v.class_id, v.b_shorter,
               v.b_longer, v.b_more_accurate, v.b_iqr_not_larger);
  fmt::print("report: {}\n", path.string());
  return kOk;
}

int cmd_check_lemmas(const ddpo::AccuracyCurve& curve, const ddpo::LemmaCheckConfig& lc,
                     const std::optional<std::string>& out) {
  const auto report = ddpo::check_lemmas(curve, lc);
  for (const auto& f : report.lemma1)
    fmt::print("lemma1 {:<21} argmax_mu {:8.1f}  closed_form_err {:.2e}  mc_err {:.2e}  {}\n", ddpo::to_string(f.family),
               f.mus.at(f.argmax), f.max_closed_form_error, f.mc_error, f.pass ? "PASS" : "FAIL");
  for (const auto& f : report.lemma2)
    fmt::print("lemma2 {:<21} closed_form_err {:.2e}  strictly_decreasing {}  {}\n", ddpo::to_string(f.family),
               f.max_closed_form_error, f.strictly_decreasing, f.pass ? "PASS" : "FAIL");
  if (out) {
    std::ofstream os(*out);
    os << ddpo::to_json(report).dump(2) << '\n';
    os.close();
    if (!os) throw ddpo::IoError("error while writing '" + *out + "'");
  }
  return report.pass() ? kOk : kFailure;
}

int cmd_analyze(const std::string& rollouts, const std::string& config, const std::string& out_dir, bool all_steps,
                int bins, const std::string& mode) {
  std::ifstream in(rollouts);
  if (!in) throw ddpo::IoError("cannot open rollout log '" + rollouts + "'");
  const auto log = ddpo::read_rollout_log(in);
  std::optional<ddpo::EnvSpec> env;
  if (!config.empty()) env = ddpo::load_config(config).env;
  const auto report =
      ddpo::analyze_rollouts(log, env ? &*env : nullptr, all_steps, bins, ddpo::parse_histogram_mode(mode));
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw ddpo::IoError("cannot create output directory '" + out_dir + "': " + ec.message());
  ddpo::write_analytics(out_dir, report);
  fmt::print("{} logged steps, {} queries analysed -> {}\n", log.size(), report.json["queries"].get<std::size_t>(),
             out_dir);
  fmt::print("overconfidence: {}\n", report.json["overconfidence"].dump());
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Difficulty-aware length shaping over a group-relative policy optimiser"};
  app.require_subcommand(1);

  Overrides run_o;
  auto* run = app.add_subcommand("run", "Train one configuration and write its artifacts");
  add_common(run, run_o);
  run->add_option("--seed", run_o.seed, "Random seed");
  run->add_flag("--log-rollouts", run_o.log_rollouts, "Write rollouts.jsonl");

  Overrides cmp_o;
  std::string against;
  std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4};
  auto* cmp = app.add_subcommand("compare", "Paired comparison over seeds (b - a)");
  add_common(cmp, cmp_o);
  cmp->add_option("--against", against, "Config for side a; default: the same config without shaping");
  cmp->add_option("--seeds", seeds, "Seeds")->delimiter(',');

  ddpo::AccuracyCurve curve{ddpo::Kernel::quadratic_concave, 0.8, 6000.0, 4000.0};
  ddpo::LemmaCheckConfig lc;
  std::optional<std::string> lemma_out;
  auto* lem = app.add_subcommand("check-lemmas", "Verify the length lemmas numerically");
  lem->add_option("--p-max", curve.p_max);
  lem->add_option("--l-star", curve.l_star);
  lem->add_option("--width", curve.width);
  lem->add_option("--sigma", lc.sigma);
  lem->add_option("--mc-samples", lc.mc_samples)->check(CLI::PositiveNumber);
  lem->add_option("--seed", lc.seed);
  lem->add_option("--out", lemma_out, "Write the report as JSON");

  std::string rollouts, analyze_config, analyze_out = "ddpo_analysis", hist_mode = "equal_count";
  bool all_steps = false;
  int bins = 10;
  auto* ana = app.add_subcommand("analyze", "Analytics report from a rollouts.jsonl log");
  ana->add_option("--rollouts", rollouts, "rollouts.jsonl")->required();
  ana->add_option("--config", analyze_config, "Config whose env names the classes");
  ana->add_option("--out", analyze_out, "Output directory");
  ana->add_flag("--all-steps", all_steps, "Pool every logged step");
  ana->add_option("--bins", bins)->check(CLI::Range(2, 1000));
  ana->add_option("--histogram", hist_mode)->check(CLI::IsMember({"equal_width", "equal_count"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  try {
    if (*run) return cmd_run(run_o);
    if (*cmp) return cmd_compare(cmp_o, against, seeds);
    if (*lem) return cmd_check_lemmas(curve, lc, lemma_out);
    if (*ana) return cmd_analyze(rollouts, analyze_config, analyze_out, all_steps, bins, hist_mode);
  } catch (const ddpo::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const ddpo::IoError& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return kIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailure;
  }
  return kFailure;
}
