#pragma once

// ExperimentConfig and its INI-style config file.
//
//   [experiment]   output_dir, log_rollouts, eval_interval, threads
//   [optimizer]    epsilon, beta, learning_rate, group_size, batch_size, steps, seed
//   [shaping]      enabled, theta, l_high, l_low, norm_mode, zero_diff_mode,
//                  enable_lower_bar, enable_upper_bar, enable_alpha
//   [env]          l_max, init_bias, num_bins
//   [class.<id>]   kernel, p_max, l_star, width, query_count   (easiest first)
//
// Unset keys keep their defaults. When any [class.*] section is present the
// default classes are replaced.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <type_traits>
#include <string>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "ddpo/core.hpp"
#include "ddpo/env.hpp"

namespace ddpo {

struct ExperimentConfig {
  EnvSpec env = default_env();
  std::optional<ShapingConfig> shaping = ShapingConfig{};  // absent: plain GRPO, no length term
  OptimizerConfig optimizer = default_optimizer();
  std::filesystem::path output_dir = "ddpo_run";
  bool log_rollouts = false;
  int eval_interval = 1;
  int threads = 1;

  // The tabular policy needs far larger steps than an LLM fine-tune.
  static OptimizerConfig default_optimizer() {
    OptimizerConfig o;
    o.learning_rate = 1.0;
    return o;
  }
};

inline ShapingConfig default_shaping_for(int l_max) {
  ShapingConfig s;
  s.l_max = l_max;
  s.l_high = static_cast<int>(0.9 * l_max);
  s.l_low = static_cast<int>(0.1 * l_max);
  return s;
}

inline void validate_experiment(const ExperimentConfig& cfg) {
  validate_env(cfg.env);
  validate_config(cfg.shaping.value_or(default_shaping_for(cfg.env.l_max)), cfg.optimizer);
  if (cfg.shaping && cfg.shaping->l_max != cfg.env.l_max) throw ConfigError("shaping.l_max must equal env.l_max");
  int pool = 0;
  for (const auto& c : cfg.env.classes) pool += c.query_count;
  if (cfg.optimizer.batch_size > pool) throw ConfigError("batch_size exceeds the number of queries in env");
  if (cfg.eval_interval < 1) throw ConfigError("eval_interval must be >= 1");
  if (cfg.threads < 1) throw ConfigError("threads must be >= 1");
}

namespace detail {

namespace pt = boost::property_tree;

template <typename T>
void read_key(const pt::ptree& section, const char* key, T& into, const std::string& where) {
  auto v = section.get_optional<std::string>(pt::ptree::path_type(key, '/'));
  if (!v) return;
  try {
    if constexpr (std::is_same_v<T, bool>) {
      if (*v == "true" || *v == "1" || *v == "yes") into = true;
      else if (*v == "false" || *v == "0" || *v == "no") into = false;
      else throw std::invalid_argument("not a boolean");
    } else if constexpr (std::is_same_v<T, std::string>) {
      into = *v;
    } else {
      std::istringstream is(*v);
      T parsed{};
      if (!(is >> parsed) || !(is >> std::ws).eof()) throw std::invalid_argument("bad number");
      into = parsed;
    }
  } catch (const std::invalid_argument&) {
    throw ConfigError(where + "." + key + ": cannot parse '" + *v + "'");
  }
}

}  // namespace detail

inline ExperimentConfig parse_config(std::istream& in) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  using detail::read_key;
  ExperimentConfig cfg;
  const pt::ptree empty;
  auto section = [&](const char* name) -> const pt::ptree& {
    auto it = tree.find(name);
    return it == tree.not_found() ? empty : it->second;
  };

  const auto& env = section("env");
  std::string init_bias(to_string(cfg.env.init_bias));
  read_key(env, "l_max", cfg.env.l_max, "env");
  read_key(env, "init_bias", init_bias, "env");
  read_key(env, "num_bins", cfg.env.num_bins, "env");
  cfg.env.init_bias = parse_init_bias(init_bias);

  std::vector<EnvClass> classes;
  for (const auto& [name, node] : tree) {
    if (name.rfind("class.", 0) != 0) continue;
    EnvClass c;
    c.class_id = name.substr(6);
    const std::string where = "class." + c.class_id;
    std::string kernel(to_string(c.curve.kernel));
    read_key(node, "kernel", kernel, where);
    c.curve.kernel = parse_kernel(kernel);
    c.curve.width = -1.0;
    read_key(node, "p_max", c.curve.p_max, where);
    read_key(node, "l_star", c.curve.l_star, where);
    read_key(node, "width", c.curve.width, where);
    if (c.curve.width < 0.0) c.curve.width = 0.6 * c.curve.l_star;
    read_key(node, "query_count", c.query_count, where);
    classes.push_back(std::move(c));
  }
  if (!classes.empty()) cfg.env.classes = std::move(classes);

  const auto& opt = section("optimizer");
  read_key(opt, "epsilon", cfg.optimizer.epsilon, "optimizer");
  read_key(opt, "beta", cfg.optimizer.beta, "optimizer");
  read_key(opt, "learning_rate", cfg.optimizer.learning_rate, "optimizer");
  read_key(opt, "group_size", cfg.optimizer.group_size, "optimizer");
  read_key(opt, "batch_size", cfg.optimizer.batch_size, "optimizer");
  read_key(opt, "steps", cfg.optimizer.steps, "optimizer");
  read_key(opt, "seed", cfg.optimizer.seed, "optimizer");

  const auto& sh = section("shaping");
  bool enabled = true;
  read_key(sh, "enabled", enabled, "shaping");
  ShapingConfig s = default_shaping_for(cfg.env.l_max);
  std::string norm(to_string(s.norm_mode)), zero(to_string(s.zero_diff_mode));
  read_key(sh, "theta", s.theta, "shaping");
  read_key(sh, "l_high", s.l_high, "shaping");
  read_key(sh, "l_low", s.l_low, "shaping");
  read_key(sh, "norm_mode", norm, "shaping");
  read_key(sh, "zero_diff_mode", zero, "shaping");
  read_key(sh, "enable_lower_bar", s.enable_lower_bar, "shaping");
  read_key(sh, "enable_upper_bar", s.enable_upper_bar, "shaping");
  read_key(sh, "enable_alpha", s.enable_alpha, "shaping");
  s.norm_mode = parse_norm_mode(norm);
  s.zero_diff_mode = parse_zero_diff_mode(zero);
  if (enabled) cfg.shaping = s;
  else cfg.shaping.reset();

  const auto& ex = section("experiment");
  std::string out = cfg.output_dir.string();
  read_key(ex, "output_dir", out, "experiment");
  cfg.output_dir = out;
  read_key(ex, "log_rollouts", cfg.log_rollouts, "experiment");
  read_key(ex, "eval_interval", cfg.eval_interval, "experiment");
  read_key(ex, "threads", cfg.threads, "experiment");
  return cfg;
}

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file '" + path.string() + "'");
  return parse_config(in);
}

}  // namespace ddpo
