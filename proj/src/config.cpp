#include "loralab/config.hpp"

#include <climits>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <sstream>

#include "loralab/errors.hpp"
#include "loralab/rng.hpp"

namespace loralab {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;

std::string joinp(const std::string& base, const std::string& key) {
  return base.empty() ? key : base + "." + key;
}

void expect_object(const json& j, const std::string& path) {
  if (!j.is_object())
    throw ConfigError("config: " +
                      (path.empty() ? std::string("top level") : path) +
                      " must be an object");
}

void check_keys(const json& j, const std::string& path,
                std::initializer_list<const char*> allowed) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool known = false;
    for (const char* k : allowed)
      if (it.key() == k) {
        known = true;
        break;
      }
    if (!known)
      throw ConfigError("config: unknown key " + joinp(path, it.key()));
  }
}

void assign(const json& v, const std::string& fp, std::string& out) {
  if (!v.is_string())
    throw ConfigError("config: " + fp + " must be a string");
  out = v.get<std::string>();
}

void assign(const json& v, const std::string& fp, double& out) {
  if (!v.is_number())
    throw ConfigError("config: " + fp + " must be a number");
  out = v.get<double>();
}

void assign(const json& v, const std::string& fp, long& out) {
  if (!v.is_number_integer())
    throw ConfigError("config: " + fp + " must be an integer");
  out = v.get<long>();
}

void assign(const json& v, const std::string& fp, int& out) {
  long wide = 0;
  assign(v, fp, wide);
  if (wide < INT_MIN || wide > INT_MAX)
    throw ConfigError("config: " + fp + " is out of range");
  out = int(wide);
}

void assign(const json& v, const std::string& fp, uint64_t& out) {
  if (v.is_number_unsigned()) {
    out = v.get<uint64_t>();
    return;
  }
  if (v.is_number_integer() && v.get<int64_t>() >= 0) {
    out = uint64_t(v.get<int64_t>());
    return;
  }
  throw ConfigError("config: " + fp + " must be a non-negative integer");
}

template <typename T>
void read_field(const json& j, const std::string& path, const char* key,
                T& out) {
  if (!j.contains(key)) return;
  assign(j.at(key), joinp(path, key), out);
}

// from_string throws LookupError; at config level that is a ConfigError
// carrying the field path.
template <typename Parse, typename T>
void read_enum(const json& j, const std::string& path, const char* key,
               Parse parse, T& out) {
  if (!j.contains(key)) return;
  const std::string fp = joinp(path, key);
  std::string name;
  assign(j.at(key), fp, name);
  try {
    out = parse(name);
  } catch (const Error& e) {
    throw ConfigError("config: " + fp + ": " + e.what());
  }
}

void paths_from_json(const json& j, const std::string& path,
                     ExperimentPaths& out) {
  expect_object(j, path);
  check_keys(j, path,
             {"corpus", "nbest_train", "nbest_dev", "nbest_test", "lexicon",
              "output_dir"});
  read_field(j, path, "corpus", out.corpus);
  read_field(j, path, "nbest_train", out.nbest_train);
  read_field(j, path, "nbest_dev", out.nbest_dev);
  read_field(j, path, "nbest_test", out.nbest_test);
  read_field(j, path, "lexicon", out.lexicon);
  read_field(j, path, "output_dir", out.output_dir);
}

void model_from_json(const json& j, const std::string& path,
                     ModelConfig& out) {
  expect_object(j, path);
  check_keys(j, path,
             {"vocab_size", "d_model", "d_ff", "n_layers", "n_heads",
              "max_len"});
  read_field(j, path, "vocab_size", out.vocab_size);
  read_field(j, path, "d_model", out.d_model);
  read_field(j, path, "d_ff", out.d_ff);
  read_field(j, path, "n_layers", out.n_layers);
  read_field(j, path, "n_heads", out.n_heads);
  read_field(j, path, "max_len", out.max_len);
}

void schedule_from_json(const json& j, const std::string& path,
                        RankSchedule& out) {
  expect_object(j, path);
  check_keys(j, path,
             {"r_full", "r_init", "r_target", "t_warm", "t_init", "t_final",
              "T"});
  read_field(j, path, "r_full", out.r_full);
  read_field(j, path, "r_init", out.r_init);
  read_field(j, path, "r_target", out.r_target);
  read_field(j, path, "t_warm", out.t_warm);
  read_field(j, path, "t_init", out.t_init);
  read_field(j, path, "t_final", out.t_final);
  read_field(j, path, "T", out.T);
}

void train_from_json(const json& j, const std::string& path,
                     TrainConfig& out) {
  expect_object(j, path);
  check_keys(j, path,
             {"strategy", "rank_variant", "lr", "batch_size", "total_steps",
              "mask_prob", "warmup_steps", "score_ema", "adapt_layer", "lora",
              "schedule"});
  read_enum(j, path, "strategy", strategy_from_string, out.strategy);
  read_enum(j, path, "rank_variant", rank_variant_from_string,
            out.rank_variant);
  read_field(j, path, "lr", out.lr);
  read_field(j, path, "batch_size", out.batch_size);
  read_field(j, path, "total_steps", out.total_steps);
  read_field(j, path, "mask_prob", out.mask_prob);
  read_field(j, path, "warmup_steps", out.warmup_steps);
  read_field(j, path, "score_ema", out.score_ema);
  read_field(j, path, "adapt_layer", out.adapt_layer);
  if (j.contains("lora")) {
    const std::string lp = joinp(path, "lora");
    const json& l = j.at("lora");
    expect_object(l, lp);
    check_keys(l, lp, {"rank", "alpha", "dropout"});
    read_field(l, lp, "rank", out.lora.rank);
    read_field(l, lp, "alpha", out.lora.alpha);
    read_field(l, lp, "dropout", out.lora.dropout);
  }
  if (j.contains("schedule"))
    schedule_from_json(j.at("schedule"), joinp(path, "schedule"),
                       out.schedule);
}

void perturb_from_json(const json& j, const std::string& path,
                       PerturbPlan& out) {
  expect_object(j, path);
  check_keys(j, path, {"strategy", "replace_prob"});
  read_enum(j, path, "strategy", perturb_strategy_from_string, out.strategy);
  read_field(j, path, "replace_prob", out.replace_prob);
}

}  // namespace

void ExperimentConfig::validate() const {
  ModelConfig m = model;
  if (m.vocab_size == 0) m.vocab_size = 4;  // filled in from the corpus later
  try {
    m.validate();
    train.validate();
    perturb.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  if (lambda_grid.empty())
    throw ConfigError("config: lambda_grid must not be empty");
  for (size_t i = 0; i < lambda_grid.size(); ++i)
    if (!std::isfinite(lambda_grid[i]))
      throw ConfigError("config: lambda_grid[" + std::to_string(i) +
                        "] must be finite");
}

void ExperimentConfig::check_inputs_exist() const {
  const std::pair<const char*, const std::string*> inputs[] = {
      {"paths.corpus", &paths.corpus},
      {"paths.nbest_train", &paths.nbest_train},
      {"paths.nbest_dev", &paths.nbest_dev},
      {"paths.nbest_test", &paths.nbest_test},
      {"paths.lexicon", &paths.lexicon},
  };
  for (const auto& [field, value] : inputs) {
    if (value->empty()) continue;
    if (!std::filesystem::is_regular_file(*value))
      throw ConfigError("config: " + std::string(field) + ": no such file: " +
                        *value);
  }
}

nlohmann::ordered_json experiment_to_json(const ExperimentConfig& cfg) {
  ordered_json j;
  j["seed"] = cfg.seed;
  j["paths"] = {{"corpus", cfg.paths.corpus},
                {"nbest_train", cfg.paths.nbest_train},
                {"nbest_dev", cfg.paths.nbest_dev},
                {"nbest_test", cfg.paths.nbest_test},
                {"lexicon", cfg.paths.lexicon},
                {"output_dir", cfg.paths.output_dir}};
  j["model"] = {{"vocab_size", cfg.model.vocab_size},
                {"d_model", cfg.model.d_model},
                {"d_ff", cfg.model.d_ff},
                {"n_layers", cfg.model.n_layers},
                {"n_heads", cfg.model.n_heads},
                {"max_len", cfg.model.max_len}};
  j["train"] = {
      {"strategy", to_string(cfg.train.strategy)},
      {"rank_variant", to_string(cfg.train.rank_variant)},
      {"lr", cfg.train.lr},
      {"batch_size", cfg.train.batch_size},
      {"total_steps", cfg.train.total_steps},
      {"mask_prob", cfg.train.mask_prob},
      {"warmup_steps", cfg.train.warmup_steps},
      {"score_ema", cfg.train.score_ema},
      {"adapt_layer", cfg.train.adapt_layer},
      {"lora",
       {{"rank", cfg.train.lora.rank},
        {"alpha", cfg.train.lora.alpha},
        {"dropout", cfg.train.lora.dropout}}},
      {"schedule",
       {{"r_full", cfg.train.schedule.r_full},
        {"r_init", cfg.train.schedule.r_init},
        {"r_target", cfg.train.schedule.r_target},
        {"t_warm", cfg.train.schedule.t_warm},
        {"t_init", cfg.train.schedule.t_init},
        {"t_final", cfg.train.schedule.t_final},
        {"T", cfg.train.schedule.T}}}};
  j["perturb"] = {{"strategy", to_string(cfg.perturb.strategy)},
                  {"replace_prob", cfg.perturb.replace_prob}};
  j["lambda_grid"] = cfg.lambda_grid;
  return j;
}

ExperimentConfig experiment_from_json(const nlohmann::json& j) {
  expect_object(j, "");
  check_keys(j, "",
             {"seed", "paths", "model", "train", "perturb", "lambda_grid"});
  ExperimentConfig cfg;
  read_field(j, "", "seed", cfg.seed);
  if (j.contains("paths")) paths_from_json(j.at("paths"), "paths", cfg.paths);
  if (j.contains("model")) model_from_json(j.at("model"), "model", cfg.model);
  if (j.contains("train")) train_from_json(j.at("train"), "train", cfg.train);
  if (j.contains("perturb"))
    perturb_from_json(j.at("perturb"), "perturb", cfg.perturb);
  if (j.contains("lambda_grid")) {
    const json& g = j.at("lambda_grid");
    if (!g.is_array())
      throw ConfigError("config: lambda_grid must be an array");
    cfg.lambda_grid.clear();
    for (size_t i = 0; i < g.size(); ++i) {
      double v = 0.0;
      assign(g[i], "lambda_grid[" + std::to_string(i) + "]", v);
      cfg.lambda_grid.push_back(v);
    }
  }
  // One root seed drives every labeled stream downstream.
  cfg.model.seed = cfg.seed;
  cfg.train.seed = cfg.seed;
  cfg.perturb.seed = cfg.seed;
  return cfg;
}

nlohmann::json load_config_json(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("config: cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return json::parse(buf.str());
  } catch (const json::exception& e) {
    throw ConfigError("config: " + path + " is not valid JSON: " + e.what());
  }
}

ExperimentConfig load_experiment_config(const std::string& path) {
  return experiment_from_json(load_config_json(path));
}

void save_experiment_config(const ExperimentConfig& cfg,
                            const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("config: cannot open " + path + " for writing");
  out << experiment_to_json(cfg).dump(2) << "\n";
  if (!out) throw IoError("config: failed writing " + path);
}

void apply_override(nlohmann::json& j, const std::string& assignment) {
  const size_t eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0)
    throw ConfigError("config: override must look like key=value, got: " +
                      assignment);
  const std::string dotted = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);

  json value = json::parse(raw, nullptr, false);
  if (value.is_discarded()) value = raw;  // bare words stay strings

  json* node = &j;
  size_t start = 0;
  while (true) {
    const size_t dot = dotted.find('.', start);
    const std::string key = dotted.substr(
        start, dot == std::string::npos ? std::string::npos : dot - start);
    if (key.empty())
      throw ConfigError("config: override has an empty path segment: " +
                        assignment);
    if (dot == std::string::npos) {
      (*node)[key] = std::move(value);
      return;
    }
    json& next = (*node)[key];
    if (!next.is_object()) next = json::object();
    node = &next;
    start = dot + 1;
  }
}

std::string experiment_config_hash(const ExperimentConfig& cfg) {
  const std::string dump = experiment_to_json(cfg).dump();
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                (unsigned long long)Rng::fnv1a64(dump));
  return std::string(buf);
}

}  // namespace loralab
