#pragma once

#include <json.hpp>

#include <string>
#include <vector>

#include "loralab/model.hpp"
#include "loralab/perturb.hpp"
#include "loralab/trainer.hpp"

namespace loralab {

struct ExperimentPaths {
  std::string corpus;
  std::string nbest_train;
  std::string nbest_dev;
  std::string nbest_test;
  std::string lexicon;
  std::string output_dir;
};

// Everything one run needs, loadable from a JSON file. A single root seed
// feeds model init, training, and perturbation through labeled streams;
// the sub-config seed fields are not independently settable.
struct ExperimentConfig {
  uint64_t seed = 0;
  ExperimentPaths paths;
  ModelConfig model;    // vocab_size 0 means "derive from the corpus"
  TrainConfig train;
  PerturbPlan perturb;
  std::vector<double> lambda_grid = {0.0, 0.1, 0.2, 0.3, 0.4, 0.5,
                                     0.6, 0.7, 0.8, 0.9, 1.0};

  // Field-level checks only; path existence is check_inputs_exist().
  void validate() const;

  // Non-empty input paths must point at existing files. Reported as a
  // config problem, with the field name, since the path came from config.
  void check_inputs_exist() const;
};

// Canonical JSON form. Omitted keys take defaults on read; unknown keys or
// wrong types raise ConfigError naming the full field path. to/from are
// lossless inverses of each other.
nlohmann::ordered_json experiment_to_json(const ExperimentConfig& cfg);
ExperimentConfig experiment_from_json(const nlohmann::json& j);

// Raw config file contents, for callers that apply overrides before the
// strict parse. IoError for unreadable files, ConfigError for bad JSON.
nlohmann::json load_config_json(const std::string& path);

ExperimentConfig load_experiment_config(const std::string& path);
void save_experiment_config(const ExperimentConfig& cfg,
                            const std::string& path);

// Dotted-path override, e.g. apply_override(j, "train.lr=0.01"). The value
// is parsed as JSON when possible and falls back to a plain string, so
// strategy=s3 and lr=0.01 both work without quoting games.
void apply_override(nlohmann::json& j, const std::string& assignment);

// 16-hex-digit FNV-1a of the canonical JSON dump. Changes iff a field
// changes.
std::string experiment_config_hash(const ExperimentConfig& cfg);

}  // namespace loralab
