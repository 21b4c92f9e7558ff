#include "loralab/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "loralab/checkpoint.hpp"
#include "loralab/config.hpp"
#include "loralab/errors.hpp"
#include "loralab/gendata.hpp"
#include "loralab/nbest.hpp"
#include "loralab/perturb.hpp"
#include "loralab/trainer.hpp"

namespace loralab {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

constexpr const char* kGitDescribe =
#ifdef LORALAB_GIT_DESCRIBE
    LORALAB_GIT_DESCRIBE;
#else
    "unknown";
#endif

int code_for(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e)) return 2;
  if (dynamic_cast<const DivergenceError*>(&e)) return 3;
  return 4;
}

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    out.push_back(line);
  }
  return out;
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec)
    throw IoError("cannot create directory " + dir + ": " + ec.message());
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << content;
  if (!out) throw IoError("failed writing " + path);
}

ExperimentConfig load_with_overrides(const std::string& path,
                                     const std::vector<std::string>& sets) {
  json j = load_config_json(path);
  for (const std::string& s : sets) apply_override(j, s);
  return experiment_from_json(j);
}

HomophoneLexicon lexicon_or_empty(const std::string& path) {
  if (path.empty()) return HomophoneLexicon{};
  return HomophoneLexicon::load_tsv(path);
}

std::string pct(double fraction) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", 100.0 * fraction);
  return buf;
}

// ---------------------------------------------------------------- train --

struct ModelBundle {
  std::vector<std::string> corpus;
  ModelConfig model_config;
  Vocab vocab;
};

// Corpus plus the materialized model config (vocab_size 0 is derived here).
ModelBundle prepare_bundle(const ExperimentConfig& cfg) {
  if (cfg.paths.corpus.empty())
    throw ConfigError("config: paths.corpus is required");
  ModelBundle b{read_lines(cfg.paths.corpus), cfg.model,
                build_vocab(read_lines(cfg.paths.corpus), 1)};
  if (b.model_config.vocab_size == 0) {
    b.model_config.vocab_size = b.vocab.size();
  } else if (b.model_config.vocab_size != b.vocab.size()) {
    throw ConfigError(
        "config: model.vocab_size " +
        std::to_string(b.model_config.vocab_size) +
        " does not match the corpus vocabulary of " +
        std::to_string(b.vocab.size()) + " (set 0 to derive it)");
  }
  b.model_config.validate();
  return b;
}

void write_manifest(const std::string& dir, const ExperimentConfig& cfg) {
  const RankSchedule es = effective_schedule(cfg.train);
  ordered_json stages;
  stages["warmup"] = {0, es.t_warm};
  stages["rank-init"] = {es.t_warm, es.t_init};
  stages["rank-decay"] = {es.t_init, es.T - es.t_final};
  stages["final"] = {es.T - es.t_final, es.T};

  ordered_json j;
  j["format"] = "mlm-workbench/manifest";
  j["version"] = 1;
  j["command"] = "train";
  j["strategy"] = to_string(cfg.train.strategy);
  j["config_hash"] = experiment_config_hash(cfg);
  j["seed"] = cfg.seed;
  j["git_describe"] = kGitDescribe;
  j["stages"] = stages;
  j["config"] = experiment_to_json(cfg);
  write_file(dir + "/manifest.json", j.dump(2) + "\n");
}

struct TrainArgs {
  std::string config;
  std::vector<std::string> sets;
};

int cmd_train(const TrainArgs& a) {
  ExperimentConfig cfg = load_with_overrides(a.config, a.sets);
  cfg.validate();
  cfg.check_inputs_exist();
  if (cfg.paths.output_dir.empty())
    throw ConfigError("config: paths.output_dir is required");

  ModelBundle b = prepare_bundle(cfg);
  TransformerModel model = TransformerModel::init(b.model_config, b.vocab);
  RunResult res = run_strategy(cfg.train, b.corpus, model);

  const std::string& dir = cfg.paths.output_dir;
  ensure_dir(dir);
  save_model(model, dir + "/model.json");
  save_adapters(model, dir + "/adapters.json");
  write_train_log(dir + "/trainlog.csv", res.log);
  write_prune_log(dir + "/prune_events.csv", res.prune_events);
  write_manifest(dir, cfg);

  std::cout << "train: " << to_string(cfg.train.strategy) << " for "
            << cfg.train.total_steps << " steps, final loss "
            << res.log.rows.back().loss << ", artifacts in " << dir << "\n";
  return 0;
}

// ------------------------------------------------------------- evaluate --

struct EvalArgs {
  std::string checkpoint;
  std::string nbest;
  std::string out;
  std::string lexicon;
  std::string label;
  std::string tune_on;
  std::string perturb = "none";
  double lambda = 0.0;
  double replace_prob = 0.5;
  std::vector<double> grid = ExperimentConfig{}.lambda_grid;
  uint64_t seed = 0;
};

struct Checkpoint {
  TransformerModel model;
  std::string run_dir;
  std::string strategy;  // from the manifest when present
};

bool has_adapters(const TransformerModel& model) {
  for (int l = 0; l < model.n_layers(); ++l)
    for (MatrixName name : all_matrix_names())
      if (!model.layer(l).matrix(name).slot.empty()) return true;
  return false;
}

Checkpoint open_checkpoint(const std::string& arg) {
  fs::path cp(arg);
  std::string run_dir, model_path;
  if (fs::is_directory(cp)) {
    run_dir = cp.string();
    model_path = (cp / "model.json").string();
  } else {
    model_path = cp.string();
    run_dir = cp.parent_path().string();
    if (run_dir.empty()) run_dir = ".";
  }
  Checkpoint c{load_model(model_path), run_dir, ""};
  // model.json already embeds any adapters; the sibling adapter file only
  // matters when the model arrived bare.
  const std::string adapters = run_dir + "/adapters.json";
  if (!has_adapters(c.model) && fs::is_regular_file(adapters))
    load_adapters(c.model, adapters);
  const std::string manifest = run_dir + "/manifest.json";
  if (fs::is_regular_file(manifest)) {
    std::ifstream in(manifest, std::ios::binary);
    json j = json::parse(in, nullptr, false);
    if (!j.is_discarded() && j.contains("strategy") &&
        j["strategy"].is_string())
      c.strategy = j["strategy"].get<std::string>();
  }
  return c;
}

int cmd_evaluate(const EvalArgs& a) {
  if (a.label.find(',') != std::string::npos)
    throw ConfigError("evaluate: --label must not contain commas");
  Checkpoint ck = open_checkpoint(a.checkpoint);
  std::vector<NBestList> lists = read_nbest_jsonl(a.nbest);
  HypScorer scorer = pll_scorer(ck.model);

  double lambda = a.lambda;
  if (!a.tune_on.empty()) {
    std::vector<NBestList> dev = read_nbest_jsonl(a.tune_on);
    lambda = tune_coefficient(dev, scorer, a.grid);
    std::cout << "evaluate: tuned lambda " << lambda << " on " << a.tune_on
              << "\n";
  }

  const std::string label =
      !a.label.empty() ? a.label : (!ck.strategy.empty() ? ck.strategy
                                                         : "model");
  const std::string set_name = fs::path(a.nbest).stem().string();

  RescoreResult clean = rescore(lists, scorer, lambda);
  const double dwer_clean = delta_wer(clean.wer, clean.oracle);
  std::vector<ReportRow> rows;
  rows.push_back({label, set_name, "-", clean.wer, clean.oracle, dwer_clean,
                  false, false, 0.0});

  if (a.perturb != "none") {
    PerturbPlan plan;
    plan.strategy = perturb_strategy_from_string(a.perturb);
    plan.replace_prob = a.replace_prob;
    plan.seed = a.seed;
    plan.validate();
    HomophoneLexicon lex = lexicon_or_empty(a.lexicon);
    std::vector<NBestList> perturbed =
        perturb_set(lists, plan, lex, ck.model.vocab());
    RescoreResult pert = rescore(perturbed, scorer, lambda);
    const double dwer_pert = delta_wer(pert.wer, pert.oracle);
    ReportRow row{label, set_name,  to_string(plan.strategy), pert.wer,
                  pert.oracle, dwer_pert, true, false, 0.0};
    try {
      row.nprr_pct = nprr(dwer_clean, dwer_pert);
    } catch (const UndefinedMetricError&) {
      row.nprr_undefined = true;
      std::cerr << "warning: clean delta-WER is zero, NPRR is undefined\n";
    }
    rows.push_back(row);
  }

  const std::string csv = report_csv(rows);
  const std::string out = a.out.empty() ? ck.run_dir + "/report.csv" : a.out;
  write_file(out, csv);
  std::cout << csv;
  return 0;
}

// -------------------------------------------------------------- perturb --

struct PerturbArgs {
  std::string nbest;
  std::string out;
  std::string strategy = "one";
  std::string lexicon;
  double replace_prob = 0.5;
  uint64_t seed = 0;
};

int cmd_perturb(const PerturbArgs& a) {
  std::vector<NBestList> lists = read_nbest_jsonl(a.nbest);
  PerturbPlan plan;
  plan.strategy = perturb_strategy_from_string(a.strategy);
  plan.replace_prob = a.replace_prob;
  plan.seed = a.seed;
  plan.validate();
  HomophoneLexicon lex = lexicon_or_empty(a.lexicon);

  // The candidate vocabulary comes from the file itself, so a standalone
  // transform needs no model checkpoint.
  std::vector<std::string> texts;
  for (const NBestList& l : lists) {
    texts.push_back(l.reference);
    for (const Hypothesis& h : l.hyps) texts.push_back(h.text);
  }
  Vocab vocab = build_vocab(texts, 1);

  std::vector<NBestList> out = perturb_set(lists, plan, lex, vocab);
  write_nbest_jsonl(out, a.out, to_string(plan.strategy));
  std::cout << "perturb: " << to_string(plan.strategy) << " wrote " << a.out
            << " (" << out.size() << " lists)\n";
  return 0;
}

// --------------------------------------------------------- sweep-layers --

int cmd_sweep_layers(const TrainArgs& a) {
  ExperimentConfig cfg = load_with_overrides(a.config, a.sets);
  cfg.validate();
  cfg.check_inputs_exist();
  if (cfg.paths.output_dir.empty())
    throw ConfigError("config: paths.output_dir is required");
  if (cfg.paths.nbest_test.empty())
    throw ConfigError("config: paths.nbest_test is required by sweep-layers");

  ModelBundle b = prepare_bundle(cfg);
  std::vector<NBestList> test_lists = read_nbest_jsonl(cfg.paths.nbest_test);
  std::vector<NBestList> dev_lists;
  if (!cfg.paths.nbest_dev.empty())
    dev_lists = read_nbest_jsonl(cfg.paths.nbest_dev);

  TrainConfig tc = cfg.train;
  tc.strategy = Strategy::LoRA;  // the sweep is defined over vanilla LoRA

  std::vector<std::string> rows;
  bool any_failed = false;
  int fail_code = 0;

  auto run_one = [&](int layer, const std::string& name) {
    try {
      tc.adapt_layer = layer;
      tc.validate();
      TransformerModel model = TransformerModel::init(b.model_config, b.vocab);
      run_strategy(tc, b.corpus, model);
      HypScorer scorer = pll_scorer(model);
      double lambda = 0.0;
      if (!dev_lists.empty())
        lambda = tune_coefficient(dev_lists, scorer, cfg.lambda_grid);
      RescoreResult r = rescore(test_lists, scorer, lambda);
      char frac[64];
      std::snprintf(frac, sizeof frac, "%.17g", trainable_fraction(model));
      char lam[64];
      std::snprintf(lam, sizeof lam, "%.17g", lambda);
      rows.push_back(name + "," + frac + "," + lam + "," + pct(r.wer) + "," +
                     pct(r.oracle) + "," + pct(delta_wer(r.wer, r.oracle)));
    } catch (const std::exception& e) {
      any_failed = true;
      if (fail_code == 0) fail_code = code_for(e);
      std::cerr << "sweep-layers: " << name << " failed: " << e.what()
                << "\n";
    }
  };

  for (int l = 0; l < b.model_config.n_layers; ++l)
    run_one(l, std::to_string(l));
  run_one(-1, "all");

  std::string csv =
      "layer,trainable_fraction,lambda,wer,oracle_wer,delta_wer\n";
  for (const std::string& r : rows) csv += r + "\n";
  ensure_dir(cfg.paths.output_dir);
  write_file(cfg.paths.output_dir + "/sweep.csv", csv);
  std::cout << csv;
  return any_failed ? fail_code : 0;
}

// --------------------------------------------------------------- report --

struct ReportArgs {
  std::vector<std::string> dirs;
  std::string baseline;
  std::string out_dir;
};

struct ReportLine {
  std::string fields[7];  // model,test_set,perturbation,wer,...,nprr_pct
};

const char* kReportHeader =
    "model,test_set,perturbation,wer,oracle_wer,delta_wer,nprr_pct";

std::vector<ReportLine> parse_report_csv(const std::string& path) {
  std::vector<std::string> lines = read_lines(path);
  if (lines.empty() || lines[0].rfind(kReportHeader, 0) != 0)
    throw InputError("report: " + path + " is not a report CSV");
  std::vector<ReportLine> out;
  for (size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    ReportLine row;
    std::stringstream ss(lines[i]);
    std::string field;
    int n = 0;
    while (n < 7 && std::getline(ss, field, ',')) row.fields[n++] = field;
    if (n != 7)
      throw InputError("report: " + path + " line " + std::to_string(i + 1) +
                       " has fewer than 7 columns");
    out.push_back(row);
  }
  return out;
}

int cmd_report(const ReportArgs& a) {
  std::vector<ReportLine> merged;
  std::map<std::pair<std::string, std::string>, double> baseline_wer;
  int usable = 0;

  for (const std::string& dir : a.dirs) {
    try {
      json manifest = load_config_json(dir + "/manifest.json");
      if (!manifest.is_object() || manifest.value("format", "") !=
                                       std::string("mlm-workbench/manifest"))
        throw InputError("report: " + dir + "/manifest.json has format '" +
                         manifest.value("format", "") + "'");
      std::vector<ReportLine> rows = parse_report_csv(dir + "/report.csv");
      if (dir == a.baseline)
        for (const ReportLine& r : rows)
          baseline_wer[{r.fields[1], r.fields[2]}] = std::stod(r.fields[3]);
      merged.insert(merged.end(), rows.begin(), rows.end());
      ++usable;
    } catch (const Error& e) {
      std::cerr << "report: skipping " << dir << ": " << e.what() << "\n";
    }
  }
  if (usable == 0) throw IoError("report: no usable run directories");
  if (!a.baseline.empty() && baseline_wer.empty())
    throw ConfigError("report: baseline " + a.baseline +
                      " is not among the usable run directories");

  auto key = [](const ReportLine& r) {
    return std::tie(r.fields[0], r.fields[1], r.fields[2]);
  };
  std::stable_sort(merged.begin(), merged.end(),
                   [&](const ReportLine& x, const ReportLine& y) {
                     return key(x) < key(y);
                   });
  merged.erase(std::unique(merged.begin(), merged.end(),
                           [](const ReportLine& x, const ReportLine& y) {
                             return std::equal(std::begin(x.fields),
                                               std::end(x.fields),
                                               std::begin(y.fields));
                           }),
               merged.end());

  std::string csv = std::string(kReportHeader) + ",rel_improvement_pct\n";
  std::vector<std::array<std::string, 8>> table;
  for (const ReportLine& r : merged) {
    std::string rel = "-";
    auto it = baseline_wer.find({r.fields[1], r.fields[2]});
    if (it != baseline_wer.end() && it->second != 0.0) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.2f",
                    100.0 * (it->second - std::stod(r.fields[3])) /
                        it->second);
      rel = buf;
    }
    std::array<std::string, 8> row;
    for (int i = 0; i < 7; ++i) row[size_t(i)] = r.fields[i];
    row[7] = rel;
    table.push_back(row);
    for (int i = 0; i < 7; ++i) csv += r.fields[i] + ",";
    csv += rel + "\n";
  }

  // Aligned text view of the same rows.
  const char* names[8] = {"model",    "test_set", "perturbation",
                          "wer",      "oracle",   "delta",
                          "nprr_pct", "rel_impr"};
  size_t width[8];
  for (int c = 0; c < 8; ++c) width[c] = std::string(names[c]).size();
  for (const auto& row : table)
    for (int c = 0; c < 8; ++c) width[c] = std::max(width[c], row[c].size());
  std::ostringstream text;
  for (int c = 0; c < 8; ++c)
    text << std::string(width[c] - std::string(names[c]).size(), ' ')
         << names[c] << (c == 7 ? "\n" : "  ");
  for (const auto& row : table)
    for (int c = 0; c < 8; ++c)
      text << std::string(width[c] - row[c].size(), ' ') << row[c]
           << (c == 7 ? "\n" : "  ");
  std::cout << text.str();

  if (!a.out_dir.empty()) {
    ensure_dir(a.out_dir);
    write_file(a.out_dir + "/report.csv", csv);
    ordered_json j;
    j["format"] = "mlm-workbench/manifest";
    j["version"] = 1;
    j["command"] = "report";
    j["git_describe"] = kGitDescribe;
    j["inputs"] = a.dirs;
    j["baseline"] = a.baseline;
    write_file(a.out_dir + "/manifest.json", j.dump(2) + "\n");
  }
  return 0;
}

// ------------------------------------------------------------- gen-data --

struct GenArgs {
  long utts = 2000;
  int n_best = 5;
  double noise_rate = 0.3;
  uint64_t seed = 0;
  double dev_fraction = 0.2;
  double ref_prob = 0.7;
  std::string out;
  std::string lexicon;
};

int cmd_gendata(const GenArgs& a) {
  GenDataConfig g;
  g.utts = a.utts;
  g.n_best = a.n_best;
  g.noise_rate = a.noise_rate;
  g.seed = a.seed;
  g.dev_fraction = a.dev_fraction;
  g.ref_in_list_prob = a.ref_prob;
  g.validate();
  HomophoneLexicon lex = lexicon_or_empty(a.lexicon);
  GenDataResult data = generate_data(g, lex);
  write_gendata(data, g, a.out);
  std::cout << "gen-data: wrote " << a.out << " (" << data.dev.size()
            << " dev + " << data.test.size() << " test lists, "
            << data.corpus.size() << " corpus sentences)\n";
  return 0;
}

}  // namespace

int cli_main(int argc, const char* const* argv) {
  CLI::App app{
      "Desk-scale workbench for low-rank adaptation strategies and N-best "
      "rescoring robustness"};
  app.require_subcommand(1);

  TrainArgs train_args;
  CLI::App* train = app.add_subcommand(
      "train", "Train one strategy and write checkpoint artifacts");
  train->add_option("--config", train_args.config, "Experiment config JSON")
      ->required();
  train->add_option("--set", train_args.sets,
                    "Override a config leaf, e.g. --set train.lr=0.01");

  EvalArgs eval_args;
  CLI::App* evaluate = app.add_subcommand(
      "evaluate", "Rescore an N-best file and report WER metrics");
  evaluate->add_option("--checkpoint", eval_args.checkpoint,
                       "Run directory or model.json path")
      ->required();
  evaluate->add_option("--nbest", eval_args.nbest, "N-best JSONL to score")
      ->required();
  evaluate->add_option("--out", eval_args.out,
                       "Report CSV path (default <run>/report.csv)");
  evaluate
      ->add_option("--perturb", eval_args.perturb,
                   "Also score a perturbed copy: none, one, or n")
      ->check(CLI::IsMember({"none", "one", "n"}));
  evaluate->add_option("--replace-prob", eval_args.replace_prob,
                       "Per-token replacement probability");
  evaluate->add_option("--seed", eval_args.seed, "Perturbation seed");
  evaluate->add_option("--lexicon", eval_args.lexicon,
                       "Homophone lexicon TSV for perturbation");
  evaluate->add_option("--label", eval_args.label,
                       "Model column label (default: manifest strategy)");
  CLI::Option* opt_lambda = evaluate->add_option(
      "--lambda", eval_args.lambda, "Fixed interpolation weight (default 0)");
  CLI::Option* opt_tune = evaluate->add_option(
      "--tune-on", eval_args.tune_on, "Tune lambda on this N-best JSONL");
  opt_lambda->excludes(opt_tune);
  opt_tune->excludes(opt_lambda);
  evaluate
      ->add_option("--grid", eval_args.grid,
                   "Lambda grid for --tune-on, comma separated")
      ->delimiter(',');

  PerturbArgs perturb_args;
  CLI::App* perturb = app.add_subcommand(
      "perturb", "Standalone N-best perturbation transform");
  perturb->add_option("--nbest", perturb_args.nbest, "Input N-best JSONL")
      ->required();
  perturb->add_option("--out", perturb_args.out, "Output N-best JSONL")
      ->required();
  perturb
      ->add_option("--strategy", perturb_args.strategy,
                   "one (lowest-am hypothesis) or n (all hypotheses)")
      ->check(CLI::IsMember({"one", "n", "perturb-1", "perturb-n"}));
  perturb->add_option("--replace-prob", perturb_args.replace_prob,
                      "Per-token replacement probability");
  perturb->add_option("--seed", perturb_args.seed, "Perturbation seed");
  perturb->add_option("--lexicon", perturb_args.lexicon,
                      "Homophone lexicon TSV");

  TrainArgs sweep_args;
  CLI::App* sweep = app.add_subcommand(
      "sweep-layers",
      "Train vanilla LoRA per layer, then all layers, and tabulate");
  sweep->add_option("--config", sweep_args.config, "Experiment config JSON")
      ->required();
  sweep->add_option("--set", sweep_args.sets,
                    "Override a config leaf, e.g. --set train.lr=0.01");

  ReportArgs report_args;
  CLI::App* report = app.add_subcommand(
      "report", "Merge run directories into one table");
  report->add_option("dirs", report_args.dirs, "Run directories to merge")
      ->required();
  report->add_option("--baseline", report_args.baseline,
                     "Run directory the improvement column compares against");
  report->add_option("--out-dir", report_args.out_dir,
                     "Write merged report.csv and manifest.json here");

  GenArgs gen_args;
  CLI::App* gendata = app.add_subcommand(
      "gen-data", "Generate a synthetic corpus and N-best lists");
  gendata->add_option("--utts", gen_args.utts, "Number of utterances");
  gendata->add_option("--n-best", gen_args.n_best, "Hypotheses per list");
  gendata->add_option("--noise-rate", gen_args.noise_rate,
                      "Per-token corruption probability");
  gendata->add_option("--seed", gen_args.seed, "Generation seed");
  gendata->add_option("--dev-fraction", gen_args.dev_fraction,
                      "Fraction of lists routed to the dev split");
  gendata->add_option("--ref-prob", gen_args.ref_prob,
                      "Chance the reference appears in its list");
  gendata->add_option("--out", gen_args.out, "Output directory")->required();
  gendata->add_option("--lexicon", gen_args.lexicon,
                      "Homophone lexicon TSV for corruption");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (app.got_subcommand(train)) return cmd_train(train_args);
    if (app.got_subcommand(evaluate)) return cmd_evaluate(eval_args);
    if (app.got_subcommand(perturb)) return cmd_perturb(perturb_args);
    if (app.got_subcommand(sweep)) return cmd_sweep_layers(sweep_args);
    if (app.got_subcommand(report)) return cmd_report(report_args);
    if (app.got_subcommand(gendata)) return cmd_gendata(gen_args);
    throw StateError("cli: no subcommand dispatched");
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return code_for(e);
  }
}

}  // namespace loralab
