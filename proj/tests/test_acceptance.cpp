// Acceptance gate: one verdict line per criterion, exit code counts failures.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "loralab/gendata.hpp"
#include "loralab/grad_check.hpp"
#include "loralab/model.hpp"
#include "loralab/nbest.hpp"
#include "loralab/perturb.hpp"
#include "loralab/schedule.hpp"
#include "loralab/trainer.hpp"

using namespace loralab;
namespace fs = std::filesystem;

namespace {

int g_failed = 0;

void verdict(int num, bool pass, const std::string& text) {
  std::printf("[%s] criterion %2d: %s\n", pass ? "PASS" : "FAIL", num,
              text.c_str());
  if (!pass) ++g_failed;
}

void note(const std::string& text) {
  std::printf("    %s\n", text.c_str());
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                       start)
      .count();
}

std::string fmt(const char* format, ...) {
  char buf[512];
  va_list args;
  va_start(args, format);
  std::vsnprintf(buf, sizeof buf, format, args);
  va_end(args);
  return buf;
}

// ------------------------------------------------------------- criterion 1

// Reference robustness table: rescoring WER under n-best perturbation.
// Columns: model, test set, perturbation, WER, OracleWER, dWER, NPRR
// (negative NPRR marks the clean rows, which carry none). All values are
// percentages printed at two decimals.
struct TableRow {
  const char* model;
  const char* set;
  const char* pert;
  double wer, oracle, dwer, nprr;
};

const TableRow kTable[] = {
    {"FT", "clean", "-", 4.87, 3.59, 1.28, -1},
    {"FT", "clean", "perturb-1", 5.10, 3.60, 1.50, 17.18},
    {"FT", "clean", "perturb-N", 5.37, 3.56, 1.81, 41.40},
    {"FT", "other", "-", 12.47, 9.97, 2.50, -1},
    {"FT", "other", "perturb-1", 12.82, 10.09, 2.73, 9.20},
    {"FT", "other", "perturb-N", 13.07, 9.92, 3.15, 26.00},
    {"LoRA", "clean", "-", 4.78, 3.43, 1.35, -1},
    {"LoRA", "clean", "perturb-1", 5.03, 3.44, 1.59, 17.73},
    {"LoRA", "clean", "perturb-N", 6.27, 3.40, 2.87, 112.76},
    {"LoRA", "other", "-", 12.21, 9.77, 2.44, -1},
    {"LoRA", "other", "perturb-1", 12.58, 9.89, 2.69, 10.44},
    {"LoRA", "other", "perturb-N", 14.77, 9.72, 5.05, 106.82},
    {"S1", "clean", "-", 4.71, 3.44, 1.27, -1},
    {"S1", "clean", "perturb-1", 5.66, 3.45, 2.21, 74.24},
    {"S1", "clean", "perturb-N", 5.39, 3.41, 1.98, 56.06},
    {"S1", "other", "-", 12.11, 9.67, 2.44, -1},
    {"S1", "other", "perturb-1", 13.65, 9.79, 3.86, 57.37},
    {"S1", "other", "perturb-N", 13.35, 9.63, 3.73, 52.98},
    {"S3", "clean", "-", 4.69, 3.44, 1.25, -1},
    {"S3", "clean", "perturb-1", 5.48, 3.45, 2.02, 62.30},
    {"S3", "clean", "perturb-N", 5.66, 3.41, 2.24, 80.00},
    {"S3", "other", "-", 12.17, 9.72, 2.45, -1},
    {"S3", "other", "perturb-1", 13.10, 9.84, 3.26, 33.06},
    {"S3", "other", "perturb-N", 13.15, 9.67, 3.47, 41.83},
};

void criterion_1() {
  const auto start = std::chrono::steady_clock::now();
  std::vector<std::string> bad;
  int checks = 0;

  for (const TableRow& row : kTable) {
    const double d = delta_wer(row.wer, row.oracle);
    ++checks;
    if (std::fabs(d - row.dwer) > 0.005 + 1e-12)
      bad.push_back(fmt("%s/%s/%s dWER recomputed %.4f vs table %.2f",
                        row.model, row.set, row.pert, d, row.dwer));
  }
  for (const TableRow& row : kTable) {
    if (row.nprr < 0) continue;
    double dwer_clean = 0.0;
    for (const TableRow& base : kTable)
      if (!std::strcmp(base.model, row.model) &&
          !std::strcmp(base.set, row.set) && !std::strcmp(base.pert, "-"))
        dwer_clean = delta_wer(base.wer, base.oracle);
    const double n = nprr(dwer_clean, delta_wer(row.wer, row.oracle));
    ++checks;
    if (std::fabs(n - row.nprr) > 0.6 + 1e-12)
      bad.push_back(fmt("%s/%s/%s NPRR recomputed %.4f vs table %.2f",
                        row.model, row.set, row.pert, n, row.nprr));
  }

  const double elapsed = seconds_since(start);
  const bool pass = bad.empty() && elapsed < 1.0;
  verdict(1, pass,
          fmt("reference table: %d of %d metric cells reproduce within "
              "+-0.005 dWER / +-0.6 NPRR (%.3fs)",
              checks - int(bad.size()), checks, elapsed));
  for (const std::string& b : bad) note(b);
  if (!bad.empty())
    note("the table prints inputs at two decimals; these cells were derived "
         "from unrounded values, so no arithmetic on the printed pairs can "
         "land inside the stated tolerance");
}

// ------------------------------------------------------------- criterion 2

void criterion_2() {
  RankSchedule flat;
  flat.r_full = flat.r_init = flat.r_target = 8;
  flat.T = 1000;
  const int matrices = 6 * 12;
  bool ok = true;
  for (long t : {0L, 1L, 500L, 999L, 1000L})
    for (RankVariant v : {RankVariant::Continuous, RankVariant::AsPrinted})
      ok = ok && budget_at_step(t, flat, matrices, v) == 576;
  verdict(2, ok, "budget_at_step(rank 8, 6 matrices, 12 layers) == 576");
}

// ------------------------------------------------------------- criterion 3

void criterion_3() {
  RankSchedule s;
  s.r_full = 12;
  s.r_init = 8;
  s.r_target = 2;
  s.t_warm = 100;
  s.t_init = 300;
  s.t_final = 200;
  s.T = 2000;

  bool endpoints = true;
  for (RankVariant v : {RankVariant::Continuous, RankVariant::AsPrinted}) {
    endpoints = endpoints && rank_at_step(0, s, v) == double(s.r_full);
    for (long t : {s.T - s.t_final, s.T - s.t_final + 1, s.T - 57, s.T - 1, s.T})
      endpoints = endpoints && rank_at_step(t, s, v) == double(s.r_target);
  }

  const bool init_exact =
      rank_at_step(s.t_init, s, RankVariant::Continuous) == double(s.r_init);

  bool monotone = true;
  const long span = s.T - s.t_final - s.t_init;
  double prev = rank_at_step(s.t_init, s, RankVariant::Continuous);
  for (int k = 1; k < 1000; ++k) {
    const long t = s.t_init + (span * k) / 999;
    const double r = rank_at_step(t, s, RankVariant::Continuous);
    if (r > prev) monotone = false;
    prev = r;
  }

  verdict(3, endpoints && init_exact && monotone,
          fmt("schedule endpoints exact for both variants%s; continuous "
              "r(t_init) == r_init%s, non-increasing over 1000 decay "
              "samples%s",
              endpoints ? "" : " [violated]", init_exact ? "" : " [violated]",
              monotone ? "" : " [violated]"));
}

// ------------------------------------------------------------- criterion 4

Vocab merge_vocab() {
  return build_vocab({"the crew knew the road ahead", "a ship sailed away",
                      "the sea was calm today"},
                     1);
}

TransformerModel merge_model(uint64_t seed) {
  Vocab v = merge_vocab();
  ModelConfig c;
  c.vocab_size = v.size();
  c.d_model = 8;
  c.d_ff = 16;
  c.n_layers = 2;
  c.n_heads = 2;
  c.max_len = 10;
  c.seed = seed;
  return TransformerModel::init(c, v);
}

std::vector<int> random_tokens(std::mt19937& gen, const Vocab& v, int* mask_pos) {
  std::uniform_int_distribution<int> len(3, 8);
  std::uniform_int_distribution<int> word(4, v.size() - 1);
  std::vector<int> toks(size_t(len(gen)));
  for (int& t : toks) t = word(gen);
  *mask_pos = std::uniform_int_distribution<int>(0, int(toks.size()) - 1)(gen);
  toks[size_t(*mask_pos)] = v.mask_id;
  return toks;
}

void criterion_4() {
  std::mt19937 gen(2024);
  Vocab v = merge_vocab();

  // Identity at attach time must be bit-exact, not merely close.
  double init_diff = 0.0;
  {
    int pos = 0;
    std::vector<int> toks = random_tokens(gen, v, &pos);
    TransformerModel base = merge_model(7);
    const Matrix ref = forward_mlm(base, toks, {pos});
    TransformerModel lora = merge_model(7);
    attach_lora(lora, all_targets(lora), 2, 8.0, 0.0, 41);
    init_diff = std::max(init_diff, max_abs_diff(forward_mlm(lora, toks, {pos}), ref));
    TransformerModel svd = merge_model(7);
    attach_svd(svd, all_targets(svd), 3, 41);
    init_diff = std::max(init_diff, max_abs_diff(forward_mlm(svd, toks, {pos}), ref));
  }

  // 1000 cases: 10 random adapter fills x 50 inputs x both adapter kinds.
  double merge_diff = 0.0;
  std::normal_distribution<double> gauss(0.0, 0.1);
  for (int round = 0; round < 10; ++round) {
    std::vector<std::vector<int>> inputs;
    std::vector<int> positions;
    for (int i = 0; i < 50; ++i) {
      int pos = 0;
      inputs.push_back(random_tokens(gen, v, &pos));
      positions.push_back(pos);
    }

    TransformerModel lora = merge_model(uint64_t(100 + round));
    attach_lora(lora, all_targets(lora), 2, 8.0, 0.0, uint64_t(round));
    for (int l = 0; l < lora.n_layers(); ++l)
      for (MatrixName name : all_matrix_names()) {
        LoraAdapter& ad = *lora.layer(l).matrix(name).slot.lora;
        for (double& x : ad.a.value.data) x = gauss(gen);
        for (double& x : ad.b.value.data) x = gauss(gen);
      }
    std::vector<Matrix> adapted;
    for (size_t i = 0; i < inputs.size(); ++i)
      adapted.push_back(forward_mlm(lora, inputs[i], {positions[i]}));
    for (int l = 0; l < lora.n_layers(); ++l)
      for (MatrixName name : all_matrix_names()) {
        AdaptedLinear& lin = lora.layer(l).matrix(name);
        lin.weight.value = merge_adapter(lin.weight.value, *lin.slot.lora);
      }
    detach_adapters(lora);
    for (size_t i = 0; i < inputs.size(); ++i)
      merge_diff = std::max(
          merge_diff, max_abs_diff(forward_mlm(lora, inputs[i], {positions[i]}),
                                   adapted[i]));

    TransformerModel svd = merge_model(uint64_t(200 + round));
    attach_svd(svd, all_targets(svd), 3, uint64_t(round));
    std::bernoulli_distribution drop(0.3);
    for (int l = 0; l < svd.n_layers(); ++l)
      for (MatrixName name : all_matrix_names()) {
        SvdAdapter& ad = *svd.layer(l).matrix(name).slot.svd;
        for (double& x : ad.lambda.value.data) x = gauss(gen);
        for (int k = 0; k < ad.allocated(); ++k)
          if (drop(gen)) {
            ad.active[size_t(k)] = 0;
            ad.lambda.value.at(0, k) = 0.0;
          }
      }
    adapted.clear();
    for (size_t i = 0; i < inputs.size(); ++i)
      adapted.push_back(forward_mlm(svd, inputs[i], {positions[i]}));
    for (int l = 0; l < svd.n_layers(); ++l)
      for (MatrixName name : all_matrix_names()) {
        AdaptedLinear& lin = svd.layer(l).matrix(name);
        lin.weight.value = merge_adapter(lin.weight.value, *lin.slot.svd);
      }
    detach_adapters(svd);
    for (size_t i = 0; i < inputs.size(); ++i)
      merge_diff = std::max(
          merge_diff, max_abs_diff(forward_mlm(svd, inputs[i], {positions[i]}),
                                   adapted[i]));
  }

  verdict(4, init_diff == 0.0 && merge_diff <= 1e-10,
          fmt("adapter identity at init (max abs diff %g) and adapter-vs-"
              "merged agreement over 1000 cases (max abs diff %.3g)",
              init_diff, merge_diff));
}

// ------------------------------------------------------------- criterion 5

void criterion_5() {
  Vocab v = build_vocab({"the crew knew the road ahead",
                         "a ship sailed for the coast",
                         "the crew heard the sea"},
                        1);
  ModelConfig c;
  c.vocab_size = v.size();
  c.d_model = 16;
  c.d_ff = 32;
  c.n_layers = 2;
  c.n_heads = 2;
  c.max_len = 12;
  c.seed = 3;
  TransformerModel m = TransformerModel::init(c, v);

  std::vector<int> toks = v.encode("the crew knew the road");
  std::vector<int> positions = {1, 3};
  std::vector<int> targets = {toks[1], toks[3]};
  toks[1] = v.mask_id;

  auto loss = [&]() {
    Tape tape;
    ForwardCtx ctx{tape};
    Tape::NodeId logits = m.forward_masked_logits(ctx, toks, positions);
    return tape.value(tape.cross_entropy(logits, targets)).at(0, 0);
  };
  auto grads = [&]() {
    Tape tape;
    ForwardCtx ctx{tape};
    Tape::NodeId logits = m.forward_masked_logits(ctx, toks, positions);
    tape.backward(tape.cross_entropy(logits, targets));
    std::vector<Matrix> out;
    for (Param* p : m.params()) {
      auto it = ctx.leaves.find(p);
      out.push_back(it == ctx.leaves.end()
                        ? Matrix::zeros(p->value.rows, p->value.cols)
                        : tape.grad(it->second));
    }
    return out;
  };

  long entries = 0;
  for (Param* p : m.params()) entries += long(p->value.data.size());
  GradCheckReport rep = grad_check(loss, grads, m.params(), 1e-4, 1e-4);
  verdict(5, rep.passed && rep.max_rel_err < 1e-4,
          fmt("finite differences on the 2-layer d=16 model: max rel err "
              "%.3g over %ld entries (worst %s)",
              rep.max_rel_err, entries, rep.worst_param.c_str()));
}

// ------------------------------------------------------------- criterion 6

std::vector<std::string> grammar_corpus(uint64_t seed, int n) {
  std::vector<std::string> out;
  for (int i = 0; i < n; ++i) out.push_back(sample_sentence(seed, i));
  return out;
}

void criterion_6() {
  auto corpus = grammar_corpus(17, 200);
  Vocab v = build_vocab(corpus, 1);
  ModelConfig mc;
  mc.vocab_size = v.size();
  mc.d_model = 16;
  mc.d_ff = 32;
  mc.n_layers = 2;
  mc.n_heads = 2;
  mc.max_len = 16;
  mc.seed = 13;
  TransformerModel m = TransformerModel::init(mc, v);

  TrainConfig cfg;
  cfg.strategy = Strategy::S1;
  cfg.lr = 0.01;
  cfg.batch_size = 8;
  cfg.total_steps = 300;
  cfg.seed = 13;
  cfg.schedule.r_full = 16;
  cfg.schedule.r_init = 4;
  cfg.schedule.r_target = 2;
  cfg.schedule.t_warm = 0;
  cfg.schedule.t_init = 60;
  cfg.schedule.t_final = 60;
  cfg.schedule.T = 300;

  RunResult res = run_strategy(cfg, corpus, m);
  const int matrices = mc.n_layers * kNumMatrixNames;

  bool conserved = res.log.rows.size() == 300 && !res.prune_events.empty();
  int prune_steps = 0;
  long last_checked = -1;
  for (const PruneEvent& ev : res.prune_events) {
    if (ev.step == last_checked) continue;
    last_checked = ev.step;
    ++prune_steps;
    const long want =
        budget_at_step(ev.step, cfg.schedule, matrices, cfg.rank_variant);
    if (res.log.rows[size_t(ev.step)].budget != want) conserved = false;
  }

  long final_active = 0;
  for (int l = 0; l < m.n_layers(); ++l)
    for (MatrixName name : all_matrix_names())
      final_active += m.layer(l).matrix(name).slot.svd->effective_rank();
  const bool at_target =
      final_active == long(cfg.schedule.r_target) * matrices &&
      res.log.rows.back().budget == final_active;

  verdict(6, conserved && at_target,
          fmt("S1 300-step run: budget matches the schedule after all %d "
              "pruning steps; final active rank %ld == r_target*%d",
              prune_steps, final_active, matrices));
}

// ------------------------------------------------------------- criterion 7

// Independent oracle: plain recursion on (i, j) with memoization.
long lev_oracle(const std::vector<std::string>& a,
                const std::vector<std::string>& b, size_t i, size_t j,
                std::vector<long>& memo, size_t cols) {
  long& slot = memo[i * cols + j];
  if (slot >= 0) return slot;
  long r;
  if (i == a.size())
    r = long(b.size() - j);
  else if (j == b.size())
    r = long(a.size() - i);
  else {
    r = lev_oracle(a, b, i + 1, j + 1, memo, cols) +
        (a[i] == b[j] ? 0 : 1);
    r = std::min(r, 1 + lev_oracle(a, b, i + 1, j, memo, cols));
    r = std::min(r, 1 + lev_oracle(a, b, i, j + 1, memo, cols));
  }
  slot = r;
  return r;
}

void criterion_7() {
  std::mt19937 gen(555);
  const std::vector<std::string> words = {"a", "b", "c", "d", "e"};
  std::uniform_int_distribution<int> ref_len(1, 8);
  std::uniform_int_distribution<int> hyp_len(0, 8);
  std::uniform_int_distribution<size_t> pick(0, words.size() - 1);

  int mismatches = 0;
  for (int n = 0; n < 1000; ++n) {
    std::vector<std::string> ref(size_t(ref_len(gen)));
    std::vector<std::string> hyp(size_t(hyp_len(gen)));
    for (auto& w : ref) w = words[pick(gen)];
    for (auto& w : hyp) w = words[pick(gen)];

    std::vector<long> memo((ref.size() + 1) * (hyp.size() + 1), -1);
    const long want = lev_oracle(ref, hyp, 0, 0, memo, hyp.size() + 1);
    const EditCount got = wer(ref, hyp);
    if (got.errors != want || got.ref_len != long(ref.size())) ++mismatches;
  }
  verdict(7, mismatches == 0,
          fmt("edit distance matches the recursive-memo oracle on 1000 "
              "random pairs (%d mismatches)",
              mismatches));
}

// ------------------------------------------------------------- criterion 8

struct StrategyOutcome {
  Strategy strategy;
  double train_secs = 0.0;
  double lambda = 0.0;
  double tuned = 0.0;
  double first_pass = 0.0;
  double oracle = 0.0;
  bool ok = false;
};

TrainConfig strategy_config(Strategy s) {
  TrainConfig tc;
  tc.strategy = s;
  tc.lr = 0.005;
  tc.batch_size = 16;
  tc.total_steps = 400;
  tc.mask_prob = 0.15;
  tc.seed = 9;
  tc.lora.rank = 8;
  tc.lora.alpha = 32.0;
  tc.lora.dropout = 0.1;
  tc.warmup_steps = (s == Strategy::S2 || s == Strategy::S3) ? 100 : 0;
  if (s == Strategy::S1 || s == Strategy::S3) {
    tc.schedule.r_full = 32;
    tc.schedule.r_init = 6;
    tc.schedule.r_target = 2;
    tc.schedule.t_warm = s == Strategy::S3 ? 100 : 0;
    tc.schedule.t_init = s == Strategy::S3 ? 150 : 80;
    tc.schedule.t_final = 80;
    tc.schedule.T = 400;
  }
  return tc;
}

void criterion_8(const GenDataResult& data) {
  Vocab v = build_vocab(data.corpus, 1);
  ModelConfig mc;
  mc.vocab_size = v.size();
  mc.d_model = 32;
  mc.d_ff = 64;
  mc.n_layers = 2;
  mc.n_heads = 4;
  mc.max_len = 24;
  mc.seed = 9;

  const std::vector<double> grid = {0.0, 0.1, 0.2, 0.3, 0.4, 0.5,
                                    0.6, 0.7, 0.8, 0.9, 1.0};
  const HypScorer zero = [](const std::string&) { return 0.0; };

  bool all_ok = true;
  std::vector<StrategyOutcome> outcomes;
  for (Strategy s : {Strategy::FT, Strategy::LoRA, Strategy::S1, Strategy::S2,
                     Strategy::S3}) {
    StrategyOutcome out;
    out.strategy = s;
    TransformerModel model = TransformerModel::init(mc, v);
    const auto start = std::chrono::steady_clock::now();
    run_strategy(strategy_config(s), data.corpus, model);
    out.train_secs = seconds_since(start);

    const HypScorer scorer = pll_scorer(model);
    out.lambda = tune_coefficient(data.dev, scorer, grid);
    const RescoreResult tuned = rescore(data.test, scorer, out.lambda);
    const RescoreResult fp = rescore(data.test, zero, 0.0);
    out.tuned = tuned.wer;
    out.first_pass = fp.wer;
    out.oracle = oracle_wer(data.test);
    out.ok = out.train_secs < 300.0 && out.tuned <= out.first_pass &&
             out.oracle <= out.tuned;
    all_ok = all_ok && out.ok;
    outcomes.push_back(out);
  }

  verdict(8, all_ok,
          "end-to-end on 2000 synthetic utterances (N=5, noise 0.3): tuned "
          "rescoring beats or ties the first pass on held-out test for all "
          "five strategies, oracle below all");
  for (const StrategyOutcome& o : outcomes)
    note(fmt("%-4s lambda %.1f tuned %.2f%% vs first-pass %.2f%% (oracle "
             "%.2f%%), trained in %.1fs%s",
             to_string(o.strategy), o.lambda, 100.0 * o.tuned,
             100.0 * o.first_pass, 100.0 * o.oracle, o.train_secs,
             o.ok ? "" : " [violated]"));
}

// ------------------------------------------------------------- criterion 9

int argmin_am(const NBestList& list) {
  int best = 0;
  for (int i = 1; i < int(list.hyps.size()); ++i)
    if (list.hyps[size_t(i)].am_score <= list.hyps[size_t(best)].am_score)
      best = i;
  return best;
}

bool has_candidates(const std::string& text, const HomophoneLexicon& lex,
                    const Vocab& v) {
  for (const std::string& w : tokenize(text))
    if (!candidates(w, lex, v).empty()) return true;
  return false;
}

void criterion_9(const GenDataResult& data, const HomophoneLexicon& lexicon) {
  Vocab v = build_vocab(data.corpus, 1);

  // perturb-1 must rewrite the weakest hypothesis and nothing else.
  PerturbPlan one;
  one.strategy = PerturbStrategy::One;
  one.replace_prob = 1.0;
  one.seed = 77;
  bool one_ok = true;
  int rewritten = 0;
  for (const NBestList& list : data.dev) {
    const NBestList got = perturb_one(list, one, lexicon, v);
    const int target = argmin_am(list);
    if (got.reference != list.reference) one_ok = false;
    for (int i = 0; i < int(list.hyps.size()); ++i) {
      const Hypothesis &before = list.hyps[size_t(i)], &after = got.hyps[size_t(i)];
      if (std::memcmp(&before.am_score, &after.am_score, sizeof(double)) != 0)
        one_ok = false;
      if (i != target && after.text != before.text) one_ok = false;
    }
    const bool can_change = has_candidates(list.hyps[size_t(target)].text,
                                           lexicon, v);
    const bool changed =
        got.hyps[size_t(target)].text != list.hyps[size_t(target)].text;
    if (changed != can_change) one_ok = false;
    if (changed) ++rewritten;
  }

  // perturb-N replacement rate, measured on single-word candidates only so
  // token positions stay aligned.
  HomophoneLexicon flat;
  const std::vector<std::pair<std::string, std::string>> pairs = {
      {"there", "their"}, {"their", "there"}, {"to", "too"},
      {"too", "to"},      {"two", "too"},     {"hear", "here"},
      {"here", "hear"},   {"right", "write"}, {"write", "right"},
      {"sea", "see"},     {"see", "sea"},     {"won", "one"},
      {"one", "won"},     {"no", "know"},     {"know", "no"}};
  for (const auto& [w, r] : pairs) flat.add(w, r);
  std::vector<std::string> flat_words;
  for (const auto& [w, r] : pairs) flat_words.push_back(w);
  Vocab flat_vocab = build_vocab({"there their to too two hear here right "
                                  "write sea see won one no know"},
                                 1);

  std::mt19937 gen(31);
  std::uniform_int_distribution<size_t> pick(0, flat_words.size() - 1);
  std::vector<NBestList> synth;
  for (int u = 0; u < 500; ++u) {
    NBestList list;
    list.utt_id = fmt("synth-%04d", u);
    list.reference = "there";
    for (int h = 0; h < 5; ++h) {
      std::string text;
      for (int t = 0; t < 5; ++t) {
        if (t) text += ' ';
        text += flat_words[pick(gen)];
      }
      list.hyps.push_back({text, -double(h)});
    }
    synth.push_back(std::move(list));
  }

  PerturbPlan half;
  half.strategy = PerturbStrategy::N;
  half.replace_prob = 0.5;
  half.seed = 99;
  const std::vector<NBestList> halved =
      perturb_set(synth, half, flat, flat_vocab);
  long total = 0, replaced = 0;
  bool aligned = true;
  for (size_t u = 0; u < synth.size(); ++u)
    for (size_t h = 0; h < synth[u].hyps.size(); ++h) {
      const auto before = tokenize(synth[u].hyps[h].text);
      const auto after = tokenize(halved[u].hyps[h].text);
      if (before.size() != after.size()) {
        aligned = false;
        continue;
      }
      for (size_t t = 0; t < before.size(); ++t) {
        ++total;
        if (before[t] != after[t]) ++replaced;
      }
    }
  const double rate = double(replaced) / double(total);
  const bool rate_ok =
      aligned && total >= 10000 && std::fabs(rate - 0.5) <= 0.05;

  // Same plan and seed must give byte-identical perturbed JSONL.
  const fs::path dir = fs::temp_directory_path() / "loralab_acceptance";
  fs::create_directories(dir);
  PerturbPlan fixed;
  fixed.strategy = PerturbStrategy::N;
  fixed.replace_prob = 0.5;
  fixed.seed = 4242;
  const std::vector<NBestList> subset(data.dev.begin(),
                                      data.dev.begin() + 50);
  write_nbest_jsonl(perturb_set(subset, fixed, lexicon, v),
                    (dir / "p1.jsonl").string(), "perturb-n");
  write_nbest_jsonl(perturb_set(subset, fixed, lexicon, v),
                    (dir / "p2.jsonl").string(), "perturb-n");
  auto slurp = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  const std::string run1 = slurp(dir / "p1.jsonl");
  const bool bytes_ok = !run1.empty() && run1 == slurp(dir / "p2.jsonl");

  verdict(9, one_ok && rate_ok && bytes_ok,
          fmt("perturb-1 rewrote only the weakest hypothesis (%d of %zu "
              "lists changed)%s; perturb-N at p=0.5 replaced %.1f%% of %ld "
              "candidate-bearing tokens%s; fixed seed gave byte-identical "
              "JSONL%s",
              rewritten, data.dev.size(), one_ok ? "" : " [violated]",
              100.0 * rate, total, rate_ok ? "" : " [violated]",
              bytes_ok ? "" : " [violated]"));
}

// ------------------------------------------------------------ criterion 10

bool logs_identical(const TrainLog& a, const TrainLog& b) {
  if (a.rows.size() != b.rows.size()) return false;
  for (size_t i = 0; i < a.rows.size(); ++i) {
    const TrainLogRow &x = a.rows[i], &y = b.rows[i];
    if (x.step != y.step || x.stage != y.stage || x.budget != y.budget ||
        x.trainable != y.trainable)
      return false;
    if (std::memcmp(&x.loss, &y.loss, sizeof(double)) != 0) return false;
  }
  return true;
}

TransformerModel degeneracy_model(const std::vector<std::string>& corpus) {
  Vocab v = build_vocab(corpus, 1);
  ModelConfig c;
  c.vocab_size = v.size();
  c.d_model = 16;
  c.d_ff = 32;
  c.n_layers = 1;
  c.n_heads = 2;
  c.max_len = 16;
  c.seed = 23;
  return TransformerModel::init(c, v);
}

void criterion_10() {
  auto corpus = grammar_corpus(29, 60);

  TrainConfig lora;
  lora.strategy = Strategy::LoRA;
  lora.lr = 0.01;
  lora.batch_size = 4;
  lora.total_steps = 40;
  lora.seed = 37;
  lora.lora.rank = 4;
  lora.lora.alpha = 16.0;
  lora.lora.dropout = 0.0;
  lora.warmup_steps = 0;

  TrainConfig s2 = lora;
  s2.strategy = Strategy::S2;

  TransformerModel m1 = degeneracy_model(corpus);
  TransformerModel m2 = degeneracy_model(corpus);
  const bool s2_matches = logs_identical(run_strategy(lora, corpus, m1).log,
                                         run_strategy(s2, corpus, m2).log);

  TrainConfig s1 = lora;
  s1.strategy = Strategy::S1;
  s1.schedule.r_full = 16;
  s1.schedule.r_init = 3;
  s1.schedule.r_target = 2;
  s1.schedule.t_warm = 0;
  s1.schedule.t_init = 10;
  s1.schedule.t_final = 10;
  s1.schedule.T = 40;

  TrainConfig s3 = s1;
  s3.strategy = Strategy::S3;

  TransformerModel m3 = degeneracy_model(corpus);
  TransformerModel m4 = degeneracy_model(corpus);
  const bool s3_matches = logs_identical(run_strategy(s1, corpus, m3).log,
                                         run_strategy(s3, corpus, m4).log);

  verdict(10, s2_matches && s3_matches,
          fmt("degeneracies: S2 with zero warmup == vanilla LoRA%s, S3 with "
              "zero warmup == S1%s (bit-identical logs)",
              s2_matches ? "" : " [violated]",
              s3_matches ? "" : " [violated]"));
}

// ------------------------------------------------------------ criterion 11

long closed_form(const TransformerModel& m, int layer_filter, long rank) {
  long sum = 0;
  auto& mm = const_cast<TransformerModel&>(m);
  for (int l = 0; l < m.n_layers(); ++l) {
    if (layer_filter >= 0 && l != layer_filter) continue;
    for (MatrixName name : all_matrix_names()) {
      const Matrix& w = mm.layer(l).matrix(name).weight.value;
      sum += rank * long(w.rows + w.cols);
    }
  }
  return sum;
}

void criterion_11() {
  auto corpus = grammar_corpus(43, 40);
  bool closed_ok = true;

  {
    TransformerModel m = degeneracy_model(corpus);
    closed_ok = closed_ok && trainable_fraction(m) == 1.0;
  }
  const long base = [&] {
    TransformerModel m = degeneracy_model(corpus);
    return base_param_count(m);
  }();
  for (int rank : {1, 2, 4, 8}) {
    TransformerModel m = degeneracy_model(corpus);
    attach_lora(m, all_targets(m), rank, 16.0, 0.0, 5);
    const double want = double(closed_form(m, -1, rank)) / double(base);
    closed_ok = closed_ok && trainable_fraction(m) == want;
  }
  {
    TransformerModel m = degeneracy_model(corpus);
    attach_lora(m, layer_targets(m, 0), 3, 16.0, 0.0, 5);
    const double want = double(closed_form(m, 0, 3)) / double(base);
    closed_ok = closed_ok && trainable_fraction(m) == want;
  }
  for (int r_init : {1, 3}) {
    TransformerModel m = degeneracy_model(corpus);
    attach_svd(m, all_targets(m), r_init, 5);
    const double want = double(closed_form(m, -1, r_init)) / double(base);
    closed_ok = closed_ok && trainable_fraction(m) == want;
  }
  {
    // Pruning shrinks the effective rank and the fraction must follow.
    TransformerModel m = degeneracy_model(corpus);
    attach_svd(m, all_targets(m), 3, 5);
    for (MatrixName name : all_matrix_names()) {
      SvdAdapter& ad = *m.layer(0).matrix(name).slot.svd;
      ad.active[0] = 0;
      ad.lambda.value.at(0, 0) = 0.0;
    }
    const double want = double(closed_form(m, -1, 2)) / double(base);
    closed_ok = closed_ok && trainable_fraction(m) == want;
  }

  // S3 trace: full-model warmup, then adapter capacity only shrinking.
  auto s3_corpus = grammar_corpus(61, 120);
  Vocab v = build_vocab(s3_corpus, 1);
  ModelConfig mc;
  mc.vocab_size = v.size();
  mc.d_model = 16;
  mc.d_ff = 32;
  mc.n_layers = 2;
  mc.n_heads = 2;
  mc.max_len = 16;
  mc.seed = 67;
  TransformerModel m = TransformerModel::init(mc, v);
  const long s3_base = base_param_count(m);

  TrainConfig cfg;
  cfg.strategy = Strategy::S3;
  cfg.lr = 0.01;
  cfg.batch_size = 8;
  cfg.total_steps = 300;
  cfg.seed = 67;
  cfg.warmup_steps = 60;
  cfg.schedule.r_full = 16;
  cfg.schedule.r_init = 4;
  cfg.schedule.r_target = 2;
  cfg.schedule.t_warm = 60;
  cfg.schedule.t_init = 120;
  cfg.schedule.t_final = 60;
  cfg.schedule.T = 300;

  RunResult res = run_strategy(cfg, s3_corpus, m);
  bool warmup_full = true, shrinking = true;
  long init_trainable = -1, final_trainable = -1;
  for (const TrainLogRow& row : res.log.rows) {
    if (row.stage == StageLabel::Warmup) {
      if (row.trainable != s3_base) warmup_full = false;
      continue;
    }
    if (init_trainable < 0) init_trainable = row.trainable;
    if (final_trainable >= 0 && row.trainable > final_trainable)
      shrinking = false;
    final_trainable = row.trainable;
  }
  const bool arrow = warmup_full && init_trainable > 0 &&
                     final_trainable > 0 && init_trainable < s3_base &&
                     final_trainable < init_trainable;

  verdict(11, closed_ok && shrinking && arrow,
          fmt("trainable fraction equals sum r*(d1+d2)/total for every "
              "adapter configuration%s; S3 trace 100%% -> %.2f%% -> %.2f%% "
              "is stage-wise non-increasing%s",
              closed_ok ? "" : " [violated]",
              100.0 * double(init_trainable) / double(s3_base),
              100.0 * double(final_trainable) / double(s3_base),
              shrinking && arrow ? "" : " [violated]"));
}

}  // namespace

int main() {
  const auto start = std::chrono::steady_clock::now();

  GenDataConfig gen;
  gen.utts = 2000;
  gen.n_best = 5;
  gen.noise_rate = 0.3;
  gen.seed = 1;
  const HomophoneLexicon lexicon = HomophoneLexicon::load_tsv(
      std::string(LORALAB_SOURCE_DIR) + "/data/homophones.tsv");
  const GenDataResult data = generate_data(gen, lexicon);

  criterion_1();
  criterion_2();
  criterion_3();
  criterion_4();
  criterion_5();
  criterion_6();
  criterion_7();
  criterion_8(data);
  criterion_9(data, lexicon);
  criterion_10();
  criterion_11();

  std::printf("%d of 11 criteria pass (%.1fs)\n", 11 - g_failed,
              seconds_since(start));
  return g_failed;
}
