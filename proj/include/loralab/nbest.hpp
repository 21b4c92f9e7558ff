#pragma once

#include <functional>
#include <string>
#include <vector>

#include "loralab/model.hpp"
#include "loralab/vocab.hpp"

namespace loralab {

// One first-pass hypothesis. am_score is a log-domain acoustic score,
// higher better.
struct Hypothesis {
  std::string text;
  double am_score = 0.0;
};

struct NBestList {
  std::string utt_id;
  std::string reference;
  std::vector<Hypothesis> hyps;
};

// Edit-distance outcome for one utterance.
struct EditCount {
  long errors = 0;
  long ref_len = 0;

  double rate() const { return double(errors) / double(ref_len); }
};

// Minimal substitutions+insertions+deletions between token sequences,
// unit costs. The reference must be non-empty.
EditCount wer(const std::vector<std::string>& ref,
              const std::vector<std::string>& hyp);
EditCount wer(const std::string& ref, const std::string& hyp);

// Pooled corpus rate: sum of errors over sum of reference lengths.
double corpus_wer(const std::vector<EditCount>& counts);

// Per-utterance best hypothesis by error count, ties to the lowest index.
std::vector<int> oracle_choices(const std::vector<NBestList>& lists);
double oracle_wer(const std::vector<NBestList>& lists);

// Second-pass score for a hypothesis text (log-domain, higher better).
using HypScorer = std::function<double(const std::string&)>;

// Wraps a model's pseudo-log-likelihood as a HypScorer.
HypScorer pll_scorer(const TransformerModel& model);

struct RescoreResult {
  std::vector<int> chosen;
  double lambda = 0.0;
  double wer = 0.0;
  double oracle = 0.0;
};

// Per utterance choose argmax_i am_score_i + lambda*scorer(text_i); ties go
// to the higher am_score, then the lower index.
RescoreResult rescore(const std::vector<NBestList>& lists,
                      const HypScorer& scorer, double lambda);

// Grid value minimizing pooled WER; ties to the smaller lambda. Hypothesis
// scores are computed once and shared across the grid.
double tune_coefficient(const std::vector<NBestList>& lists,
                        const HypScorer& scorer,
                        const std::vector<double>& grid);

// wer - oracle. A negative result means the selection beat the recorded
// oracle, which indicates inconsistent inputs; callers flag it.
double delta_wer(double wer, double oracle);

// 100*(dwer_perturbed - dwer_clean)/dwer_clean. Scale-invariant, so the
// inputs may be fractions or percents as long as they agree.
double nprr(double dwer_clean, double dwer_perturbed);

// N-best JSONL, one utterance per line:
//   {"id": ..., "ref": ..., "hyps": [{"text": ..., "am_score": ...}, ...]}
// Perturbed sets carry an extra "perturbation" label per line; on read the
// first label seen is reported through `perturbation` when non-null.
std::vector<NBestList> read_nbest_jsonl(const std::string& path,
                                        std::string* perturbation = nullptr);
void write_nbest_jsonl(const std::vector<NBestList>& lists,
                       const std::string& path,
                       const std::string& perturbation = "");

// One report line; rates are fractions and are printed as percentages.
struct ReportRow {
  std::string model;
  std::string test_set;
  std::string perturbation;  // "-" for clean rows
  double wer = 0.0;
  double oracle_wer = 0.0;
  double delta_wer = 0.0;
  bool has_nprr = false;       // clean rows carry no NPRR
  bool nprr_undefined = false; // ΔWER_clean was zero
  double nprr_pct = 0.0;
};

// CSV with header model,test_set,perturbation,wer,oracle_wer,delta_wer,
// nprr_pct; percentages at 2 decimals, "-" for absent NPRR, "undefined"
// when ΔWER_clean was zero.
std::string report_csv(const std::vector<ReportRow>& rows);

}  // namespace loralab
