#include "loralab/nbest.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "loralab/errors.hpp"

namespace loralab {

using json = nlohmann::ordered_json;

EditCount wer(const std::vector<std::string>& ref,
              const std::vector<std::string>& hyp) {
  if (ref.empty()) throw InputError("wer: empty reference");
  const size_t n = ref.size();
  const size_t m = hyp.size();
  std::vector<long> prev(m + 1), cur(m + 1);
  for (size_t j = 0; j <= m; ++j) prev[j] = long(j);
  for (size_t i = 1; i <= n; ++i) {
    cur[0] = long(i);
    for (size_t j = 1; j <= m; ++j) {
      const long sub = prev[j - 1] + (ref[i - 1] == hyp[j - 1] ? 0 : 1);
      cur[j] = std::min({sub, prev[j] + 1, cur[j - 1] + 1});
    }
    std::swap(prev, cur);
  }
  return EditCount{prev[m], long(n)};
}

EditCount wer(const std::string& ref, const std::string& hyp) {
  return wer(tokenize(ref), tokenize(hyp));
}

double corpus_wer(const std::vector<EditCount>& counts) {
  if (counts.empty()) throw InputError("corpus_wer: no utterances");
  long errors = 0;
  long len = 0;
  for (const EditCount& c : counts) {
    errors += c.errors;
    len += c.ref_len;
  }
  if (len <= 0) throw InputError("corpus_wer: zero total reference length");
  return double(errors) / double(len);
}

namespace {

// Error counts of every hypothesis of one list against its reference.
std::vector<long> hyp_errors(const NBestList& list) {
  if (list.hyps.empty())
    throw InputError("nbest: utterance '" + list.utt_id +
                     "' has no hypotheses");
  const std::vector<std::string> ref = tokenize(list.reference);
  if (ref.empty())
    throw InputError("nbest: utterance '" + list.utt_id +
                     "' has an empty reference");
  std::vector<long> out;
  out.reserve(list.hyps.size());
  for (const Hypothesis& h : list.hyps)
    out.push_back(wer(ref, tokenize(h.text)).errors);
  return out;
}

long ref_len_of(const NBestList& list) {
  return long(tokenize(list.reference).size());
}

}  // namespace

std::vector<int> oracle_choices(const std::vector<NBestList>& lists) {
  std::vector<int> out;
  out.reserve(lists.size());
  for (const NBestList& list : lists) {
    const std::vector<long> errs = hyp_errors(list);
    int best = 0;
    for (int i = 1; i < int(errs.size()); ++i)
      if (errs[size_t(i)] < errs[size_t(best)]) best = i;
    out.push_back(best);
  }
  return out;
}

double oracle_wer(const std::vector<NBestList>& lists) {
  std::vector<EditCount> counts;
  counts.reserve(lists.size());
  for (const NBestList& list : lists) {
    const std::vector<long> errs = hyp_errors(list);
    counts.push_back(
        EditCount{*std::min_element(errs.begin(), errs.end()),
                  ref_len_of(list)});
  }
  return corpus_wer(counts);
}

HypScorer pll_scorer(const TransformerModel& model) {
  return [&model](const std::string& text) {
    return pseudo_log_likelihood(model, text);
  };
}

namespace {

std::vector<std::vector<double>> score_all(const std::vector<NBestList>& lists,
                                           const HypScorer& scorer) {
  std::vector<std::vector<double>> out;
  out.reserve(lists.size());
  for (const NBestList& list : lists) {
    std::vector<double> plls;
    plls.reserve(list.hyps.size());
    for (size_t i = 0; i < list.hyps.size(); ++i) {
      double s = 0.0;
      try {
        s = scorer(list.hyps[i].text);
      } catch (const Error& e) {
        throw StateError("rescore: scoring utterance '" + list.utt_id +
                         "' hypothesis " + std::to_string(i) + " failed: " +
                         e.what());
      }
      if (!std::isfinite(s))
        throw StateError("rescore: non-finite score for utterance '" +
                         list.utt_id + "' hypothesis " + std::to_string(i));
      plls.push_back(s);
    }
    out.push_back(std::move(plls));
  }
  return out;
}

int select_hyp(const NBestList& list, const std::vector<double>& plls,
               double lambda) {
  int best = 0;
  double best_c = list.hyps[0].am_score + lambda * plls[0];
  for (int i = 1; i < int(list.hyps.size()); ++i) {
    const double c =
        list.hyps[size_t(i)].am_score + lambda * plls[size_t(i)];
    if (c > best_c ||
        (c == best_c &&
         list.hyps[size_t(i)].am_score > list.hyps[size_t(best)].am_score)) {
      best = i;
      best_c = c;
    }
  }
  return best;
}

double pooled_wer_of_selection(const std::vector<NBestList>& lists,
                               const std::vector<int>& chosen) {
  std::vector<EditCount> counts;
  counts.reserve(lists.size());
  for (size_t u = 0; u < lists.size(); ++u) {
    const std::vector<std::string> ref = tokenize(lists[u].reference);
    counts.push_back(
        wer(ref, tokenize(lists[u].hyps[size_t(chosen[u])].text)));
  }
  return corpus_wer(counts);
}

}  // namespace

RescoreResult rescore(const std::vector<NBestList>& lists,
                      const HypScorer& scorer, double lambda) {
  if (!std::isfinite(lambda))
    throw InputError("rescore: lambda must be finite");
  for (const NBestList& list : lists) (void)hyp_errors(list);
  const auto plls = score_all(lists, scorer);
  RescoreResult r;
  r.lambda = lambda;
  r.chosen.reserve(lists.size());
  for (size_t u = 0; u < lists.size(); ++u)
    r.chosen.push_back(select_hyp(lists[u], plls[u], lambda));
  r.wer = pooled_wer_of_selection(lists, r.chosen);
  r.oracle = oracle_wer(lists);
  return r;
}

double tune_coefficient(const std::vector<NBestList>& lists,
                        const HypScorer& scorer,
                        const std::vector<double>& grid) {
  if (grid.empty()) throw InputError("tune: empty lambda grid");
  for (const NBestList& list : lists) (void)hyp_errors(list);
  const auto plls = score_all(lists, scorer);
  bool have_best = false;
  double best_lambda = 0.0;
  double best_wer = 0.0;
  for (double lambda : grid) {
    if (!std::isfinite(lambda))
      throw InputError("tune: lambda grid contains a non-finite value");
    std::vector<int> chosen;
    chosen.reserve(lists.size());
    for (size_t u = 0; u < lists.size(); ++u)
      chosen.push_back(select_hyp(lists[u], plls[u], lambda));
    const double w = pooled_wer_of_selection(lists, chosen);
    if (!have_best || w < best_wer ||
        (w == best_wer && lambda < best_lambda)) {
      have_best = true;
      best_wer = w;
      best_lambda = lambda;
    }
  }
  return best_lambda;
}

double delta_wer(double wer, double oracle) { return wer - oracle; }

double nprr(double dwer_clean, double dwer_perturbed) {
  if (dwer_clean == 0.0)
    throw UndefinedMetricError(
        "nprr: clean ΔWER is zero, relative growth is undefined");
  return 100.0 * (dwer_perturbed - dwer_clean) / dwer_clean;
}

namespace {

void validate_list(const NBestList& list, std::set<std::string>& seen_ids) {
  if (list.utt_id.empty()) throw InputError("nbest: empty utterance id");
  if (!seen_ids.insert(list.utt_id).second)
    throw InputError("nbest: duplicate utterance id '" + list.utt_id + "'");
  if (tokenize(list.reference).empty())
    throw InputError("nbest: utterance '" + list.utt_id +
                     "' has an empty reference");
  if (list.hyps.empty())
    throw InputError("nbest: utterance '" + list.utt_id +
                     "' has no hypotheses");
  for (size_t i = 0; i < list.hyps.size(); ++i) {
    if (tokenize(list.hyps[i].text).empty())
      throw InputError("nbest: utterance '" + list.utt_id + "' hypothesis " +
                       std::to_string(i) + " is empty after tokenization");
    if (!std::isfinite(list.hyps[i].am_score))
      throw InputError("nbest: utterance '" + list.utt_id + "' hypothesis " +
                       std::to_string(i) + " has a non-finite am_score");
  }
}

}  // namespace

std::vector<NBestList> read_nbest_jsonl(const std::string& path,
                                        std::string* perturbation) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("nbest: cannot open '" + path + "'");
  std::vector<NBestList> lists;
  std::set<std::string> seen_ids;
  std::string line;
  long line_no = 0;
  bool saw_label = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw InputError("nbest: '" + path + "' line " +
                       std::to_string(line_no) + " is not valid JSON: " +
                       e.what());
    }
    NBestList list;
    try {
      list.utt_id = j.at("id").get<std::string>();
      list.reference = j.at("ref").get<std::string>();
      for (const json& hj : j.at("hyps")) {
        Hypothesis h;
        h.text = hj.at("text").get<std::string>();
        h.am_score = hj.at("am_score").get<double>();
        list.hyps.push_back(std::move(h));
      }
      if (perturbation && !saw_label && j.contains("perturbation")) {
        *perturbation = j.at("perturbation").get<std::string>();
        saw_label = true;
      }
    } catch (const nlohmann::json::exception& e) {
      throw InputError("nbest: '" + path + "' line " +
                       std::to_string(line_no) + " is malformed: " + e.what());
    }
    validate_list(list, seen_ids);
    lists.push_back(std::move(list));
  }
  return lists;
}

void write_nbest_jsonl(const std::vector<NBestList>& lists,
                       const std::string& path,
                       const std::string& perturbation) {
  std::set<std::string> seen_ids;
  for (const NBestList& list : lists) validate_list(list, seen_ids);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("nbest: cannot open '" + path + "' for writing");
  for (const NBestList& list : lists) {
    json j;
    j["id"] = list.utt_id;
    j["ref"] = list.reference;
    json hyps = json::array();
    for (const Hypothesis& h : list.hyps) {
      json hj;
      hj["text"] = h.text;
      hj["am_score"] = h.am_score;
      hyps.push_back(std::move(hj));
    }
    j["hyps"] = std::move(hyps);
    if (!perturbation.empty()) j["perturbation"] = perturbation;
    out << j.dump() << "\n";
  }
  out.flush();
  if (!out.good()) throw IoError("nbest: write to '" + path + "' failed");
}

std::string report_csv(const std::vector<ReportRow>& rows) {
  std::string out =
      "model,test_set,perturbation,wer,oracle_wer,delta_wer,nprr_pct\n";
  char buf[64];
  auto pct = [&buf](double fraction) {
    std::snprintf(buf, sizeof buf, "%.2f", 100.0 * fraction);
    return std::string(buf);
  };
  for (const ReportRow& r : rows) {
    out += r.model + "," + r.test_set + "," + r.perturbation + ",";
    out += pct(r.wer) + "," + pct(r.oracle_wer) + "," + pct(r.delta_wer) + ",";
    if (!r.has_nprr) {
      out += "-";
    } else if (r.nprr_undefined) {
      out += "undefined";
    } else {
      std::snprintf(buf, sizeof buf, "%.2f", r.nprr_pct);
      out += buf;
    }
    out += "\n";
  }
  return out;
}

}  // namespace loralab
