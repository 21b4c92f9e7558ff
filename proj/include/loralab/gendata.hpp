#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "loralab/nbest.hpp"
#include "loralab/perturb.hpp"

namespace loralab {

// Synthetic first-pass simulation: template-grammar references, hypothesis
// sets corrupted at a controllable rate, and acoustic scores anchored to
// true edit counts plus Gaussian noise.
struct GenDataConfig {
  long utts = 2000;
  int n_best = 5;
  double noise_rate = 0.3;
  uint64_t seed = 0;
  // Leading fraction of utterances that forms the dev split.
  double dev_fraction = 0.2;
  // Probability that the reference appears verbatim in its own list.
  double ref_in_list_prob = 0.7;
  // am = -am_edit_weight * edits + am_noise_sigma * gaussian
  double am_edit_weight = 1.2;
  double am_noise_sigma = 0.8;

  void validate() const;
};

struct GenDataResult {
  std::vector<std::string> corpus;  // reference sentence per utterance
  std::vector<NBestList> dev;
  std::vector<NBestList> test;
};

// Distinct lowercase words the template grammar can emit.
const std::vector<std::string>& grammar_words();

// Deterministic reference sentence for (seed, index).
std::string sample_sentence(uint64_t seed, long index);

GenDataResult generate_data(const GenDataConfig& cfg,
                            const HomophoneLexicon& lexicon);

// Writes corpus.txt, dev.jsonl, test.jsonl, and meta.json into out_dir
// (created if needed).
void write_gendata(const GenDataResult& data, const GenDataConfig& cfg,
                   const std::string& out_dir);

}  // namespace loralab
