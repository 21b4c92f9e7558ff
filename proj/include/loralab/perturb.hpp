#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "loralab/nbest.hpp"
#include "loralab/rng.hpp"
#include "loralab/vocab.hpp"

namespace loralab {

// Deterministic metaphone-class phonetic key. Homophones share keys
// ("your"/"you're", "there"/"their"). Non-alphabetic characters are
// stripped first; a word with no letters keys to the empty string, which
// never matches anything.
std::string phonetic_key(const std::string& word);

// word -> phonetically similar replacements. Covers homophone replacement,
// whitespace insertion ("maybe" -> "may be"), and near-sound token
// replacement. Replacements keep their insertion order.
struct HomophoneLexicon {
  std::map<std::string, std::vector<std::string>> entries;

  // Rejects self-maps and empty strings; duplicates collapse silently.
  void add(const std::string& word, const std::string& replacement);
  bool empty() const { return entries.empty(); }

  // TSV `word<TAB>replacement`, one pair per line, lowercase; `#` starts a
  // comment line; blank lines ignored.
  static HomophoneLexicon load_tsv(const std::string& path);
};

enum class PerturbStrategy { One, N };

const char* to_string(PerturbStrategy s);
PerturbStrategy perturb_strategy_from_string(const std::string& s);

struct PerturbPlan {
  PerturbStrategy strategy = PerturbStrategy::One;
  double replace_prob = 0.5;
  uint64_t seed = 0;

  void validate() const;
};

// Union of lexicon entries and same-key vocabulary words, minus the word
// itself; deterministic order (lexicon first, then vocabulary by id). The
// input must be a single token; the list may be empty.
std::vector<std::string> candidates(const std::string& word,
                                    const HomophoneLexicon& lexicon,
                                    const Vocab& vocab);

// Each candidate-bearing token is replaced with probability
// plan.replace_prob by a uniform draw over its candidates; other tokens
// pass through. The acoustic score is preserved. The output text is the
// tokenizer's normal form (lowercase, single spaces).
Hypothesis perturb_hypothesis(const Hypothesis& hyp, const PerturbPlan& plan,
                              const HomophoneLexicon& lexicon,
                              const Vocab& vocab, Rng& rng);

// Perturbs exactly the lowest-am_score hypothesis (ties to the highest
// index); every other hypothesis is copied bit-identically.
NBestList perturb_one(const NBestList& list, const PerturbPlan& plan,
                      const HomophoneLexicon& lexicon, const Vocab& vocab);

// Perturbs every hypothesis independently. Streams are keyed by
// (seed, utterance id, hypothesis index), so output is order-independent.
NBestList perturb_n(const NBestList& list, const PerturbPlan& plan,
                    const HomophoneLexicon& lexicon, const Vocab& vocab);

// Applies plan.strategy to every list. References are never modified.
std::vector<NBestList> perturb_set(const std::vector<NBestList>& lists,
                                   const PerturbPlan& plan,
                                   const HomophoneLexicon& lexicon,
                                   const Vocab& vocab);

}  // namespace loralab
