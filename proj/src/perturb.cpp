#include "loralab/perturb.hpp"

#include <cctype>
#include <fstream>
#include <set>

#include "loralab/errors.hpp"

namespace loralab {

std::string phonetic_key(const std::string& word) {
  std::string w;
  for (char c : word) {
    const unsigned char u = static_cast<unsigned char>(c);
    if (std::isalpha(u)) w += char(std::tolower(u));
  }
  if (w.empty()) return "";

  if (w.size() >= 2) {
    const std::string head = w.substr(0, 2);
    if (head == "ae" || head == "gn" || head == "kn" || head == "pn" ||
        head == "wr")
      w.erase(0, 1);
    else if (head == "wh")
      w = "w" + w.substr(2);
  }
  if (w[0] == 'x') w[0] = 's';

  auto is_vowel = [](char c) {
    return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u';
  };

  std::string key;
  const size_t n = w.size();
  for (size_t i = 0; i < n; ++i) {
    const char c = w[i];
    const char prev = i > 0 ? w[i - 1] : '\0';
    const char next = i + 1 < n ? w[i + 1] : '\0';
    const char next2 = i + 2 < n ? w[i + 2] : '\0';
    if (c == prev && c != 'c') continue;
    switch (c) {
      case 'a':
      case 'e':
      case 'i':
      case 'o':
      case 'u':
        if (i == 0) key += char(std::toupper(c));
        break;
      case 'b':
        if (!(i + 1 == n && prev == 'm')) key += 'B';
        break;
      case 'c':
        if (next == 'i' && next2 == 'a') {
          key += 'X';
        } else if (next == 'h') {
          key += (prev == 's') ? 'K' : 'X';
          ++i;
        } else if (next == 'i' || next == 'e' || next == 'y') {
          key += 'S';
        } else {
          key += 'K';
        }
        break;
      case 'd':
        if (next == 'g' && (next2 == 'e' || next2 == 'i' || next2 == 'y')) {
          key += 'J';
          ++i;
        } else {
          key += 'T';
        }
        break;
      case 'f':
        key += 'F';
        break;
      case 'g':
        if (next == 'h') {
          if (i + 2 < n && is_vowel(next2)) key += 'K';
          ++i;
        } else if (next == 'n') {
          // silent, as in "sign"
        } else if (next == 'i' || next == 'e' || next == 'y') {
          key += 'J';
        } else {
          key += 'K';
        }
        break;
      case 'h':
        if (is_vowel(next) &&
            !(prev == 'c' || prev == 's' || prev == 'p' || prev == 't' ||
              prev == 'g'))
          key += 'H';
        break;
      case 'j':
        key += 'J';
        break;
      case 'k':
        if (prev != 'c') key += 'K';
        break;
      case 'l':
        key += 'L';
        break;
      case 'm':
        key += 'M';
        break;
      case 'n':
        key += 'N';
        break;
      case 'p':
        if (next == 'h') {
          key += 'F';
          ++i;
        } else {
          key += 'P';
        }
        break;
      case 'q':
        key += 'K';
        break;
      case 'r':
        key += 'R';
        break;
      case 's':
        if (next == 'h') {
          key += 'X';
          ++i;
        } else if (next == 'i' && (next2 == 'o' || next2 == 'a')) {
          key += 'X';
        } else {
          key += 'S';
        }
        break;
      case 't':
        if (next == 'h') {
          key += '0';
          ++i;
        } else if (next == 'i' && (next2 == 'o' || next2 == 'a')) {
          key += 'X';
        } else {
          key += 'T';
        }
        break;
      case 'v':
        key += 'F';
        break;
      case 'w':
        if (is_vowel(next)) key += 'W';
        break;
      case 'x':
        key += "KS";
        break;
      case 'y':
        if (is_vowel(next)) key += 'Y';
        break;
      case 'z':
        key += 'S';
        break;
      default:
        break;
    }
  }
  return key;
}

namespace {

std::string lowercase(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s)
    out += char(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

}  // namespace

void HomophoneLexicon::add(const std::string& word,
                           const std::string& replacement) {
  const std::string w = lowercase(word);
  const std::string r = lowercase(replacement);
  if (w.empty() || r.empty())
    throw InputError("lexicon: empty word or replacement");
  if (w == r)
    throw InputError("lexicon: '" + w + "' maps to itself");
  std::vector<std::string>& reps = entries[w];
  for (const std::string& existing : reps)
    if (existing == r) return;
  reps.push_back(r);
}

HomophoneLexicon HomophoneLexicon::load_tsv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("lexicon: cannot open '" + path + "'");
  HomophoneLexicon lex;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const size_t tab = line.find('\t');
    if (tab == std::string::npos)
      throw InputError("lexicon: '" + path + "' line " +
                       std::to_string(line_no) + " has no tab separator");
    const std::string word = line.substr(0, tab);
    const std::string repl = line.substr(tab + 1);
    try {
      lex.add(word, repl);
    } catch (const InputError& e) {
      throw InputError("lexicon: '" + path + "' line " +
                       std::to_string(line_no) + ": " + e.what());
    }
  }
  return lex;
}

const char* to_string(PerturbStrategy s) {
  switch (s) {
    case PerturbStrategy::One: return "perturb-1";
    case PerturbStrategy::N: return "perturb-n";
  }
  return "?";
}

PerturbStrategy perturb_strategy_from_string(const std::string& s) {
  if (s == "perturb-1" || s == "one" || s == "1") return PerturbStrategy::One;
  if (s == "perturb-n" || s == "n") return PerturbStrategy::N;
  throw LookupError("perturb: unknown strategy '" + s + "'");
}

void PerturbPlan::validate() const {
  if (!(replace_prob >= 0.0 && replace_prob <= 1.0))
    throw ConfigError("perturb: replace_prob must be in [0, 1], got " +
                      std::to_string(replace_prob));
}

std::vector<std::string> candidates(const std::string& word,
                                    const HomophoneLexicon& lexicon,
                                    const Vocab& vocab) {
  const std::vector<std::string> toks = tokenize(word);
  if (toks.size() != 1)
    throw InputError("candidates: expected a single token, got '" + word +
                     "'");
  const std::string& w = toks[0];

  std::vector<std::string> out;
  std::set<std::string> seen;
  seen.insert(w);
  auto push = [&](const std::string& cand) {
    if (seen.insert(cand).second) out.push_back(cand);
  };

  auto it = lexicon.entries.find(w);
  if (it != lexicon.entries.end())
    for (const std::string& r : it->second) push(r);

  const std::string key = phonetic_key(w);
  if (!key.empty())
    for (int id = 0; id < vocab.size(); ++id) {
      if (vocab.is_reserved(id)) continue;
      const std::string& cand = vocab.token_of(id);
      if (cand != w && phonetic_key(cand) == key) push(cand);
    }
  return out;
}

Hypothesis perturb_hypothesis(const Hypothesis& hyp, const PerturbPlan& plan,
                              const HomophoneLexicon& lexicon,
                              const Vocab& vocab, Rng& rng) {
  plan.validate();
  const std::vector<std::string> toks = tokenize(hyp.text);
  std::string out_text;
  for (const std::string& tok : toks) {
    std::string out_tok = tok;
    const std::vector<std::string> cands = candidates(tok, lexicon, vocab);
    if (!cands.empty() && rng.next_double() < plan.replace_prob)
      out_tok = cands[rng.next_below(cands.size())];
    if (!out_text.empty()) out_text += " ";
    out_text += out_tok;
  }
  return Hypothesis{out_text, hyp.am_score};
}

NBestList perturb_one(const NBestList& list, const PerturbPlan& plan,
                      const HomophoneLexicon& lexicon, const Vocab& vocab) {
  plan.validate();
  if (list.hyps.empty())
    throw InputError("perturb: utterance '" + list.utt_id +
                     "' has no hypotheses");
  size_t target = 0;
  for (size_t i = 1; i < list.hyps.size(); ++i)
    if (list.hyps[i].am_score <= list.hyps[target].am_score) target = i;
  NBestList out = list;
  Rng rng = Rng::stream(plan.seed, "perturb/" + list.utt_id, target);
  out.hyps[target] =
      perturb_hypothesis(list.hyps[target], plan, lexicon, vocab, rng);
  return out;
}

NBestList perturb_n(const NBestList& list, const PerturbPlan& plan,
                    const HomophoneLexicon& lexicon, const Vocab& vocab) {
  plan.validate();
  if (list.hyps.empty())
    throw InputError("perturb: utterance '" + list.utt_id +
                     "' has no hypotheses");
  NBestList out = list;
  for (size_t i = 0; i < list.hyps.size(); ++i) {
    Rng rng = Rng::stream(plan.seed, "perturb/" + list.utt_id, i);
    out.hyps[i] = perturb_hypothesis(list.hyps[i], plan, lexicon, vocab, rng);
  }
  return out;
}

std::vector<NBestList> perturb_set(const std::vector<NBestList>& lists,
                                   const PerturbPlan& plan,
                                   const HomophoneLexicon& lexicon,
                                   const Vocab& vocab) {
  std::vector<NBestList> out;
  out.reserve(lists.size());
  for (const NBestList& list : lists)
    out.push_back(plan.strategy == PerturbStrategy::One
                      ? perturb_one(list, plan, lexicon, vocab)
                      : perturb_n(list, plan, lexicon, vocab));
  return out;
}

}  // namespace loralab
