#include "loralab/gendata.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

#include <json.hpp>

#include "loralab/errors.hpp"
#include "loralab/rng.hpp"

namespace loralab {

namespace {

const std::vector<std::string>& subjects() {
  static const std::vector<std::string> v = {
      "the boy",    "the girl",  "my son",     "their son", "the knight",
      "one sailor", "the crew",  "my father",  "everyone",  "the writer"};
  return v;
}

const std::vector<std::string>& verbs() {
  static const std::vector<std::string> v = {
      "would wait for", "went to",    "will see",   "can hear",
      "rode down",      "sailed past", "wrote about", "knew about",
      "called for",     "watched"};
  return v;
}

const std::vector<std::string>& objects() {
  static const std::vector<std::string> v = {
      "the plane", "the road", "the sea",  "a tale",     "the weather",
      "four boats", "the mail", "a bear",   "the sale",   "some meat"};
  return v;
}

const std::vector<std::string>& tails() {
  static const std::vector<std::string> v = {
      "last week",  "at night",    "in the rain", "by the coast",
      "every day",  "this hour",   "on the way",  "near the wood",
      "",           "with no fear"};
  return v;
}

std::string join(const std::vector<std::string>& toks) {
  std::string s;
  for (size_t i = 0; i < toks.size(); ++i) {
    if (i) s += " ";
    s += toks[i];
  }
  return s;
}

std::string corrupt(const std::vector<std::string>& ref_toks,
                    const GenDataConfig& cfg, const HomophoneLexicon& lexicon,
                    const Vocab& vocab, Rng& rng) {
  const std::vector<std::string>& pool = grammar_words();
  std::vector<std::string> out;
  for (const std::string& tok : ref_toks) {
    if (rng.next_double() >= cfg.noise_rate) {
      out.push_back(tok);
      continue;
    }
    const double op = rng.next_double();
    if (op < 0.8) {
      const std::vector<std::string> cands = candidates(tok, lexicon, vocab);
      if (!cands.empty()) {
        out.push_back(cands[rng.next_below(cands.size())]);
      } else {
        std::string w = tok;
        while (w == tok) w = pool[rng.next_below(pool.size())];
        out.push_back(w);
      }
    } else if (op < 0.9) {
      // deletion
    } else {
      out.push_back(tok);
      out.push_back(pool[rng.next_below(pool.size())]);
    }
  }
  if (out.empty())
    out.push_back(ref_toks[rng.next_below(ref_toks.size())]);
  return join(out);
}

std::string utt_id_of(long index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "utt-%05ld", index);
  return buf;
}

}  // namespace

void GenDataConfig::validate() const {
  if (utts < 1)
    throw ConfigError("gen-data: utts must be >= 1, got " +
                      std::to_string(utts));
  if (n_best < 1)
    throw ConfigError("gen-data: n_best must be >= 1, got " +
                      std::to_string(n_best));
  if (!(noise_rate >= 0.0 && noise_rate <= 1.0))
    throw ConfigError("gen-data: noise_rate must be in [0, 1], got " +
                      std::to_string(noise_rate));
  if (!(dev_fraction > 0.0 && dev_fraction < 1.0))
    throw ConfigError("gen-data: dev_fraction must be in (0, 1), got " +
                      std::to_string(dev_fraction));
  if (!(ref_in_list_prob >= 0.0 && ref_in_list_prob <= 1.0))
    throw ConfigError("gen-data: ref_in_list_prob must be in [0, 1], got " +
                      std::to_string(ref_in_list_prob));
  if (!(am_edit_weight >= 0.0) || !(am_noise_sigma >= 0.0))
    throw ConfigError("gen-data: acoustic score weights must be >= 0");
}

const std::vector<std::string>& grammar_words() {
  static const std::vector<std::string> words = [] {
    std::set<std::string> seen;
    for (const auto* part : {&subjects(), &verbs(), &objects(), &tails()})
      for (const std::string& phrase : *part)
        for (const std::string& tok : tokenize(phrase)) seen.insert(tok);
    return std::vector<std::string>(seen.begin(), seen.end());
  }();
  return words;
}

std::string sample_sentence(uint64_t seed, long index) {
  Rng rng = Rng::stream(seed, "gen/ref", uint64_t(index));
  std::string s = subjects()[rng.next_below(subjects().size())];
  s += " " + verbs()[rng.next_below(verbs().size())];
  s += " " + objects()[rng.next_below(objects().size())];
  const std::string& tail = tails()[rng.next_below(tails().size())];
  if (!tail.empty()) s += " " + tail;
  return s;
}

GenDataResult generate_data(const GenDataConfig& cfg,
                            const HomophoneLexicon& lexicon) {
  cfg.validate();

  GenDataResult data;
  data.corpus.reserve(size_t(cfg.utts));
  for (long i = 0; i < cfg.utts; ++i)
    data.corpus.push_back(sample_sentence(cfg.seed, i));

  const Vocab vocab = build_vocab(data.corpus, 1);
  const long dev_count = std::llround(double(cfg.utts) * cfg.dev_fraction);

  for (long i = 0; i < cfg.utts; ++i) {
    const std::string& ref = data.corpus[size_t(i)];
    const std::vector<std::string> ref_toks = tokenize(ref);
    Rng rng = Rng::stream(cfg.seed, "gen/nbest", uint64_t(i));
    const bool include_ref = rng.next_double() < cfg.ref_in_list_prob;

    NBestList list;
    list.utt_id = utt_id_of(i);
    list.reference = ref;
    for (int h = 0; h < cfg.n_best; ++h) {
      std::string text = (h == 0 && include_ref)
                             ? ref
                             : corrupt(ref_toks, cfg, lexicon, vocab, rng);
      const long edits = wer(ref_toks, tokenize(text)).errors;
      const double am = -cfg.am_edit_weight * double(edits) +
                        cfg.am_noise_sigma * rng.next_gaussian();
      list.hyps.push_back(Hypothesis{std::move(text), am});
    }
    if (i < dev_count)
      data.dev.push_back(std::move(list));
    else
      data.test.push_back(std::move(list));
  }
  return data;
}

void write_gendata(const GenDataResult& data, const GenDataConfig& cfg,
                   const std::string& out_dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec)
    throw IoError("gen-data: cannot create directory '" + out_dir + "': " +
                  ec.message());

  const std::string corpus_path = out_dir + "/corpus.txt";
  std::ofstream corpus(corpus_path, std::ios::binary);
  if (!corpus)
    throw IoError("gen-data: cannot open '" + corpus_path + "' for writing");
  for (const std::string& line : data.corpus) corpus << line << "\n";
  corpus.flush();
  if (!corpus.good())
    throw IoError("gen-data: write to '" + corpus_path + "' failed");

  write_nbest_jsonl(data.dev, out_dir + "/dev.jsonl");
  write_nbest_jsonl(data.test, out_dir + "/test.jsonl");

  nlohmann::ordered_json meta;
  meta["format"] = "mlm-workbench/gendata";
  meta["version"] = 1;
  meta["utts"] = cfg.utts;
  meta["n_best"] = cfg.n_best;
  meta["noise_rate"] = cfg.noise_rate;
  meta["seed"] = cfg.seed;
  meta["dev_fraction"] = cfg.dev_fraction;
  meta["ref_in_list_prob"] = cfg.ref_in_list_prob;
  meta["am_edit_weight"] = cfg.am_edit_weight;
  meta["am_noise_sigma"] = cfg.am_noise_sigma;
  meta["dev_utts"] = data.dev.size();
  meta["test_utts"] = data.test.size();
  meta["corpus_sentences"] = data.corpus.size();
  meta["grammar_words"] = grammar_words().size();
  const std::string meta_path = out_dir + "/meta.json";
  std::ofstream mf(meta_path, std::ios::binary);
  if (!mf)
    throw IoError("gen-data: cannot open '" + meta_path + "' for writing");
  mf << meta.dump(2) << "\n";
  mf.flush();
  if (!mf.good())
    throw IoError("gen-data: write to '" + meta_path + "' failed");
}

}  // namespace loralab
