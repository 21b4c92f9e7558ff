#pragma once

#include <string>
#include <unordered_map>
#include <vector>

namespace loralab {

// Whitespace word-level tokenizer; tokens are lowercased so that lexicon
// lookups and phonetic keys see one canonical form.
std::vector<std::string> tokenize(const std::string& text);

struct Vocab {
  std::vector<std::string> id_to_token;
  std::unordered_map<std::string, int> token_to_id;
  int pad_id = 0;
  int mask_id = 1;
  int unk_id = 2;

  int size() const { return int(id_to_token.size()); }
  bool contains(const std::string& tok) const {
    return token_to_id.count(tok) != 0;
  }
  // Unknown tokens map to unk_id.
  int id_of(const std::string& tok) const;
  const std::string& token_of(int id) const;
  std::vector<int> encode(const std::string& text) const;
  bool is_reserved(int id) const {
    return id == pad_id || id == mask_id || id == unk_id;
  }
};

// Builds a vocabulary from corpus lines: words with frequency >= min_count
// get ids after the reserved tokens, ordered by (frequency desc, token asc).
Vocab build_vocab(const std::vector<std::string>& corpus, int min_count);

}  // namespace loralab
