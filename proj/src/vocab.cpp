#include "loralab/vocab.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

#include "loralab/errors.hpp"

namespace loralab {

std::vector<std::string> tokenize(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream ss(text);
  std::string tok;
  while (ss >> tok) {
    for (auto& c : tok) c = char(std::tolower(static_cast<unsigned char>(c)));
    out.push_back(tok);
  }
  return out;
}

int Vocab::id_of(const std::string& tok) const {
  auto it = token_to_id.find(tok);
  return it == token_to_id.end() ? unk_id : it->second;
}

const std::string& Vocab::token_of(int id) const {
  if (id < 0 || id >= size())
    throw IndexError("vocab: id " + std::to_string(id) + " out of range");
  return id_to_token[id];
}

std::vector<int> Vocab::encode(const std::string& text) const {
  std::vector<int> ids;
  for (const auto& tok : tokenize(text)) ids.push_back(id_of(tok));
  return ids;
}

Vocab build_vocab(const std::vector<std::string>& corpus, int min_count) {
  if (corpus.empty()) throw InputError("build_vocab: empty corpus");
  std::unordered_map<std::string, long> counts;
  long total = 0;
  for (const auto& line : corpus)
    for (const auto& tok : tokenize(line)) {
      ++counts[tok];
      ++total;
    }
  if (total == 0) throw InputError("build_vocab: corpus has no tokens");

  std::vector<std::pair<std::string, long>> kept;
  for (const auto& [tok, n] : counts)
    if (n >= min_count) kept.emplace_back(tok, n);
  std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });

  Vocab v;
  v.id_to_token = {"[PAD]", "[MASK]", "[UNK]"};
  for (auto& [tok, n] : kept) v.id_to_token.push_back(tok);
  for (int i = 0; i < v.size(); ++i) v.token_to_id[v.id_to_token[i]] = i;
  return v;
}

}  // namespace loralab
