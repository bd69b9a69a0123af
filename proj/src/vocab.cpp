#include "mwp/vocab.hpp"

#include <fstream>
#include <stdexcept>

namespace mwp {

Vocabulary::Vocabulary() {
  add("<pad>");
  add("<unk>");
  add(kQuantToken);
}

void Vocabulary::add(const std::string& tok) {
  if (index_.count(tok)) return;
  index_.emplace(tok, static_cast<int>(tokens_.size()));
  tokens_.push_back(tok);
}

Vocabulary Vocabulary::build(const std::vector<Problem>& problems,
                             bool lowercase) {
  Vocabulary v;
  std::vector<std::string> chars;
  for (const auto& p : problems) {
    Tokenization tk = tokenize_with_quant(p, lowercase);
    for (const auto& t : tk.tokens) {
      if (t.is_quant) continue;
      v.add(t.text);
      // collect single characters for the OOV fallback
      for (char c : t.text) chars.emplace_back(1, c);
    }
  }
  for (const auto& c : chars) v.add(c);
  return v;
}

int Vocabulary::id_of(const std::string& tok) const {
  auto it = index_.find(tok);
  return it == index_.end() ? -1 : it->second;
}

void Vocabulary::append_ids(const std::string& tok,
                            std::vector<int>& out) const {
  int id = id_of(tok);
  if (id >= 0) {
    out.push_back(id);
    return;
  }
  for (char c : tok) {
    int cid = id_of(std::string(1, c));
    out.push_back(cid >= 0 ? cid : unk_id);
  }
}

void Vocabulary::save(const std::string& path) const {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw std::runtime_error("cannot write vocabulary: " + path);
  for (const auto& t : tokens_) os << t << "\n";
}

Vocabulary Vocabulary::load(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot read vocabulary: " + path);
  Vocabulary v;
  std::string line;
  int lineno = 0;
  const char* reserved[3] = {"<pad>", "<unk>", kQuantToken};
  while (std::getline(is, line)) {
    if (lineno < 3) {
      if (line != reserved[lineno]) {
        throw std::runtime_error("vocabulary file missing reserved tokens: " +
                                 path);
      }
      ++lineno;
      continue;
    }
    v.add(line);
    ++lineno;
  }
  return v;
}

}  // namespace mwp
