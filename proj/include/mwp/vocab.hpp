#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "mwp/tokenizer.hpp"
#include "mwp/types.hpp"

namespace mwp {

// Token table with reserved ids 0 <pad>, 1 <unk>, 2 <quant>. Built from a
// training corpus in first-appearance order; unknown tokens fall back to
// their individual characters at lookup time.
class Vocabulary {
 public:
  static constexpr int pad_id = 0;
  static constexpr int unk_id = 1;
  static constexpr int quant_id = 2;

  Vocabulary();

  static Vocabulary build(const std::vector<Problem>& problems, bool lowercase);

  int size() const { return static_cast<int>(tokens_.size()); }
  const std::string& token(int id) const { return tokens_[static_cast<size_t>(id)]; }
  int id_of(const std::string& tok) const;  // -1 when absent

  // One id when the token is known, otherwise per-character fallback
  // (characters missing from the table map to <unk>).
  void append_ids(const std::string& tok, std::vector<int>& out) const;

  // One token per line, line number = id.
  void save(const std::string& path) const;
  static Vocabulary load(const std::string& path);

 private:
  void add(const std::string& tok);
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> index_;
};

}  // namespace mwp
