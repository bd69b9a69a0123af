#pragma once

#include <string>
#include <vector>

#include "mwp/types.hpp"

namespace mwp {

inline constexpr const char* kQuantToken = "<quant>";

struct Token {
  std::string text;
  int start = 0, end = 0;  // char span into the problem text
  bool is_quant = false;
};

struct Tokenization {
  std::vector<Token> tokens;
  // token position of each quantity, aligned with Problem.quantities
  std::vector<int> quant_pos;
  // token range covering the question span
  int question_begin = 0, question_end = 0;
};

// Replaces each quantity span with the reserved <quant> token, splits the
// remaining text on whitespace with ASCII punctuation as single tokens, and
// treats each non-ASCII codepoint as its own token.
Tokenization tokenize_with_quant(const Problem& p, bool lowercase);

}  // namespace mwp
