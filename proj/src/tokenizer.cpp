#include "mwp/tokenizer.hpp"

#include <cctype>

namespace mwp {

namespace {

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r';
}

bool is_ascii_word_char(char c) {
  return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') ||
         (c >= 'A' && c <= 'Z') || c == '\'';
}

int utf8_len(unsigned char lead) {
  if (lead < 0x80) return 1;
  if ((lead >> 5) == 0x6) return 2;
  if ((lead >> 4) == 0xE) return 3;
  if ((lead >> 3) == 0x1E) return 4;
  return 1;  // invalid byte, consume one
}

std::string lower_ascii(std::string s) {
  for (char& c : s) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return s;
}

}  // namespace

Tokenization tokenize_with_quant(const Problem& p, bool lowercase) {
  Tokenization out;
  out.quant_pos.assign(p.quantities.size(), -1);
  const std::string& text = p.text;
  const int n = static_cast<int>(text.size());
  size_t next_q = 0;

  int i = 0;
  while (i < n) {
    if (next_q < p.quantities.size() && p.quantities[next_q].start == i) {
      const Quantity& q = p.quantities[next_q];
      out.quant_pos[next_q] = static_cast<int>(out.tokens.size());
      out.tokens.push_back({kQuantToken, q.start, q.end, true});
      i = q.end;
      ++next_q;
      continue;
    }
    char c = text[static_cast<size_t>(i)];
    if (is_space(c)) {
      ++i;
      continue;
    }
    // stop a word token before the next quantity span
    int limit = next_q < p.quantities.size() ? p.quantities[next_q].start : n;
    if (is_ascii_word_char(c)) {
      int start = i;
      while (i < limit && is_ascii_word_char(text[static_cast<size_t>(i)])) ++i;
      std::string tok = text.substr(static_cast<size_t>(start),
                                    static_cast<size_t>(i - start));
      out.tokens.push_back({lowercase ? lower_ascii(tok) : tok, start, i, false});
      continue;
    }
    if (static_cast<unsigned char>(c) < 0x80) {
      // single ASCII punctuation token
      out.tokens.push_back({std::string(1, c), i, i + 1, false});
      ++i;
      continue;
    }
    int len = utf8_len(static_cast<unsigned char>(c));
    if (i + len > n) len = 1;
    out.tokens.push_back({text.substr(static_cast<size_t>(i),
                                      static_cast<size_t>(len)),
                          i, i + len, false});
    i += len;
  }

  out.question_begin = static_cast<int>(out.tokens.size());
  out.question_end = static_cast<int>(out.tokens.size());
  for (size_t t = 0; t < out.tokens.size(); ++t) {
    if (out.tokens[t].start >= p.question_start) {
      out.question_begin = static_cast<int>(t);
      break;
    }
  }
  return out;
}

}  // namespace mwp
