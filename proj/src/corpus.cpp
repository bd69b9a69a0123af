#include "mwp/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <stdexcept>

#include "json.hpp"

#include "mwp/evaluator.hpp"
#include "mwp/rng.hpp"

namespace mwp {

namespace {

bool is_digit(char c) { return c >= '0' && c <= '9'; }

bool is_ascii_alnum(char c) {
  return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') ||
         (c >= 'A' && c <= 'Z');
}

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r';
}

}  // namespace

// --- quantity extraction -----------------------------------------------------

std::vector<Quantity> extract_quantities(const std::string& text) {
  std::vector<Quantity> out;
  const int n = static_cast<int>(text.size());
  int i = 0;
  auto digit_at = [&](int k) { return k >= 0 && k < n && is_digit(text[static_cast<size_t>(k)]); };
  auto skip_token = [&](int k) {
    // advance past the contiguous [alnum . /] run so a malformed match is
    // not re-entered mid-way
    while (k < n) {
      char c = text[static_cast<size_t>(k)];
      if (is_ascii_alnum(c) || c == '.' || c == '/') {
        ++k;
      } else {
        break;
      }
    }
    return k;
  };

  while (i < n) {
    if (!digit_at(i)) {
      ++i;
      continue;
    }
    if (i > 0) {
      char prev = text[static_cast<size_t>(i - 1)];
      if (is_ascii_alnum(prev) || prev == '.' || prev == '/') {
        i = skip_token(i);
        continue;
      }
    }
    int start = i;
    while (digit_at(i)) ++i;
    int end = i;
    if (i < n && text[static_cast<size_t>(i)] == '.' && digit_at(i + 1)) {
      ++i;
      while (digit_at(i)) ++i;
      end = i;
    } else if (i < n && text[static_cast<size_t>(i)] == '/' && digit_at(i + 1)) {
      int j = i + 1;
      while (digit_at(j)) ++j;
      // keep the fraction reading only when the denominator parses and the
      // match is not glued to more token characters
      auto frac = Rational::parse(text.substr(static_cast<size_t>(start),
                                              static_cast<size_t>(j - start)));
      bool glued = j < n && is_ascii_alnum(text[static_cast<size_t>(j)]);
      if (frac && !frac->is_integer() && !glued) {
        i = j;
        end = j;
      } else if (frac && frac->is_integer() && !glued) {
        // "4/2" still reads as one fraction quantity with value 2
        i = j;
        end = j;
      }
    }
    if (end < n && is_ascii_alnum(text[static_cast<size_t>(end)])) {
      i = skip_token(end);
      continue;
    }
    auto value = Rational::parse(text.substr(static_cast<size_t>(start),
                                             static_cast<size_t>(end - start)));
    if (value) {
      Quantity q;
      q.index = static_cast<int>(out.size());
      q.value = *value;
      q.start = start;
      q.end = end;
      out.push_back(q);
    }
    i = end > i ? end : i + 1;
  }
  return out;
}

// --- question segmentation ---------------------------------------------------

namespace {

// Length of a sentence terminator starting at byte i, 0 when none.
// '.' flanked by digits is a decimal point.
int terminator_len(const std::string& t, int i) {
  const int n = static_cast<int>(t.size());
  char c = t[static_cast<size_t>(i)];
  if (c == '?' || c == '!') return 1;
  if (c == '.') {
    bool prev_digit = i > 0 && is_digit(t[static_cast<size_t>(i - 1)]);
    bool next_digit = i + 1 < n && is_digit(t[static_cast<size_t>(i + 1)]);
    return prev_digit && next_digit ? 0 : 1;
  }
  // U+3002 ideographic full stop
  if (i + 2 < n && static_cast<unsigned char>(c) == 0xE3 &&
      static_cast<unsigned char>(t[static_cast<size_t>(i + 1)]) == 0x80 &&
      static_cast<unsigned char>(t[static_cast<size_t>(i + 2)]) == 0x82) {
    return 3;
  }
  // U+FF1F fullwidth question mark
  if (i + 2 < n && static_cast<unsigned char>(c) == 0xEF &&
      static_cast<unsigned char>(t[static_cast<size_t>(i + 1)]) == 0xBC &&
      static_cast<unsigned char>(t[static_cast<size_t>(i + 2)]) == 0x9F) {
    return 3;
  }
  return 0;
}

}  // namespace

std::pair<int, int> segment_question(const std::string& text) {
  const int n = static_cast<int>(text.size());
  int end = n;
  while (end > 0 && is_space(text[static_cast<size_t>(end - 1)])) --end;
  if (end == 0) return {0, 0};

  // collect terminator spans
  std::vector<std::pair<int, int>> terms;
  for (int i = 0; i < end;) {
    int len = terminator_len(text, i);
    if (len > 0) {
      terms.emplace_back(i, i + len);
      i += len;
    } else {
      ++i;
    }
  }
  // consume the question's own trailing terminator run
  int trail = end;
  for (auto it = terms.rbegin(); it != terms.rend(); ++it) {
    if (it->second == trail) {
      trail = it->first;
    } else if (it->second < trail) {
      break;
    }
  }
  // separator: last terminator fully before the question content
  int start = 0;
  for (auto it = terms.rbegin(); it != terms.rend(); ++it) {
    if (it->second <= trail) {
      start = it->second;
      break;
    }
  }
  while (start < end && is_space(text[static_cast<size_t>(start)])) ++start;
  if (start >= end) start = 0;
  return {start, end};
}

// --- equation parsing --------------------------------------------------------

namespace {

struct EqToken {
  char kind;  // 'n' number, '+','-','*','/','^','(',')'
  Rational value;
};

bool tokenize_equation(const std::string& s, std::vector<EqToken>& out,
                       std::string& error) {
  const int n = static_cast<int>(s.size());
  int i = 0;
  while (i < n) {
    char c = s[static_cast<size_t>(i)];
    if (is_space(c)) {
      ++i;
      continue;
    }
    if (is_digit(c)) {
      int start = i;
      while (i < n && is_digit(s[static_cast<size_t>(i)])) ++i;
      if (i < n && s[static_cast<size_t>(i)] == '.' && i + 1 < n &&
          is_digit(s[static_cast<size_t>(i + 1)])) {
        ++i;
        while (i < n && is_digit(s[static_cast<size_t>(i)])) ++i;
      }
      auto v = Rational::parse(s.substr(static_cast<size_t>(start),
                                        static_cast<size_t>(i - start)));
      if (!v) {
        error = "unreadable number literal";
        return false;
      }
      out.push_back({'n', *v});
      continue;
    }
    if (c == '+' || c == '-' || c == '*' || c == '/' || c == '^' || c == '(' ||
        c == ')') {
      out.push_back({c, {}});
      ++i;
      continue;
    }
    unsigned char u = static_cast<unsigned char>(c);
    auto match3 = [&](unsigned char a, unsigned char b2, unsigned char c3) {
      return i + 2 < n && u == a &&
             static_cast<unsigned char>(s[static_cast<size_t>(i + 1)]) == b2 &&
             static_cast<unsigned char>(s[static_cast<size_t>(i + 2)]) == c3;
    };
    if (match3(0xE2, 0x88, 0x92)) {  // U+2212 minus sign
      out.push_back({'-', {}});
      i += 3;
      continue;
    }
    if (i + 1 < n && u == 0xC3 &&
        static_cast<unsigned char>(s[static_cast<size_t>(i + 1)]) == 0x97) {
      out.push_back({'*', {}});  // U+00D7 multiplication sign
      i += 2;
      continue;
    }
    if (i + 1 < n && u == 0xC3 &&
        static_cast<unsigned char>(s[static_cast<size_t>(i + 1)]) == 0xB7) {
      out.push_back({'/', {}});  // U+00F7 division sign
      i += 2;
      continue;
    }
    error = std::string("unexpected character '") + c + "'";
    return false;
  }
  return true;
}

struct AstNode {
  char op = 0;  // 0 for leaves
  int left = -1, right = -1;
  OperandRef ref;
};

struct EqParser {
  const std::vector<EqToken>& toks;
  size_t pos = 0;
  std::vector<AstNode> nodes;
  std::string error;
  std::vector<bool> bound;
  const std::vector<Quantity>& quantities;
  const std::vector<Rational>& constants;

  EqParser(const std::vector<EqToken>& t, const std::vector<Quantity>& q,
           const std::vector<Rational>& c)
      : toks(t), bound(q.size(), false), quantities(q), constants(c) {}

  bool at_end() const { return pos >= toks.size(); }
  char peek() const { return at_end() ? '\0' : toks[pos].kind; }

  static int prec(char op) {
    switch (op) {
      case '+':
      case '-':
        return 1;
      case '*':
      case '/':
        return 2;
      case '^':
        return 3;
      default:
        return -1;
    }
  }

  int bind_literal(const Rational& v) {
    for (size_t qi = 0; qi < quantities.size(); ++qi) {
      if (!bound[qi] && quantities[qi].value == v) {
        bound[qi] = true;
        AstNode leaf;
        leaf.ref = {RefKind::quantity, static_cast<int>(qi)};
        nodes.push_back(leaf);
        return static_cast<int>(nodes.size() - 1);
      }
    }
    for (size_t ci = 0; ci < constants.size(); ++ci) {
      if (constants[ci] == v) {
        AstNode leaf;
        leaf.ref = {RefKind::constant, static_cast<int>(ci)};
        nodes.push_back(leaf);
        return static_cast<int>(nodes.size() - 1);
      }
    }
    error = "literal " + v.str() +
            " does not match any unbound quantity or constant";
    return -1;
  }

  int parse_primary() {
    if (at_end()) {
      error = "unexpected end of expression";
      return -1;
    }
    if (toks[pos].kind == 'n') {
      return bind_literal(toks[pos++].value);
    }
    if (toks[pos].kind == '(') {
      ++pos;
      int inner = parse_expr(0);
      if (inner < 0) return -1;
      if (peek() != ')') {
        error = "unbalanced parentheses";
        return -1;
      }
      ++pos;
      return inner;
    }
    error = std::string("unexpected token '") + toks[pos].kind + "'";
    return -1;
  }

  int parse_expr(int min_prec) {
    int lhs = parse_primary();
    if (lhs < 0) return -1;
    while (!at_end()) {
      char op = peek();
      int p = prec(op);
      if (p < min_prec) break;
      ++pos;
      // '^' is right-associative, the rest left-associative
      int rhs = parse_expr(op == '^' ? p : p + 1);
      if (rhs < 0) return -1;
      AstNode node;
      node.op = op;
      node.left = lhs;
      node.right = rhs;
      nodes.push_back(node);
      lhs = static_cast<int>(nodes.size() - 1);
    }
    return lhs;
  }

  OperandRef emit(int idx, StepList& steps) {
    const AstNode& n = nodes[static_cast<size_t>(idx)];
    if (n.op == 0) return n.ref;
    OperandRef l = emit(n.left, steps);
    OperandRef r = emit(n.right, steps);
    StepExpression s;
    switch (n.op) {
      case '+':
        s.family = OpFamily::add;
        break;
      case '-':
        s.family = OpFamily::add;
        s.right.inverted = true;
        break;
      case '*':
        s.family = OpFamily::mul;
        break;
      case '/':
        s.family = OpFamily::mul;
        s.right.inverted = true;
        break;
      case '^':
        s.family = OpFamily::pow;
        break;
    }
    s.left.ref = l;
    s.right.ref = r;
    steps.steps.push_back(s.canonical());
    return {RefKind::step, static_cast<int>(steps.steps.size() - 1)};
  }
};

}  // namespace

ParseResult parse_equation(const std::string& infix,
                           const std::vector<Quantity>& quantities,
                           const std::vector<Rational>& constants) {
  std::vector<EqToken> toks;
  std::string error;
  if (!tokenize_equation(infix, toks, error)) return {std::nullopt, error};
  if (toks.empty()) return {std::nullopt, "empty expression"};
  EqParser parser(toks, quantities, constants);
  int root = parser.parse_expr(0);
  if (root < 0) return {std::nullopt, parser.error};
  if (!parser.at_end()) return {std::nullopt, "trailing tokens"};
  if (parser.nodes[static_cast<size_t>(root)].op == 0) {
    return {std::nullopt, "expression has no operation"};
  }
  StepList steps;
  parser.emit(root, steps);
  return {steps, ""};
}

// --- JSONL I/O ---------------------------------------------------------------

using nlohmann::json;

LoadResult load_jsonl(const std::string& path, const OperatorConfig& op) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot read " + path);
  LoadResult result;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    bool blank = std::all_of(line.begin(), line.end(),
                             [](char c) { return is_space(c); });
    if (blank) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
      result.rejects.push_back({lineno, "invalid json"});
      continue;
    }
    if (!j.contains("text") || !j["text"].is_string()) {
      result.rejects.push_back({lineno, "missing text"});
      continue;
    }
    if (!j.contains("answer") || !j["answer"].is_number()) {
      result.rejects.push_back({lineno, "missing answer"});
      continue;
    }
    Problem p;
    p.text = j["text"].get<std::string>();
    if (j.contains("id")) {
      p.id = j["id"].is_string() ? j["id"].get<std::string>() : j["id"].dump();
    } else {
      p.id = "line-" + std::to_string(lineno);
    }
    p.lang = j.value("lang", std::string("en"));
    p.quantities = extract_quantities(p.text);
    if (p.quantities.empty()) {
      result.rejects.push_back({lineno, "no quantities"});
      continue;
    }
    std::tie(p.question_start, p.question_end) = segment_question(p.text);
    if (j["answer"].is_number_integer()) {
      p.answer_exact = Rational::from_int(j["answer"].get<int64_t>());
      p.answer = static_cast<double>(j["answer"].get<int64_t>());
    } else {
      p.answer = j["answer"].get<double>();
      p.answer_exact = Rational::from_double(p.answer);
    }
    if (j.contains("equation") && j["equation"].is_string()) {
      p.gold_equation = j["equation"].get<std::string>();
      ParseResult pr = parse_equation(*p.gold_equation, p.quantities, op.constants);
      if (!pr.steps) {
        // kept for evaluation; the equation issue is surfaced in the report
        result.rejects.push_back({lineno, "equation: " + pr.error});
      } else {
        EvalOutcome eo = evaluate(*pr.steps, p, op);
        if (!answers_match(eo, p.answer, 1e-6)) {
          result.rejects.push_back({lineno, "equation value mismatch"});
        } else {
          p.gold_steps = std::move(pr.steps);
        }
      }
    }
    result.problems.push_back(std::move(p));
  }
  return result;
}

void write_jsonl(const std::vector<Problem>& problems, const std::string& path) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw std::runtime_error("cannot write " + path);
  for (const auto& p : problems) {
    json j;
    j["id"] = p.id;
    j["text"] = p.text;
    if (p.answer_exact && p.answer_exact->is_integer()) {
      j["answer"] = p.answer_exact->num();
    } else {
      j["answer"] = p.answer;
    }
    if (p.gold_equation) j["equation"] = *p.gold_equation;
    if (p.lang != "en") j["lang"] = p.lang;
    os << j.dump() << "\n";
  }
}

void write_rejects(const std::vector<Reject>& rejects, const std::string& path) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw std::runtime_error("cannot write " + path);
  for (const auto& r : rejects) {
    json j;
    j["line"] = r.line;
    j["reason"] = r.reason;
    os << j.dump() << "\n";
  }
}

// --- synthetic corpus --------------------------------------------------------

namespace {

struct Generated {
  std::string text;
  std::string equation;
  Rational answer;
};

const char* kNames[] = {"Mia", "Tom", "Sam", "Ava", "Leo", "Nina"};
const char* kObjects[] = {"marbles", "stickers", "coins", "shells"};

std::string num(int64_t v) { return std::to_string(v); }

int64_t clamp_min(int64_t v, int64_t lo) { return v < lo ? lo : v; }

// templates occasionally derive bounds that cross for tight value ranges
int64_t draw(Rng& rng, int64_t lo, int64_t hi) {
  if (lo > hi) std::swap(lo, hi);
  return rng.randint(lo, hi);
}

using TemplateFn = std::function<Generated(Rng&, int64_t, int64_t)>;

struct SynTemplate {
  std::string name;
  TemplateFn fn;
};

const std::vector<SynTemplate>& templates_registry() {
  static const std::vector<SynTemplate> reg = {
      {"add",
       [](Rng& rng, int64_t lo, int64_t hi) {
         const char* name = kNames[draw(rng, 0, 5)];
         const char* obj = kObjects[draw(rng, 0, 3)];
         int64_t a = draw(rng, lo, hi);
         int64_t b = draw(rng, lo, hi);
         Generated g;
         g.text = std::string(name) + " had " + num(a) + " " + obj + ". Then " +
                  name + " found " + num(b) + " more " + obj +
                  ". How many " + obj + " does " + name + " have now?";
         g.equation = num(a) + " + " + num(b);
         g.answer = Rational::from_int(a + b);
         return g;
       }},
      {"sub",
       [](Rng& rng, int64_t lo, int64_t hi) {
         const char* name = kNames[draw(rng, 0, 5)];
         int64_t b = draw(rng, lo, hi);
         int64_t a = draw(rng, b, hi);
         Generated g;
         g.text = std::string(name) + " is baking a cake. The recipe wants " +
                  num(a) + " cups of flour. " + name + " already put in " +
                  num(b) + " cups. How many more cups must be added?";
         g.equation = num(a) + " - " + num(b);
         g.answer = Rational::from_int(a - b);
         return g;
       }},
      {"mul",
       [](Rng& rng, int64_t lo, int64_t hi) {
         int64_t a = draw(rng, lo, hi);
         int64_t b = draw(rng, clamp_min(lo, 2), clamp_min(hi / 2, 2));
         Generated g;
         g.text = "Each box holds " + num(a) + " pencils. There are " + num(b) +
                  " boxes on the shelf. How many pencils are there in total?";
         g.equation = num(a) + " * " + num(b);
         g.answer = Rational::from_int(a * b);
         return g;
       }},
      {"div",
       [](Rng& rng, int64_t lo, int64_t hi) {
         int64_t b = draw(rng, 2, clamp_min(std::min<int64_t>(5, hi / 2), 2));
         int64_t k = draw(rng, 2, clamp_min(hi / b, 2));
         int64_t a = b * k;
         Generated g;
         g.text = "A farmer packs " + num(a) + " eggs equally into " + num(b) +
                  " cartons. How many eggs go in each carton?";
         g.equation = num(a) + " / " + num(b);
         g.answer = Rational::from_int(k);
         (void)lo;
         return g;
       }},
      {"add_sub",
       [](Rng& rng, int64_t lo, int64_t hi) {
         const char* name = kNames[draw(rng, 0, 5)];
         int64_t a = draw(rng, lo, hi);
         int64_t b = draw(rng, lo, hi);
         int64_t c = draw(rng, lo, std::min(hi, a + b));
         Generated g;
         g.text = std::string(name) + " had " + num(a) + " cards. " + name +
                  " bought " + num(b) + " more cards. Then " + name +
                  " gave " + num(c) +
                  " cards to a friend. How many cards are left?";
         g.equation = num(a) + " + " + num(b) + " - " + num(c);
         g.answer = Rational::from_int(a + b - c);
         return g;
       }},
      {"mul_add",
       [](Rng& rng, int64_t lo, int64_t hi) {
         int64_t a = draw(rng, lo, hi);
         int64_t b = draw(rng, lo, hi);
         int64_t c = draw(rng, clamp_min(lo, 2), clamp_min(hi / 2, 2));
         Generated g;
         g.text = "A tray holds " + num(a) + " red apples and " + num(b) +
                  " green apples. There are " + num(c) +
                  " such trays on the table. How many apples are there in all?";
         g.equation = "(" + num(a) + " + " + num(b) + ") * " + num(c);
         g.answer = Rational::from_int((a + b) * c);
         return g;
       }},
      {"sub_mul",
       [](Rng& rng, int64_t lo, int64_t hi) {
         int64_t a = draw(rng, clamp_min(lo, 2), hi);
         int64_t b = draw(rng, clamp_min(lo, 2), hi);
         int64_t c = draw(rng, lo, std::min(hi, a * b));
         Generated g;
         g.text = "A school bought " + num(a) + " packs with " + num(b) +
                  " pens in each pack. The teachers handed out " + num(c) +
                  " pens. How many pens are left?";
         g.equation = num(a) + " * " + num(b) + " - " + num(c);
         g.answer = Rational::from_int(a * b - c);
         return g;
       }},
      {"div_add",
       [](Rng& rng, int64_t lo, int64_t hi) {
         const char* name = kNames[draw(rng, 0, 5)];
         int64_t b = draw(rng, 2, clamp_min(std::min<int64_t>(5, hi / 2), 2));
         int64_t k = draw(rng, 2, clamp_min(hi / b, 2));
         int64_t a = b * k;
         int64_t c = draw(rng, lo, hi);
         Generated g;
         g.text = std::string(name) + " split " + num(a) +
                  " stickers equally among " + num(b) +
                  " friends. Each friend also got " + num(c) +
                  " bonus stickers. How many stickers did each friend get?";
         g.equation = num(a) + " / " + num(b) + " + " + num(c);
         g.answer = Rational::from_int(k + c);
         return g;
       }},
  };
  return reg;
}

}  // namespace

std::vector<std::string> synthetic_template_names() {
  std::vector<std::string> names;
  for (const auto& t : templates_registry()) names.push_back(t.name);
  return names;
}

std::vector<Problem> generate_synthetic(uint64_t seed, int count,
                                        const std::vector<std::string>& templates,
                                        int min_value, int max_value,
                                        const OperatorConfig& op) {
  if (min_value < 1 || max_value < min_value) {
    throw std::invalid_argument("generate_synthetic: bad value range");
  }
  std::vector<const SynTemplate*> chosen;
  if (templates.empty() ||
      (templates.size() == 1 && templates[0] == "all")) {
    for (const auto& t : templates_registry()) chosen.push_back(&t);
  } else {
    for (const auto& name : templates) {
      const SynTemplate* found = nullptr;
      for (const auto& t : templates_registry()) {
        if (t.name == name) found = &t;
      }
      if (!found) {
        throw std::invalid_argument("unknown template: " + name);
      }
      chosen.push_back(found);
    }
  }

  Rng rng(seed);
  std::vector<Problem> out;
  out.reserve(static_cast<size_t>(count));
  for (int k = 0; k < count; ++k) {
    const SynTemplate& t = *chosen[static_cast<size_t>(k) % chosen.size()];
    Generated g = t.fn(rng, min_value, max_value);

    Problem p;
    p.id = "syn-" + std::to_string(seed) + "-" + std::to_string(k);
    p.text = g.text;
    p.quantities = extract_quantities(p.text);
    std::tie(p.question_start, p.question_end) = segment_question(p.text);
    p.gold_equation = g.equation;
    p.answer_exact = g.answer;
    p.answer = g.answer.to_double();

    ParseResult pr = parse_equation(g.equation, p.quantities, op.constants);
    if (!pr.steps) {
      throw std::logic_error("template " + t.name +
                             " produced an unparseable equation: " + pr.error);
    }
    EvalOutcome eo = evaluate(*pr.steps, p, op);
    if (eo.failed || !eo.final || !eo.final->exact ||
        !(eo.final->r == g.answer)) {
      throw std::logic_error("template " + t.name +
                             " is not self-consistent");
    }
    p.gold_steps = std::move(pr.steps);
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace mwp
