#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mwp/types.hpp"

namespace mwp {

// Recognizes integers, decimals, and inline fractions "a/b" as exact
// rationals, in order of appearance. Total: never throws; zero matches is
// a valid result.
std::vector<Quantity> extract_quantities(const std::string& text);

// Char span of the final sentence. Splits on '.', '?', '!' and the CJK
// full stops "。" and "？"; a '.' between digits is a decimal
// point, not a terminator. The span always ends at the last non-whitespace
// character; with no earlier terminator the whole text is the question.
std::pair<int, int> segment_question(const std::string& text);

struct ParseResult {
  std::optional<StepList> steps;
  std::string error;  // set when steps is empty
};

// Parses an infix equation (numbers, + - * / ^ and their unicode forms,
// parentheses) into a bottom-up step list. Each literal binds to the
// leftmost not-yet-bound quantity of equal value, else to a constant.
// Subtraction/division become ADD/MUL with an inversion flag; ADD/MUL
// steps are stored canonically.
ParseResult parse_equation(const std::string& infix,
                           const std::vector<Quantity>& quantities,
                           const std::vector<Rational>& constants);

struct Reject {
  int line = 0;
  std::string reason;
};

struct LoadResult {
  std::vector<Problem> problems;
  std::vector<Reject> rejects;
};

// Reads {"id", "text", "answer", "equation"?, "lang"?} JSONL. Malformed
// lines are collected as rejects, not fatal. A valid problem whose
// equation fails to bind keeps gold_steps empty (usable for evaluation
// only) and the issue is noted in the rejects report.
// Throws std::runtime_error when the file cannot be read.
LoadResult load_jsonl(const std::string& path, const OperatorConfig& op);

void write_jsonl(const std::vector<Problem>& problems, const std::string& path);
void write_rejects(const std::vector<Reject>& rejects, const std::string& path);

// Built-in synthetic templates (1-step and 2-step arithmetic narratives).
std::vector<std::string> synthetic_template_names();

// Deterministic given seed. Every generated problem round-trips: its gold
// equation parses and evaluates exactly to its answer. Template selection
// cycles so counts stay balanced.
std::vector<Problem> generate_synthetic(uint64_t seed, int count,
                                        const std::vector<std::string>& templates,
                                        int min_value, int max_value,
                                        const OperatorConfig& op);

}  // namespace mwp
