#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mwp/rational.hpp"

namespace mwp {

// --- bottom-up expression steps -------------------------------------------

enum class RefKind : uint8_t { quantity = 0, constant = 1, step = 2 };

struct OperandRef {
  RefKind kind = RefKind::quantity;
  int index = 0;

  bool operator==(const OperandRef&) const = default;
};

bool ref_less(const OperandRef& a, const OperandRef& b);

// Operand with an optional inversion flag: additive inverse under ADD,
// multiplicative inverse under MUL. POW ignores the flag.
struct Operand {
  OperandRef ref;
  bool inverted = false;

  bool operator==(const Operand&) const = default;
};

enum class OpFamily : uint8_t { add = 0, mul = 1, pow = 2 };

// One bottom-up step. ADD/MUL operands are kept in canonical order so that
// commutative duplicates are structurally identical; POW stays ordered
// (base, exponent).
struct StepExpression {
  OpFamily family = OpFamily::add;
  Operand left, right;

  StepExpression canonical() const;
  bool operator==(const StepExpression&) const = default;
};

// Deterministic total order used for argmax tie-breaking.
bool step_less(const StepExpression& a, const StepExpression& b);

struct StepList {
  std::vector<StepExpression> steps;
};

// --- problems --------------------------------------------------------------

struct Quantity {
  int index = 0;          // ordinal of appearance
  Rational value;
  int start = 0, end = 0; // char span into the raw text
  int token_index = -1;   // filled during tokenization
};

struct Problem {
  std::string id;
  std::string text;
  std::vector<Quantity> quantities;
  int question_start = 0, question_end = 0;
  double answer = 0.0;
  std::optional<Rational> answer_exact;
  std::optional<std::string> gold_equation;
  std::optional<StepList> gold_steps;
  std::string lang = "en";
};

struct OperatorConfig {
  bool enable_pow = false;
  std::vector<Rational> constants = {Rational::from_int(1)};
  bool allow_self_pairs = false;
  int max_steps = 6;
};

// --- rendering ---------------------------------------------------------------

std::string ref_str(const OperandRef& r);       // "q0", "c1", "#2"
std::string step_str(const StepExpression& s);  // symbolic form

// Renders operands with their numeric values ("8 - 2"); prior steps appear
// as "#k".
std::string step_str_values(const StepExpression& s, const Problem& p,
                            const OperatorConfig& op);

// Fully expands step `upto` (0-based) into an infix string, e.g.
// "(8 + 5) - 2".
std::string render_expanded(const StepList& steps, size_t upto,
                            const Problem& p, const OperatorConfig& op);

}  // namespace mwp
