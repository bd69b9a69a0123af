#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mwp/rational.hpp"
#include "mwp/types.hpp"

namespace mwp {

// Result of one arithmetic step: exact rational where possible, 64-bit
// float fallback for POW with a non-integer exponent.
struct Value {
  bool exact = true;
  Rational r;
  double f = 0.0;

  static Value from_rational(const Rational& r);
  static Value from_double(double v);
  double as_double() const { return exact ? r.to_double() : f; }
  std::string str() const;
};

enum class EvalFail { none, div_by_zero, overflow, undefined_pow };

struct EvalOutcome {
  std::vector<Value> step_values;
  std::optional<Value> final;       // absent when failed
  bool failed = false;
  EvalFail reason = EvalFail::none;
  int failed_step = -1;             // 0-based; steps after it not evaluated

  std::string reason_str() const;
};

// Evaluates the step list in order, stopping at the first failure.
// Never throws on a structurally valid list.
EvalOutcome evaluate(const StepList& steps,
                     const std::vector<Rational>& quantities,
                     const std::vector<Rational>& constants);

EvalOutcome evaluate(const StepList& steps, const Problem& p,
                     const OperatorConfig& op);

// Failure never matches. Otherwise matches exactly when the gold double is
// representable as the same rational, else within tol*max(1, |gold|).
bool answers_match(const EvalOutcome& predicted, double gold, double tol);
bool value_matches(const Value& predicted, double gold, double tol);

}  // namespace mwp
