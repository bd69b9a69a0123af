#include "mwp/evaluator.hpp"

#include <cmath>

namespace mwp {

Value Value::from_rational(const Rational& r) {
  Value v;
  v.exact = true;
  v.r = r;
  return v;
}

Value Value::from_double(double d) {
  Value v;
  v.exact = false;
  v.f = d;
  return v;
}

std::string Value::str() const {
  if (exact) return r.str();
  return std::to_string(f);
}

std::string EvalOutcome::reason_str() const {
  switch (reason) {
    case EvalFail::none: return "none";
    case EvalFail::div_by_zero: return "division by zero";
    case EvalFail::overflow: return "overflow";
    case EvalFail::undefined_pow: return "undefined power";
  }
  return "?";
}

namespace {

struct StepResult {
  std::optional<Value> v;
  EvalFail fail = EvalFail::none;
};

StepResult apply_add(const Value& a, bool ainv, const Value& b, bool binv) {
  if (a.exact && b.exact) {
    Rational x = ainv ? *Rational::sub(Rational::from_int(0), a.r) : a.r;
    // negation of an in-range rational cannot overflow (|kMin| excluded by
    // construction), so the deref above is safe
    auto res = binv ? Rational::sub(x, b.r) : Rational::add(x, b.r);
    if (!res) return {std::nullopt, EvalFail::overflow};
    return {Value::from_rational(*res), EvalFail::none};
  }
  double x = (ainv ? -1.0 : 1.0) * a.as_double();
  double y = (binv ? -1.0 : 1.0) * b.as_double();
  double s = x + y;
  if (!std::isfinite(s)) return {std::nullopt, EvalFail::overflow};
  return {Value::from_double(s), EvalFail::none};
}

StepResult apply_mul(const Value& a, bool ainv, const Value& b, bool binv) {
  if (a.exact && b.exact) {
    Rational x = a.r;
    if (ainv) {
      auto inv = Rational::div(Rational::from_int(1), a.r);
      if (!inv) return {std::nullopt, EvalFail::div_by_zero};
      x = *inv;
    }
    auto res = binv ? Rational::div(x, b.r) : Rational::mul(x, b.r);
    if (!res) {
      return {std::nullopt,
              binv && b.r.is_zero() ? EvalFail::div_by_zero : EvalFail::overflow};
    }
    return {Value::from_rational(*res), EvalFail::none};
  }
  double x = a.as_double();
  double y = b.as_double();
  if (ainv) {
    if (x == 0.0) return {std::nullopt, EvalFail::div_by_zero};
    x = 1.0 / x;
  }
  if (binv) {
    if (y == 0.0) return {std::nullopt, EvalFail::div_by_zero};
    y = 1.0 / y;
  }
  double m = x * y;
  if (!std::isfinite(m)) return {std::nullopt, EvalFail::overflow};
  return {Value::from_double(m), EvalFail::none};
}

StepResult apply_pow(const Value& base, const Value& exp) {
  if (base.exact && exp.exact && exp.r.is_integer()) {
    auto res = Rational::pow_int(base.r, exp.r.num());
    if (res) return {Value::from_rational(*res), EvalFail::none};
    if (base.r.is_zero() && exp.r.num() < 0) {
      return {std::nullopt, EvalFail::div_by_zero};
    }
    return {std::nullopt, EvalFail::overflow};
  }
  double b = base.as_double();
  double e = exp.as_double();
  if (b == 0.0 && e < 0.0) return {std::nullopt, EvalFail::div_by_zero};
  double p = std::pow(b, e);
  if (std::isnan(p)) return {std::nullopt, EvalFail::undefined_pow};
  if (!std::isfinite(p)) return {std::nullopt, EvalFail::overflow};
  return {Value::from_double(p), EvalFail::none};
}

}  // namespace

EvalOutcome evaluate(const StepList& steps,
                     const std::vector<Rational>& quantities,
                     const std::vector<Rational>& constants) {
  EvalOutcome out;
  auto resolve = [&](const OperandRef& r, size_t step_idx) -> std::optional<Value> {
    switch (r.kind) {
      case RefKind::quantity:
        if (r.index < 0 || r.index >= static_cast<int>(quantities.size())) {
          return std::nullopt;
        }
        return Value::from_rational(quantities[static_cast<size_t>(r.index)]);
      case RefKind::constant:
        if (r.index < 0 || r.index >= static_cast<int>(constants.size())) {
          return std::nullopt;
        }
        return Value::from_rational(constants[static_cast<size_t>(r.index)]);
      case RefKind::step:
        if (r.index < 0 || static_cast<size_t>(r.index) >= step_idx) {
          return std::nullopt;
        }
        return out.step_values[static_cast<size_t>(r.index)];
    }
    return std::nullopt;
  };

  for (size_t i = 0; i < steps.steps.size(); ++i) {
    const StepExpression& s = steps.steps[i];
    auto lhs = resolve(s.left.ref, i);
    auto rhs = resolve(s.right.ref, i);
    StepResult r;
    if (!lhs || !rhs) {
      r.fail = EvalFail::overflow;  // dangling refs surface as failure
    } else {
      switch (s.family) {
        case OpFamily::add:
          r = apply_add(*lhs, s.left.inverted, *rhs, s.right.inverted);
          break;
        case OpFamily::mul:
          r = apply_mul(*lhs, s.left.inverted, *rhs, s.right.inverted);
          break;
        case OpFamily::pow:
          r = apply_pow(*lhs, *rhs);
          break;
      }
    }
    if (!r.v) {
      out.failed = true;
      out.reason = r.fail;
      out.failed_step = static_cast<int>(i);
      return out;
    }
    out.step_values.push_back(*r.v);
  }
  if (!out.step_values.empty()) out.final = out.step_values.back();
  return out;
}

EvalOutcome evaluate(const StepList& steps, const Problem& p,
                     const OperatorConfig& op) {
  std::vector<Rational> qs;
  qs.reserve(p.quantities.size());
  for (const auto& q : p.quantities) qs.push_back(q.value);
  return evaluate(steps, qs, op.constants);
}

bool value_matches(const Value& predicted, double gold, double tol) {
  if (predicted.exact) {
    auto g = Rational::from_double(gold);
    if (g && predicted.r == *g) return true;
  }
  double pd = predicted.as_double();
  if (!std::isfinite(pd)) return false;
  return std::fabs(pd - gold) <= tol * std::max(1.0, std::fabs(gold));
}

bool answers_match(const EvalOutcome& predicted, double gold, double tol) {
  if (predicted.failed || !predicted.final) return false;
  return value_matches(*predicted.final, gold, tol);
}

}  // namespace mwp
