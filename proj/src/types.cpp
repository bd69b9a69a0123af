#include "mwp/types.hpp"

#include <tuple>

namespace mwp {

bool ref_less(const OperandRef& a, const OperandRef& b) {
  return std::tie(a.kind, a.index) < std::tie(b.kind, b.index);
}

namespace {

std::tuple<uint8_t, int, bool> operand_key(const Operand& o) {
  return {static_cast<uint8_t>(o.ref.kind), o.ref.index, o.inverted};
}

}  // namespace

StepExpression StepExpression::canonical() const {
  StepExpression s = *this;
  if (s.family != OpFamily::pow && operand_key(s.right) < operand_key(s.left)) {
    std::swap(s.left, s.right);
  }
  return s;
}

bool step_less(const StepExpression& a, const StepExpression& b) {
  return std::tuple(static_cast<uint8_t>(a.family), operand_key(a.left),
                    operand_key(a.right)) <
         std::tuple(static_cast<uint8_t>(b.family), operand_key(b.left),
                    operand_key(b.right));
}

std::string ref_str(const OperandRef& r) {
  switch (r.kind) {
    case RefKind::quantity:
      return "q" + std::to_string(r.index);
    case RefKind::constant:
      return "c" + std::to_string(r.index);
    case RefKind::step:
      return "#" + std::to_string(r.index + 1);
  }
  return "?";
}

namespace {

// Renders "x op y" putting the non-inverted operand first, so a step stored
// as ADD{inv(a), b} prints as "b - a".
std::string render_binary(const StepExpression& s, const std::string& ls,
                          const std::string& rs) {
  if (s.family == OpFamily::pow) return ls + " ^ " + rs;
  bool is_add = s.family == OpFamily::add;
  if (s.left.inverted) {
    return rs + (is_add ? " - " : " / ") + ls;
  }
  if (s.right.inverted) {
    return ls + (is_add ? " - " : " / ") + rs;
  }
  return ls + (is_add ? " + " : " * ") + rs;
}

std::string operand_value_str(const OperandRef& r, const Problem& p,
                              const OperatorConfig& op) {
  switch (r.kind) {
    case RefKind::quantity:
      if (r.index >= 0 && r.index < static_cast<int>(p.quantities.size())) {
        return p.quantities[static_cast<size_t>(r.index)].value.str();
      }
      return ref_str(r);
    case RefKind::constant:
      if (r.index >= 0 && r.index < static_cast<int>(op.constants.size())) {
        return op.constants[static_cast<size_t>(r.index)].str();
      }
      return ref_str(r);
    case RefKind::step:
      return ref_str(r);
  }
  return "?";
}

}  // namespace

std::string step_str(const StepExpression& s) {
  return render_binary(s, ref_str(s.left.ref), ref_str(s.right.ref));
}

std::string step_str_values(const StepExpression& s, const Problem& p,
                            const OperatorConfig& op) {
  return render_binary(s, operand_value_str(s.left.ref, p, op),
                       operand_value_str(s.right.ref, p, op));
}

namespace {

std::string expand_operand(const StepList& steps, const OperandRef& r,
                           const Problem& p, const OperatorConfig& op) {
  if (r.kind == RefKind::step) {
    const StepExpression& s = steps.steps[static_cast<size_t>(r.index)];
    return "(" + render_binary(s, expand_operand(steps, s.left.ref, p, op),
                               expand_operand(steps, s.right.ref, p, op)) +
           ")";
  }
  return operand_value_str(r, p, op);
}

}  // namespace

std::string render_expanded(const StepList& steps, size_t upto,
                            const Problem& p, const OperatorConfig& op) {
  const StepExpression& s = steps.steps[upto];
  return render_binary(s, expand_operand(steps, s.left.ref, p, op),
                       expand_operand(steps, s.right.ref, p, op));
}

}  // namespace mwp
