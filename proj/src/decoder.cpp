#include "mwp/decoder.hpp"

#include <array>
#include <stdexcept>

namespace mwp {

int OperandPool::find(const OperandRef& ref) const {
  for (size_t i = 0; i < entries.size(); ++i) {
    if (entries[i].ref == ref) return static_cast<int>(i);
  }
  return -1;
}

Decoder Decoder::build(ParameterStore& store, const DecoderSpec& spec) {
  Decoder d;
  d.spec_ = spec;
  const int h = spec.hidden;
  MlpSpec vec{h, h, 2, h};      // d -> d
  MlpSpec pair{2 * h, h, 2, h}; // [d;d] -> d
  MlpSpec score{h, h, 2, 1};    // d -> scalar

  if (!spec.no_commutative) {
    d.add_inv_ = Mlp::build(store, "decoder.add_inv", vec);
    d.mul_inv_ = Mlp::build(store, "decoder.mul_inv", vec);
    d.add1_ = Mlp::build(store, "decoder.add1", vec);
    d.add2_ = Mlp::build(store, "decoder.add2", vec);
    d.mul1_ = Mlp::build(store, "decoder.mul1", vec);
    d.mul2_ = Mlp::build(store, "decoder.mul2", vec);
  } else {
    d.add_ord_ = Mlp::build(store, "decoder.add_ord", pair);
    d.sub_ord_ = Mlp::build(store, "decoder.sub_ord", pair);
    d.mul_ord_ = Mlp::build(store, "decoder.mul_ord", pair);
    d.div_ord_ = Mlp::build(store, "decoder.div_ord", pair);
  }
  d.pow_ = Mlp::build(store, "decoder.pow", pair);
  d.var_ = Mlp::build(store, "decoder.var", score);
  d.expr_ = Mlp::build(store, "decoder.expr", score);
  d.stop_ = Mlp::build(store, "decoder.stop", vec);
  d.gru_stop_ = GruCell::build(store, "decoder.gru_stop", {h, h});
  d.stop_w_ = store.add("decoder.stop_w", {h}, Init::uniform_fan_in);
  d.stop_b_ = store.add("decoder.stop_b", {1}, Init::zeros);
  d.gru_rat1_ = GruCell::build(store, "decoder.gru_rat1", {h, h});
  d.gru_rat2_ = GruCell::build(store, "decoder.gru_rat2", {h, h});
  if (spec.n_constants > 0) {
    d.const_embed_ = store.add("decoder.const_embed", {spec.n_constants, h},
                               Init::uniform_fan_in);
  }
  if (spec.no_question) {
    d.question_const_ = store.add("decoder.question_const", {h},
                                  Init::uniform_fan_in);
  }
  return d;
}

OperandPool Decoder::make_pool(Graph& g, const EncoderNodes& enc) const {
  OperandPool pool;
  for (size_t i = 0; i < enc.quantity.size(); ++i) {
    pool.entries.push_back(
        {{RefKind::quantity, static_cast<int>(i)}, enc.quantity[i]});
  }
  for (int c = 0; c < spec_.n_constants; ++c) {
    pool.entries.push_back(
        {{RefKind::constant, c}, g.param_row(const_embed_, c)});
  }
  pool.question =
      spec_.no_question ? g.param(question_const_) : enc.question;
  return pool;
}

std::vector<StepExpression> Decoder::enumerate_steps(
    const std::vector<OperandRef>& refs, const OperatorConfig& op) {
  if (refs.empty()) {
    throw std::invalid_argument("enumerate_steps: empty operand pool");
  }
  std::vector<StepExpression> out;
  const size_t n = refs.size();
  auto push = [&](OpFamily fam, const OperandRef& a, bool ainv,
                  const OperandRef& b, bool binv) {
    StepExpression s;
    s.family = fam;
    s.left = {a, ainv};
    s.right = {b, binv};
    out.push_back(s.canonical());
  };
  for (size_t i = 0; i + 1 < n; ++i) {
    for (size_t j = i + 1; j < n; ++j) {
      const OperandRef &a = refs[i], &b = refs[j];
      push(OpFamily::add, a, false, b, false);
      push(OpFamily::add, a, false, b, true);   // a - b
      push(OpFamily::add, a, true, b, false);   // b - a
      push(OpFamily::mul, a, false, b, false);
      push(OpFamily::mul, a, false, b, true);   // a / b
      push(OpFamily::mul, a, true, b, false);   // b / a
      if (op.enable_pow) {
        push(OpFamily::pow, a, false, b, false);
        push(OpFamily::pow, b, false, a, false);
      }
    }
  }
  if (op.allow_self_pairs) {
    for (size_t i = 0; i < n; ++i) {
      const OperandRef& a = refs[i];
      push(OpFamily::add, a, false, a, false);
      push(OpFamily::add, a, false, a, true);  // a - a
      push(OpFamily::mul, a, false, a, false);
      push(OpFamily::mul, a, false, a, true);  // a / a
      if (op.enable_pow) push(OpFamily::pow, a, false, a, false);
    }
  }
  return out;
}

// Per-entry memo for one decoding step: inversion outputs, the first-stage
// Deep Sets vectors, and the per-operand variable scores.
struct Decoder::EntryCache {
  struct Slot {
    int inv_add = -1, inv_mul = -1;
    int u_add = -1, u_add_inv = -1;
    int u_mul = -1, u_mul_inv = -1;
    int var = -1;
  };
  std::vector<Slot> slots;
};

int Decoder::operand_vector(Graph& g, const OperandPool& pool,
                            const Operand& o, OpFamily family,
                            EntryCache* cache) const {
  int idx = pool.find(o.ref);
  if (idx < 0) {
    throw std::invalid_argument("dangling operand ref " + ref_str(o.ref));
  }
  int base = pool.entries[static_cast<size_t>(idx)].node;
  if (!o.inverted || family == OpFamily::pow) return base;
  const Mlp& inv = family == OpFamily::add ? add_inv_ : mul_inv_;
  if (cache) {
    auto& slot = cache->slots[static_cast<size_t>(idx)];
    int& memo = family == OpFamily::add ? slot.inv_add : slot.inv_mul;
    if (memo < 0) memo = inv.forward(g, base);
    return memo;
  }
  return inv.forward(g, base);
}

int Decoder::embed_with_cache(Graph& g, const StepExpression& step,
                              const OperandPool& pool,
                              EntryCache* cache) const {
  if (step.family == OpFamily::pow) {
    int l = operand_vector(g, pool, step.left, OpFamily::pow, cache);
    int r = operand_vector(g, pool, step.right, OpFamily::pow, cache);
    return pow_.forward(g, g.concat(l, r));
  }

  if (spec_.no_commutative) {
    // ordered constructor: subtraction/division are first-class ordered
    // ops over (non-inverted, inverted) operands
    int li = pool.find(step.left.ref);
    int ri = pool.find(step.right.ref);
    if (li < 0 || ri < 0) {
      throw std::invalid_argument("dangling operand ref in step " +
                                  step_str(step));
    }
    int l = pool.entries[static_cast<size_t>(li)].node;
    int r = pool.entries[static_cast<size_t>(ri)].node;
    bool is_add = step.family == OpFamily::add;
    if (step.left.inverted) {
      return (is_add ? sub_ord_ : div_ord_).forward(g, g.concat(r, l));
    }
    if (step.right.inverted) {
      return (is_add ? sub_ord_ : div_ord_).forward(g, g.concat(l, r));
    }
    return (is_add ? add_ord_ : mul_ord_).forward(g, g.concat(l, r));
  }

  const bool is_add = step.family == OpFamily::add;
  const Mlp& stage1 = is_add ? add1_ : mul1_;
  const Mlp& stage2 = is_add ? add2_ : mul2_;
  auto stage1_of = [&](const Operand& o) {
    if (cache) {
      int idx = pool.find(o.ref);
      if (idx < 0) {
        throw std::invalid_argument("dangling operand ref " + ref_str(o.ref));
      }
      auto& slot = cache->slots[static_cast<size_t>(idx)];
      int& memo = is_add ? (o.inverted ? slot.u_add_inv : slot.u_add)
                         : (o.inverted ? slot.u_mul_inv : slot.u_mul);
      if (memo < 0) {
        memo = stage1.forward(g,
                              operand_vector(g, pool, o, step.family, cache));
      }
      return memo;
    }
    return stage1.forward(g, operand_vector(g, pool, o, step.family, cache));
  };
  int ul = stage1_of(step.left);
  int ur = stage1_of(step.right);
  std::array<int, 2> parts{ul, ur};
  return stage2.forward(g, g.sum_of(parts));
}

int Decoder::embed_step(Graph& g, const StepExpression& step,
                        const OperandPool& pool) const {
  return embed_with_cache(g, step, pool, nullptr);
}

namespace {

int pool_node_of(const OperandPool& pool, const OperandRef& ref) {
  int idx = pool.find(ref);
  if (idx < 0) {
    throw std::invalid_argument("dangling operand ref " + ref_str(ref));
  }
  return pool.entries[static_cast<size_t>(idx)].node;
}

}  // namespace

ScoreBreakdown Decoder::score_step(Graph& g, const StepExpression& step,
                                   const OperandPool& pool, int* h_out,
                                   int* se_out) const {
  int h_e = embed_with_cache(g, step, pool, nullptr);
  int var_l = var_.forward(g, pool_node_of(pool, step.left.ref));
  int var_r = var_.forward(g, pool_node_of(pool, step.right.ref));
  int s_var = g.add(var_l, var_r);
  int s_expr = expr_.forward(g, h_e);
  int stop_state = gru_stop_.forward(g, stop_.forward(g, h_e), pool.question);
  int s_stop = g.add(g.dot(g.param(stop_w_), stop_state), g.param(stop_b_));
  int s_e = g.add(g.add(s_var, s_expr), s_stop);
  if (h_out) *h_out = h_e;
  if (se_out) *se_out = s_e;
  ScoreBreakdown sb;
  sb.s_var = g.value0(s_var);
  sb.s_expr = g.value0(s_expr);
  sb.s_stop = g.value0(s_stop);
  sb.s_e = g.value0(s_e);
  return sb;
}

std::vector<ScoredCandidate> Decoder::score_all(Graph& g,
                                                const OperandPool& pool,
                                                const OperatorConfig& op) const {
  std::vector<OperandRef> refs;
  refs.reserve(pool.entries.size());
  for (const auto& e : pool.entries) refs.push_back(e.ref);
  std::vector<StepExpression> steps = enumerate_steps(refs, op);

  EntryCache cache;
  cache.slots.resize(pool.entries.size());
  // per-entry variable scores are shared by every candidate touching the
  // entry
  auto var_of = [&](const OperandRef& ref) {
    int idx = pool.find(ref);
    auto& slot = cache.slots[static_cast<size_t>(idx)];
    if (slot.var < 0) {
      slot.var = var_.forward(g, pool.entries[static_cast<size_t>(idx)].node);
    }
    return slot.var;
  };

  int w = g.param(stop_w_);
  int b = g.param(stop_b_);
  std::vector<ScoredCandidate> out;
  out.reserve(steps.size());
  for (const auto& step : steps) {
    ScoredCandidate c;
    c.step = step;
    c.h_node = embed_with_cache(g, step, pool, &cache);
    int s_var = g.add(var_of(step.left.ref), var_of(step.right.ref));
    int s_expr = expr_.forward(g, c.h_node);
    int stop_state =
        gru_stop_.forward(g, stop_.forward(g, c.h_node), pool.question);
    int s_stop = g.add(g.dot(w, stop_state), b);
    c.sstop_node = s_stop;
    c.se_node = g.add(g.add(s_var, s_expr), s_stop);
    c.scores.s_var = g.value0(s_var);
    c.scores.s_expr = g.value0(s_expr);
    c.scores.s_stop = g.value0(s_stop);
    c.scores.s_e = g.value0(c.se_node);
    out.push_back(c);
  }
  return out;
}

size_t Decoder::argmax_candidate(const std::vector<ScoredCandidate>& cands) {
  if (cands.empty()) {
    throw std::invalid_argument("argmax_candidate: no candidates");
  }
  size_t best = 0;
  for (size_t i = 1; i < cands.size(); ++i) {
    if (cands[i].scores.s_e > cands[best].scores.s_e ||
        (cands[i].scores.s_e == cands[best].scores.s_e &&
         step_less(cands[i].step, cands[best].step))) {
      best = i;
    }
  }
  return best;
}

void Decoder::rationalize(Graph& g, OperandPool& pool, int chosen_h) const {
  for (auto& entry : pool.entries) {
    int first = gru_rat1_.forward(g, entry.node, chosen_h);
    entry.node = gru_rat2_.forward(g, first, pool.question);
  }
}

}  // namespace mwp
