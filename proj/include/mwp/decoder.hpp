#pragma once

#include <vector>

#include "mwp/encoder.hpp"
#include "mwp/graph.hpp"
#include "mwp/layers.hpp"
#include "mwp/types.hpp"

namespace mwp {

struct ScoreBreakdown {
  double s_var = 0.0;
  double s_expr = 0.0;
  double s_stop = 0.0;
  double s_e = 0.0;  // (s_var + s_expr) + s_stop, computed once on the tape
};

struct ScoredCandidate {
  StepExpression step;
  int h_node = -1;      // candidate embedding [d]
  int se_node = -1;     // scalar score node
  int sstop_node = -1;  // scalar termination-score node
  ScoreBreakdown scores;
};

// Current operands: quantities, constants, and chosen steps, each with its
// (rationalized) embedding node. The question embedding rides along and is
// never modified by rationalization.
struct OperandPool {
  struct Entry {
    OperandRef ref;
    int node = -1;
  };
  std::vector<Entry> entries;
  int question = -1;

  int find(const OperandRef& ref) const;
};

struct DecoderSpec {
  int hidden = 64;
  int n_constants = 1;
  bool no_question = false;     // question replaced by a learned constant
  bool no_commutative = false;  // ordered-concat constructors instead of
                                // the permutation-invariant ones
};

// Candidate construction, scoring, and the post-step rationalizer.
//
// Constructor (default): per-operand vectors pass through an inversion MLP
// when flagged; ADD/MUL embeddings are MLP2(sum of MLP1(operand vectors)),
// which makes two-operand commutative forms bitwise identical; POW uses an
// ordered concatenation MLP.
//
// Scorer: s_var = MLP_var(pool left) + MLP_var(pool right), both
// pre-inversion; s_expr = MLP_expr(h_e);
// s_stop = w . GRU_stop(MLP_stop(h_e), h_qn) + b.
class Decoder {
 public:
  Decoder() = default;
  static Decoder build(ParameterStore& store, const DecoderSpec& spec);

  // Initial pool: quantity embeddings in index order, then the learnable
  // constant embeddings.
  OperandPool make_pool(Graph& g, const EncoderNodes& enc) const;

  // All canonical candidate steps over the given operands. Commutative
  // duplicates are never emitted. Throws std::invalid_argument on an empty
  // pool.
  static std::vector<StepExpression> enumerate_steps(
      const std::vector<OperandRef>& refs, const OperatorConfig& op);

  // Embedding of one candidate (canonical or not; the raw operand order is
  // honored, which only matters for the ordered-constructor ablation).
  int embed_step(Graph& g, const StepExpression& step,
                 const OperandPool& pool) const;

  ScoreBreakdown score_step(Graph& g, const StepExpression& step,
                            const OperandPool& pool, int* h_out = nullptr,
                            int* se_out = nullptr) const;

  // Enumerates, embeds and scores every candidate for the current step.
  std::vector<ScoredCandidate> score_all(Graph& g, const OperandPool& pool,
                                         const OperatorConfig& op) const;

  // Argmax by s_e; exact ties resolve to the smallest canonical step.
  static size_t argmax_candidate(const std::vector<ScoredCandidate>& cands);

  // h <- GRU_rat2(input = GRU_rat1(input = h, hidden = h_e), hidden = h_qn)
  // for every entry, including the one just appended.
  void rationalize(Graph& g, OperandPool& pool, int chosen_h) const;

  const DecoderSpec& spec() const { return spec_; }

 private:
  struct EntryCache;
  int operand_vector(Graph& g, const OperandPool& pool, const Operand& o,
                     OpFamily family, EntryCache* cache) const;
  int embed_with_cache(Graph& g, const StepExpression& step,
                       const OperandPool& pool, EntryCache* cache) const;

  DecoderSpec spec_;
  // permutation-invariant constructor
  Mlp add_inv_, mul_inv_, add1_, add2_, mul1_, mul2_;
  // ordered constructor (ablation)
  Mlp add_ord_, sub_ord_, mul_ord_, div_ord_;
  Mlp pow_;  // ordered combiner, always registered
  Mlp var_, expr_, stop_;
  GruCell gru_stop_, gru_rat1_, gru_rat2_;
  int stop_w_ = -1, stop_b_ = -1;
  int const_embed_ = -1;     // [n_constants, d], -1 when no constants
  int question_const_ = -1;  // [d], only under no_question
};

}  // namespace mwp
