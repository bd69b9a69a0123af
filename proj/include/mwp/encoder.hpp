#pragma once

#include <vector>

#include "mwp/graph.hpp"
#include "mwp/layers.hpp"
#include "mwp/tokenizer.hpp"
#include "mwp/vocab.hpp"

namespace mwp {

struct DeskEncoderSpec {
  int vocab_size = 0;
  int embed_dim = 64;
  int hidden_dim = 64;  // d, the width every downstream vector uses
  bool lowercase = true;
};

// Problem text resolved to embedding ids. Unknown words expand to their
// characters, so positions here are in id space, not token space.
struct EncodedInput {
  std::vector<int> ids;
  std::vector<int> quant_pos;  // id-space position per quantity
  int question_begin = 0, question_end = 0;
};

EncodedInput resolve_ids(const Tokenization& tk, const Vocabulary& vocab);

struct EncoderNodes {
  std::vector<int> quantity;  // graph node per quantity, each [d]
  int question = -1;          // mean-pooled question vector [d]
};

// Spec-level output with materialized tensors.
struct EncoderOutput {
  std::vector<Tensor> quantity_embeddings;
  Tensor question_embedding;
};

// Embedding table + single bidirectional GRU layer; the concatenated
// directions are projected to d. h_q is the contextual vector at each
// <quant> position, h_qn the mean over the question tokens.
class DeskEncoder {
 public:
  DeskEncoder() = default;
  static DeskEncoder build(ParameterStore& store, const DeskEncoderSpec& spec);

  // Throws std::logic_error when the question id range is empty.
  EncoderNodes encode(Graph& g, const EncodedInput& in) const;

  // Convenience wrapper used by tests: runs encode and copies values out.
  EncoderOutput encode_values(Graph& g, const EncodedInput& in) const;

  const DeskEncoderSpec& spec() const { return spec_; }

 private:
  DeskEncoderSpec spec_;
  int embedding_ = -1;  // [vocab, embed_dim]
  GruCell fwd_, bwd_;
  int proj_w_ = -1;  // [d, 2d]
  int proj_b_ = -1;  // [d]
};

}  // namespace mwp
