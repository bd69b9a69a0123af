#include "mwp/encoder.hpp"

#include <stdexcept>

namespace mwp {

EncodedInput resolve_ids(const Tokenization& tk, const Vocabulary& vocab) {
  EncodedInput out;
  std::vector<std::pair<int, int>> tok_range(tk.tokens.size());
  for (size_t t = 0; t < tk.tokens.size(); ++t) {
    int first = static_cast<int>(out.ids.size());
    if (tk.tokens[t].is_quant) {
      out.ids.push_back(Vocabulary::quant_id);
    } else {
      vocab.append_ids(tk.tokens[t].text, out.ids);
    }
    tok_range[t] = {first, static_cast<int>(out.ids.size())};
  }
  out.quant_pos.reserve(tk.quant_pos.size());
  for (int pos : tk.quant_pos) {
    out.quant_pos.push_back(tok_range[static_cast<size_t>(pos)].first);
  }
  out.question_begin =
      tk.question_begin < static_cast<int>(tok_range.size())
          ? tok_range[static_cast<size_t>(tk.question_begin)].first
          : static_cast<int>(out.ids.size());
  out.question_end = static_cast<int>(out.ids.size());
  return out;
}

DeskEncoder DeskEncoder::build(ParameterStore& store,
                               const DeskEncoderSpec& spec) {
  if (spec.vocab_size < 3 || spec.embed_dim < 1 || spec.hidden_dim < 1) {
    throw std::invalid_argument("encoder: bad spec");
  }
  DeskEncoder e;
  e.spec_ = spec;
  e.embedding_ = store.add("encoder.embedding",
                           {spec.vocab_size, spec.embed_dim},
                           Init::uniform_fan_in);
  e.fwd_ = GruCell::build(store, "encoder.gru_fwd",
                          {spec.embed_dim, spec.hidden_dim});
  e.bwd_ = GruCell::build(store, "encoder.gru_bwd",
                          {spec.embed_dim, spec.hidden_dim});
  e.proj_w_ = store.add("encoder.proj_w", {spec.hidden_dim, 2 * spec.hidden_dim},
                        Init::uniform_fan_in);
  e.proj_b_ = store.add("encoder.proj_b", {spec.hidden_dim}, Init::zeros);
  return e;
}

EncoderNodes DeskEncoder::encode(Graph& g, const EncodedInput& in) const {
  const int n = static_cast<int>(in.ids.size());
  if (n == 0) throw std::logic_error("encoder: empty input");
  if (in.question_begin >= in.question_end) {
    throw std::logic_error("encoder: empty question token range");
  }
  const int d = spec_.hidden_dim;

  std::vector<int> embeds(static_cast<size_t>(n));
  for (int t = 0; t < n; ++t) {
    embeds[static_cast<size_t>(t)] =
        g.param_row(embedding_, in.ids[static_cast<size_t>(t)]);
  }

  std::vector<double> zeros(static_cast<size_t>(d), 0.0);
  int h = g.input(zeros);
  std::vector<int> fwd_states(static_cast<size_t>(n));
  for (int t = 0; t < n; ++t) {
    h = fwd_.forward(g, embeds[static_cast<size_t>(t)], h);
    fwd_states[static_cast<size_t>(t)] = h;
  }
  h = g.input(zeros);
  std::vector<int> bwd_states(static_cast<size_t>(n));
  for (int t = n - 1; t >= 0; --t) {
    h = bwd_.forward(g, embeds[static_cast<size_t>(t)], h);
    bwd_states[static_cast<size_t>(t)] = h;
  }

  std::vector<int> ctx(static_cast<size_t>(n));
  int pw = g.param(proj_w_);
  int pb = g.param(proj_b_);
  for (int t = 0; t < n; ++t) {
    int cat = g.concat(fwd_states[static_cast<size_t>(t)],
                       bwd_states[static_cast<size_t>(t)]);
    ctx[static_cast<size_t>(t)] = g.add(g.matvec(pw, d, 2 * d, cat), pb);
  }

  EncoderNodes out;
  out.quantity.reserve(in.quant_pos.size());
  for (int pos : in.quant_pos) {
    out.quantity.push_back(ctx[static_cast<size_t>(pos)]);
  }
  std::vector<int> qtok(ctx.begin() + in.question_begin,
                        ctx.begin() + in.question_end);
  out.question = g.mean_of(qtok);
  return out;
}

EncoderOutput DeskEncoder::encode_values(Graph& g, const EncodedInput& in) const {
  EncoderNodes nodes = encode(g, in);
  EncoderOutput out;
  for (int node : nodes.quantity) {
    Tensor t = Tensor::zeros({spec_.hidden_dim});
    auto v = g.value(node);
    t.data.assign(v.begin(), v.end());
    out.quantity_embeddings.push_back(std::move(t));
  }
  Tensor q = Tensor::zeros({spec_.hidden_dim});
  auto v = g.value(nodes.question);
  q.data.assign(v.begin(), v.end());
  out.question_embedding = std::move(q);
  return out;
}

}  // namespace mwp
