#include <filesystem>

#include "doctest.h"

#include "mwp/corpus.hpp"
#include "mwp/encoder.hpp"

using namespace mwp;

namespace {

Problem make_problem(const std::string& text) {
  Problem p;
  p.id = "t";
  p.text = text;
  p.quantities = extract_quantities(text);
  std::tie(p.question_start, p.question_end) = segment_question(text);
  return p;
}

std::vector<std::string> token_texts(const Tokenization& tk) {
  std::vector<std::string> out;
  for (const auto& t : tk.tokens) out.push_back(t.text);
  return out;
}

struct TestModel {
  ParameterStore store;
  DeskEncoder encoder;
  Vocabulary vocab;
};

TestModel make_encoder(const std::vector<Problem>& corpus, uint64_t seed,
                       int dim = 8) {
  Vocabulary vocab = Vocabulary::build(corpus, true);
  ParameterStore store(seed);
  DeskEncoderSpec spec;
  spec.vocab_size = vocab.size();
  spec.embed_dim = dim;
  spec.hidden_dim = dim;
  DeskEncoder enc = DeskEncoder::build(store, spec);
  return {std::move(store), enc, std::move(vocab)};
}

}  // namespace

TEST_CASE("tokenize: quantities collapse to the reserved token") {
  Problem p = make_problem("The recipe wants 8 cups of flour");
  Tokenization tk = tokenize_with_quant(p, true);
  auto toks = token_texts(tk);
  REQUIRE(toks.size() == 7);
  CHECK(toks[3] == "<quant>");
  CHECK(tk.quant_pos == std::vector<int>{3});

  Problem sub = make_problem("8 cups of flour");
  auto tk2 = tokenize_with_quant(sub, true);
  CHECK(token_texts(tk2) ==
        std::vector<std::string>{"<quant>", "cups", "of", "flour"});
}

TEST_CASE("tokenize: no quantities means no quant tokens") {
  Problem p = make_problem("no numbers in this sentence");
  Tokenization tk = tokenize_with_quant(p, true);
  for (const auto& t : tk.tokens) CHECK_FALSE(t.is_quant);
  CHECK(tk.quant_pos.empty());
}

TEST_CASE("tokenize: adjacent quantities stay distinct") {
  Problem p = make_problem("values 16 4 appear");
  Tokenization tk = tokenize_with_quant(p, true);
  auto toks = token_texts(tk);
  CHECK(toks == std::vector<std::string>{"values", "<quant>", "<quant>",
                                         "appear"});
  REQUIRE(tk.quant_pos.size() == 2);
  CHECK(tk.quant_pos[0] == 1);
  CHECK(tk.quant_pos[1] == 2);
  CHECK(tk.tokens[1].start != tk.tokens[2].start);
}

TEST_CASE("tokenize: punctuation splits and question range is a suffix") {
  Problem p = make_problem("Jason placed 131 erasers. How many now?");
  Tokenization tk = tokenize_with_quant(p, true);
  auto toks = token_texts(tk);
  CHECK(toks == std::vector<std::string>{"jason", "placed", "<quant>",
                                         "erasers", ".", "how", "many", "now",
                                         "?"});
  CHECK(tk.question_begin == 5);
  CHECK(tk.question_end == 9);
}

TEST_CASE("vocab: reserved ids, build order, and save/load round-trip") {
  std::vector<Problem> corpus = {make_problem("Tom had 3 red apples."),
                                 make_problem("Sue had 4 blue pens.")};
  Vocabulary v = Vocabulary::build(corpus, true);
  CHECK(v.token(Vocabulary::pad_id) == "<pad>");
  CHECK(v.token(Vocabulary::unk_id) == "<unk>");
  CHECK(v.token(Vocabulary::quant_id) == "<quant>");
  CHECK(v.id_of("tom") > 2);
  CHECK(v.id_of("pens") > 2);
  CHECK(v.id_of("zebra") == -1);

  auto path = std::filesystem::temp_directory_path() / "mwps_vocab_test.txt";
  v.save(path.string());
  Vocabulary loaded = Vocabulary::load(path.string());
  REQUIRE(loaded.size() == v.size());
  for (int i = 0; i < v.size(); ++i) CHECK(loaded.token(i) == v.token(i));
  std::filesystem::remove(path);
}

TEST_CASE("vocab: unknown words fall back to characters") {
  std::vector<Problem> corpus = {make_problem("Tom had 3 cats.")};
  Vocabulary v = Vocabulary::build(corpus, true);
  std::vector<int> ids;
  v.append_ids("tach", ids);  // t, a, c, h all appear as characters
  CHECK(ids.size() == 4);
  for (int id : ids) CHECK(id != Vocabulary::unk_id);
  ids.clear();
  v.append_ids("qzx", ids);  // characters never seen
  CHECK(ids == std::vector<int>{Vocabulary::unk_id, Vocabulary::unk_id,
                                Vocabulary::unk_id});
}

TEST_CASE("encode: a single-token question pools to that exact vector") {
  // the final "5" is both a quantity and the whole question
  Problem p = make_problem("Add 3 and 4. 5");
  REQUIRE(p.quantities.size() == 3);
  TestModel tm = make_encoder({p}, 21);
  Graph g;
  g.reset(tm.store);
  EncodedInput in = resolve_ids(tokenize_with_quant(p, true), tm.vocab);
  REQUIRE(in.question_end - in.question_begin == 1);
  EncoderNodes nodes = tm.encoder.encode(g, in);
  auto q2 = g.value(nodes.quantity[2]);
  auto qn = g.value(nodes.question);
  REQUIRE(q2.size() == qn.size());
  for (size_t i = 0; i < qn.size(); ++i) CHECK(qn[i] == q2[i]);
}

TEST_CASE("encode: outputs are a pure function of the problem") {
  Problem a = make_problem("Tom had 3 apples. He got 4 more. How many now?");
  Problem b = make_problem("Sue lost 2 pens. How many left?");
  TestModel tm = make_encoder({a, b}, 5);
  auto run = [&](const Problem& p) {
    Graph g;
    g.reset(tm.store);
    EncodedInput in = resolve_ids(tokenize_with_quant(p, true), tm.vocab);
    EncoderOutput out = tm.encoder.encode_values(g, in);
    return out;
  };
  EncoderOutput a1 = run(a);
  (void)run(b);
  EncoderOutput a2 = run(a);
  REQUIRE(a1.quantity_embeddings.size() == a2.quantity_embeddings.size());
  for (size_t i = 0; i < a1.quantity_embeddings.size(); ++i) {
    CHECK(a1.quantity_embeddings[i].data == a2.quantity_embeddings[i].data);
  }
  CHECK(a1.question_embedding.data == a2.question_embedding.data);
}

TEST_CASE("encode: zeroed recurrent weights collapse to the projection bias") {
  Problem p = make_problem("Tom had 3 apples. He got 4 more. How many now?");
  TestModel tm = make_encoder({p}, 9);
  // zero both GRU directions; keep embedding and projection random
  for (size_t i = 0; i < tm.store.size(); ++i) {
    auto& prm = tm.store.at(static_cast<int>(i));
    if (prm.name.rfind("encoder.gru_", 0) == 0) {
      std::fill(prm.value.data.begin(), prm.value.data.end(), 0.0);
    }
  }
  auto bias = tm.store.at(tm.store.find("encoder.proj_b")).value.data;
  Graph g;
  g.reset(tm.store);
  EncodedInput in = resolve_ids(tokenize_with_quant(p, true), tm.vocab);
  EncoderNodes nodes = tm.encoder.encode(g, in);
  for (int node : nodes.quantity) {
    auto v = g.value(node);
    for (size_t k = 0; k < bias.size(); ++k) CHECK(v[k] == bias[k]);
  }
  auto qn = g.value(nodes.question);
  for (size_t k = 0; k < bias.size(); ++k) {
    CHECK(qn[k] == doctest::Approx(bias[k]).epsilon(1e-12));
  }
}

TEST_CASE("encode: alignment survives unrelated trailing sentences") {
  Problem a = make_problem("Tom had 3 apples. He got 4 more. How many now?");
  Problem b = make_problem(
      "Tom had 3 apples. He got 4 more. The sky was very blue. How many now?");
  TestModel tm = make_encoder({a, b}, 33);
  Graph g;
  g.reset(tm.store);
  EncodedInput ia = resolve_ids(tokenize_with_quant(a, true), tm.vocab);
  EncoderOutput oa = tm.encoder.encode_values(g, ia);
  Graph g2;
  g2.reset(tm.store);
  EncodedInput ib = resolve_ids(tokenize_with_quant(b, true), tm.vocab);
  EncoderOutput ob = tm.encoder.encode_values(g2, ib);
  // same number of quantities, same alignment, different values
  REQUIRE(oa.quantity_embeddings.size() == 2);
  REQUIRE(ob.quantity_embeddings.size() == 2);
  CHECK(oa.quantity_embeddings[0].data != ob.quantity_embeddings[0].data);
}

TEST_CASE("encode: empty question token range is rejected") {
  Problem p = make_problem("Tom had 3 apples. How many now?");
  TestModel tm = make_encoder({p}, 2);
  Graph g;
  g.reset(tm.store);
  EncodedInput in = resolve_ids(tokenize_with_quant(p, true), tm.vocab);
  in.question_begin = in.question_end;  // force the corrupt range
  CHECK_THROWS_AS(tm.encoder.encode(g, in), std::logic_error);
}

TEST_CASE("mean pooling is linear in its inputs") {
  ParameterStore store(1);
  Graph g;
  g.reset(store);
  std::vector<double> a{0.3, -1.7, 2.2}, b{1.1, 0.4, -0.9};
  std::vector<double> a2{0.6, -3.4, 4.4}, b2{2.2, 0.8, -1.8};
  std::vector<int> plain{g.input(a), g.input(b)};
  std::vector<int> doubled{g.input(a2), g.input(b2)};
  auto m1 = g.value(g.mean_of(plain));
  auto m2 = g.value(g.mean_of(doubled));
  for (size_t i = 0; i < m1.size(); ++i) {
    CHECK(m2[i] == 2.0 * m1[i]);  // exact for a power-of-two scale
  }

  Graph g2;
  g2.reset(store);
  std::vector<double> a3(a), b3(b);
  for (double& v : a3) v *= 0.3;
  for (double& v : b3) v *= 0.3;
  std::vector<int> scaled{g2.input(a3), g2.input(b3)};
  auto m3 = g2.value(g2.mean_of(scaled));
  for (size_t i = 0; i < m1.size(); ++i) {
    CHECK(m3[i] == doctest::Approx(0.3 * m1[i]).epsilon(1e-12));
  }
}

TEST_CASE("encode: determinism under a fixed seed") {
  Problem p = make_problem("Nina split 12 stickers among 4 friends. How many?");
  TestModel t1 = make_encoder({p}, 77);
  TestModel t2 = make_encoder({p}, 77);
  Graph g1, g2;
  g1.reset(t1.store);
  g2.reset(t2.store);
  EncodedInput in1 = resolve_ids(tokenize_with_quant(p, true), t1.vocab);
  EncodedInput in2 = resolve_ids(tokenize_with_quant(p, true), t2.vocab);
  EncoderOutput o1 = t1.encoder.encode_values(g1, in1);
  EncoderOutput o2 = t2.encoder.encode_values(g2, in2);
  CHECK(o1.question_embedding.data == o2.question_embedding.data);
  for (size_t i = 0; i < o1.quantity_embeddings.size(); ++i) {
    CHECK(o1.quantity_embeddings[i].data == o2.quantity_embeddings[i].data);
  }
}
