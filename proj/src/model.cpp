#include "mwp/model.hpp"

#include <stdexcept>

#include "mwp/checkpoint.hpp"

namespace mwp {

using nlohmann::json;

Model Model::build(const ModelConfig& cfg, Vocabulary vocab) {
  Model m{cfg, std::move(vocab), ParameterStore(cfg.seed), {}, {}};
  DeskEncoderSpec enc_spec;
  enc_spec.vocab_size = m.vocab.size();
  enc_spec.embed_dim = cfg.embed_dim;
  enc_spec.hidden_dim = cfg.hidden;
  enc_spec.lowercase = cfg.lowercase;
  m.encoder = DeskEncoder::build(m.store, enc_spec);

  DecoderSpec dec_spec;
  dec_spec.hidden = cfg.hidden;
  dec_spec.n_constants = static_cast<int>(cfg.op.constants.size());
  dec_spec.no_question = cfg.no_question;
  dec_spec.no_commutative = cfg.no_commutative;
  m.decoder = Decoder::build(m.store, dec_spec);
  return m;
}

EncodedInput Model::prepare(const Problem& p) const {
  Tokenization tk = tokenize_with_quant(p, cfg.lowercase);
  return resolve_ids(tk, vocab);
}

json Model::config_echo() const {
  json constants = json::array();
  for (const auto& c : cfg.op.constants) constants.push_back(c.str());
  return json{{"hidden", cfg.hidden},
              {"embed_dim", cfg.embed_dim},
              {"no_question", cfg.no_question},
              {"no_commutative", cfg.no_commutative},
              {"lowercase", cfg.lowercase},
              {"enable_pow", cfg.op.enable_pow},
              {"allow_self_pairs", cfg.op.allow_self_pairs},
              {"constants", constants},
              {"max_steps", cfg.op.max_steps},
              {"seed", cfg.seed},
              {"vocab_size", vocab.size()}};
}

ModelConfig model_config_from_json(const json& j) {
  ModelConfig cfg;
  cfg.hidden = j.at("hidden").get<int>();
  cfg.embed_dim = j.at("embed_dim").get<int>();
  cfg.no_question = j.at("no_question").get<bool>();
  cfg.no_commutative = j.at("no_commutative").get<bool>();
  cfg.lowercase = j.at("lowercase").get<bool>();
  cfg.op.enable_pow = j.at("enable_pow").get<bool>();
  cfg.op.allow_self_pairs = j.at("allow_self_pairs").get<bool>();
  cfg.op.max_steps = j.at("max_steps").get<int>();
  cfg.seed = j.at("seed").get<uint64_t>();
  cfg.op.constants.clear();
  for (const auto& c : j.at("constants")) {
    auto r = Rational::parse(c.get<std::string>());
    if (!r) throw std::runtime_error("bad constant in config: " + c.dump());
    cfg.op.constants.push_back(*r);
  }
  return cfg;
}

void Model::save(const std::string& ckpt_path) const {
  save_checkpoint(ckpt_path, config_echo().dump(), store);
  vocab.save(ckpt_path + ".vocab");
}

Model Model::load(const std::string& ckpt_path) {
  CheckpointData data = load_checkpoint(ckpt_path);
  json j = json::parse(data.config_json, nullptr, false);
  if (j.is_discarded()) {
    throw std::runtime_error("checkpoint has a corrupt config echo");
  }
  ModelConfig cfg = model_config_from_json(j);
  Vocabulary vocab = Vocabulary::load(ckpt_path + ".vocab");
  if (vocab.size() != j.at("vocab_size").get<int>()) {
    throw std::runtime_error("vocabulary size does not match checkpoint");
  }
  Model m = Model::build(cfg, std::move(vocab));
  restore_parameters(m.store, data);
  return m;
}

}  // namespace mwp
