#pragma once

#include <string>

#include "json.hpp"

#include "mwp/decoder.hpp"
#include "mwp/encoder.hpp"
#include "mwp/tensor.hpp"
#include "mwp/types.hpp"
#include "mwp/vocab.hpp"

namespace mwp {

struct ModelConfig {
  int hidden = 64;
  int embed_dim = 64;
  bool no_question = false;
  bool no_commutative = false;
  bool lowercase = true;
  OperatorConfig op;
  uint64_t seed = 1;
};

// Full parameter set: encoder first, decoder second, registration order
// fixed so a seed pins every initial value and the checkpoint layout.
struct Model {
  ModelConfig cfg;
  Vocabulary vocab;
  ParameterStore store;
  DeskEncoder encoder;
  Decoder decoder;

  static Model build(const ModelConfig& cfg, Vocabulary vocab);

  EncodedInput prepare(const Problem& p) const;

  nlohmann::json config_echo() const;

  // Writes the checkpoint and a "<path>.vocab" side file.
  void save(const std::string& ckpt_path) const;
  static Model load(const std::string& ckpt_path);
};

ModelConfig model_config_from_json(const nlohmann::json& j);

}  // namespace mwp
