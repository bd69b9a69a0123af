#pragma once

#include <string>
#include <vector>

#include "mwp/graph.hpp"
#include "mwp/tensor.hpp"

namespace mwp {

// Fully connected network: input -> hidden_layers x (linear + ReLU) -> output.
struct MlpSpec {
  int input_dim = 0;
  int hidden_dim = 0;
  int hidden_layers = 2;
  int output_dim = 0;
};

class Mlp {
 public:
  Mlp() = default;
  static Mlp build(ParameterStore& store, const std::string& name,
                   const MlpSpec& spec);

  // Throws std::invalid_argument naming the layer on a dimension mismatch.
  int forward(Graph& g, int x) const;

  const MlpSpec& spec() const { return spec_; }
  const std::string& name() const { return name_; }
  const std::vector<int>& weight_ids() const { return w_; }
  const std::vector<int>& bias_ids() const { return b_; }

 private:
  std::string name_;
  MlpSpec spec_;
  std::vector<int> w_;  // weight param ids, one per linear layer
  std::vector<int> b_;  // bias param ids
};

// Gated recurrent cell:
//   z = sigmoid(Wz x + Uz h + bz)
//   r = sigmoid(Wr x + Ur h + br)
//   n = tanh(Wn x + Un (r*h) + bn)
//   h' = z*h + (1-z)*n
// With all-zero weights this reduces to h' = 0.5*h.
struct GruCellSpec {
  int input_dim = 0;
  int hidden_dim = 0;
};

class GruCell {
 public:
  GruCell() = default;
  static GruCell build(ParameterStore& store, const std::string& name,
                       const GruCellSpec& spec);

  int forward(Graph& g, int x, int h) const;

  const GruCellSpec& spec() const { return spec_; }

 private:
  std::string name_;
  GruCellSpec spec_;
  int wz_ = -1, uz_ = -1, bz_ = -1;
  int wr_ = -1, ur_ = -1, br_ = -1;
  int wn_ = -1, un_ = -1, bn_ = -1;
};

}  // namespace mwp
