#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "mwp/rng.hpp"

namespace mwp {

// Dense row-major tensor of 64-bit floats.
struct Tensor {
  std::vector<int> shape;
  std::vector<double> data;

  static Tensor zeros(std::vector<int> shape);
  int64_t numel() const;
  bool all_finite() const;
};

// A named learnable tensor paired with its gradient accumulator.
struct Parameter {
  std::string name;
  Tensor value;
  Tensor grad;  // same shape as value; exactly zero after reset
};

enum class Init { zeros, uniform_fan_in };

// Ordered registry of parameters. Registration order is fixed by model
// construction and defines the checkpoint layout and the optimizer state
// alignment. Initialization is driven by the store's own seeded RNG, so
// identical seeds give bitwise-identical models.
class ParameterStore {
 public:
  explicit ParameterStore(uint64_t seed) : rng_(seed) {}

  int add(const std::string& name, std::vector<int> shape, Init init);

  Parameter& at(int id) { return params_[static_cast<size_t>(id)]; }
  const Parameter& at(int id) const { return params_[static_cast<size_t>(id)]; }
  int find(const std::string& name) const;  // -1 when absent
  size_t size() const { return params_.size(); }

  void zero_grads();

 private:
  Rng rng_;
  std::vector<Parameter> params_;
  std::unordered_map<std::string, int> by_name_;
};

}  // namespace mwp
