#include "mwp/tensor.hpp"

#include <cmath>
#include <stdexcept>

namespace mwp {

Tensor Tensor::zeros(std::vector<int> shape) {
  Tensor t;
  t.shape = std::move(shape);
  t.data.assign(static_cast<size_t>(t.numel()), 0.0);
  return t;
}

int64_t Tensor::numel() const {
  int64_t n = 1;
  for (int d : shape) n *= d;
  return n;
}

bool Tensor::all_finite() const {
  for (double v : data) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

int ParameterStore::add(const std::string& name, std::vector<int> shape,
                        Init init) {
  if (by_name_.count(name)) {
    throw std::invalid_argument("duplicate parameter name: " + name);
  }
  for (int d : shape) {
    if (d < 1) throw std::invalid_argument("bad shape for parameter " + name);
  }
  Parameter p;
  p.name = name;
  p.value = Tensor::zeros(shape);
  p.grad = Tensor::zeros(shape);
  if (init == Init::uniform_fan_in) {
    // fan-in = last dimension (the input side of W x, or the row width
    // of an embedding table)
    double bound = 1.0 / std::sqrt(static_cast<double>(shape.back()));
    for (double& v : p.value.data) v = rng_.uniform(-bound, bound);
  }
  int id = static_cast<int>(params_.size());
  params_.push_back(std::move(p));
  by_name_.emplace(name, id);
  return id;
}

int ParameterStore::find(const std::string& name) const {
  auto it = by_name_.find(name);
  return it == by_name_.end() ? -1 : it->second;
}

void ParameterStore::zero_grads() {
  for (auto& p : params_) {
    std::fill(p.grad.data.begin(), p.grad.data.end(), 0.0);
  }
}

}  // namespace mwp
