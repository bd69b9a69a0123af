#pragma once

#include <vector>

#include "mwp/tensor.hpp"

namespace mwp {

// Adam with bias correction. Moment state is allocated lazily on the first
// step and stays aligned with the store's registration order.
class Adam {
 public:
  explicit Adam(double lr, double beta1 = 0.9, double beta2 = 0.999,
                double eps = 1e-8)
      : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}

  // Applies one update from the accumulated gradients. Gradients are left
  // untouched. Throws std::runtime_error naming the parameter when a
  // gradient is non-finite.
  void step(ParameterStore& store);

  void reset();
  long steps_taken() const { return t_; }

 private:
  double lr_, beta1_, beta2_, eps_;
  long t_ = 0;
  std::vector<std::vector<double>> m_, v_;
};

}  // namespace mwp
