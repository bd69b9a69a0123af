#include "mwp/optim.hpp"

#include <cmath>
#include <stdexcept>

namespace mwp {

void Adam::step(ParameterStore& store) {
  if (m_.empty()) {
    m_.resize(store.size());
    v_.resize(store.size());
    for (size_t i = 0; i < store.size(); ++i) {
      size_t n = store.at(static_cast<int>(i)).value.data.size();
      m_[i].assign(n, 0.0);
      v_[i].assign(n, 0.0);
    }
  } else if (m_.size() != store.size()) {
    throw std::logic_error("adam: parameter count changed");
  }
  ++t_;
  double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (size_t i = 0; i < store.size(); ++i) {
    Parameter& p = store.at(static_cast<int>(i));
    double* val = p.value.data.data();
    const double* grd = p.grad.data.data();
    double* m = m_[i].data();
    double* v = v_[i].data();
    size_t n = p.value.data.size();
    for (size_t k = 0; k < n; ++k) {
      double gk = grd[k];
      if (!std::isfinite(gk)) {
        throw std::runtime_error("adam: non-finite gradient in " + p.name);
      }
      m[k] = beta1_ * m[k] + (1.0 - beta1_) * gk;
      v[k] = beta2_ * v[k] + (1.0 - beta2_) * gk * gk;
      double mhat = m[k] / bc1;
      double vhat = v[k] / bc2;
      val[k] -= lr_ * mhat / (std::sqrt(vhat) + eps_);
    }
  }
}

void Adam::reset() {
  t_ = 0;
  m_.clear();
  v_.clear();
}

}  // namespace mwp
