#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "mwp/tensor.hpp"

namespace mwp {

struct FdReport {
  std::string param;
  double max_rel_err = 0.0;
  double max_abs_analytic = 0.0;
  double max_abs_numeric = 0.0;
  int coords_checked = 0;
  int kinks_skipped = 0;
};

struct FdOptions {
  double step = 1e-5;
  // 0 = check every coordinate; otherwise a seeded sample per parameter.
  int max_coords_per_param = 0;
  uint64_t seed = 0;
  // relative error denominator floor, keeps FD roundoff noise on
  // near-zero gradients from registering as error
  double denom_floor = 1e-5;
  // A central difference is meaningless across a ReLU/max kink. When the
  // two one-sided slopes disagree beyond kink_tol (relative), the
  // coordinate straddles a kink; with skip_kinks it is counted and
  // excluded instead of reported as error.
  bool skip_kinks = false;
  double kink_tol = 1e-2;
};

// Central-difference check of analytic gradients. `loss_fn` evaluates the
// loss without touching gradients; `loss_and_grad_fn` evaluates it and
// accumulates gradients into the store (grads are zeroed here first).
// Throws std::runtime_error when the closure is detected to be
// non-deterministic (two base evaluations disagree bitwise).
std::vector<FdReport> finite_difference_check(
    ParameterStore& store, const std::function<double()>& loss_fn,
    const std::function<double()>& loss_and_grad_fn,
    const FdOptions& opts = {});

double max_rel_err(const std::vector<FdReport>& reports);

}  // namespace mwp
