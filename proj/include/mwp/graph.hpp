#pragma once

#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

#include "mwp/tensor.hpp"

namespace mwp {

// Reverse-mode tape over flat double buffers. Ops compute values eagerly at
// node creation; backward() replays the tape in reverse and accumulates
// gradients into the bound ParameterStore. Buffers are reused across
// reset() calls, so per-pass allocation cost amortizes to zero.
//
// Everything is sequential and the reduction order is fixed, which makes
// forward values and gradients bitwise reproducible for a given seed.
class Graph {
 public:
  Graph() = default;

  // Start a fresh forward pass bound to `store`.
  void reset(ParameterStore& store);

  // --- leaves ---
  int param(int param_id);               // whole tensor, flattened; memoized
  int param_row(int param_id, int row);  // row of a 2-D parameter; memoized
  int input(std::span<const double> values);  // constant, no gradient
  int scalar_input(double v);

  // --- ops ---
  int matvec(int w, int rows, int cols, int x);
  int add(int a, int b);
  int sub(int a, int b);
  int mul(int a, int b);  // elementwise
  int relu(int a);
  int sigmoid(int a);
  int tanh_(int a);
  int affine(int a, double scale, double shift);  // scale*x + shift
  int dot(int a, int b);                          // -> size-1 node
  int concat(int a, int b);
  int sum_of(std::span<const int> ids);   // elementwise sum, equal sizes
  int mean_of(std::span<const int> ids);  // sum then scale by 1/n
  int max_of(std::span<const int> scalar_ids);  // ties resolve to the first

  // --- access ---
  int size_of(int id) const;
  double value0(int id) const;
  std::span<const double> value(int id) const;
  std::span<const double> grad_of(int id) const;  // valid after backward
  int argmax_of(int max_node) const;
  size_t node_count() const { return nodes_.size(); }
  bool all_finite() const;

  // Accumulates d(loss)/d(param) into the store. Throws std::logic_error
  // when called twice without an intervening reset().
  void backward(int loss_id);

 private:
  enum class Op : uint8_t {
    param,
    param_row,
    input,
    matvec,
    add,
    sub,
    mul,
    relu,
    sigmoid,
    tanh_fn,
    affine,
    dot,
    concat,
    sum_many,
    max_many,
  };
  struct Node {
    Op op;
    int a = -1, b = -1;
    int rows = 0, cols = 0;
    int off = 0, len = 0;
    int vidx = 0, vcount = 0;  // slice into varargs_
    double alpha = 0.0, beta = 0.0;
    int aux = 0;  // param id for leaves, argmax index for max_many
  };

  int new_node(Op op, int len);
  void check_size(int id, int want, const char* what) const;
  const double* vptr(const Node& n) const { return value_.data() + n.off; }
  double* vptr(Node& n) { return value_.data() + n.off; }

  ParameterStore* store_ = nullptr;
  std::vector<Node> nodes_;
  std::vector<double> value_;
  std::vector<double> grad_;
  std::vector<int> varargs_;
  std::vector<int> param_memo_;
  std::unordered_map<int64_t, int> row_memo_;
  bool backward_done_ = false;
};

}  // namespace mwp
