#include "mwp/graph.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <stdexcept>
#include <string>

namespace mwp {

void Graph::reset(ParameterStore& store) {
  store_ = &store;
  nodes_.clear();
  value_.clear();
  varargs_.clear();
  row_memo_.clear();
  param_memo_.assign(store.size(), -1);
  backward_done_ = false;
}

int Graph::new_node(Op op, int len) {
  Node n;
  n.op = op;
  n.len = len;
  n.off = static_cast<int>(value_.size());
  value_.resize(value_.size() + static_cast<size_t>(len), 0.0);
  nodes_.push_back(n);
  return static_cast<int>(nodes_.size() - 1);
}

void Graph::check_size(int id, int want, const char* what) const {
  if (nodes_[static_cast<size_t>(id)].len != want) {
    throw std::invalid_argument(
        std::string(what) + ": size " +
        std::to_string(nodes_[static_cast<size_t>(id)].len) + " != " +
        std::to_string(want));
  }
}

int Graph::param(int param_id) {
  if (param_memo_[static_cast<size_t>(param_id)] >= 0) {
    return param_memo_[static_cast<size_t>(param_id)];
  }
  const Parameter& p = store_->at(param_id);
  int id = new_node(Op::param, static_cast<int>(p.value.data.size()));
  Node& n = nodes_.back();
  n.aux = param_id;
  std::memcpy(vptr(n), p.value.data.data(), p.value.data.size() * sizeof(double));
  param_memo_[static_cast<size_t>(param_id)] = id;
  return id;
}

int Graph::param_row(int param_id, int row) {
  int64_t key = (static_cast<int64_t>(param_id) << 32) | static_cast<uint32_t>(row);
  auto it = row_memo_.find(key);
  if (it != row_memo_.end()) return it->second;
  const Parameter& p = store_->at(param_id);
  if (p.value.shape.size() != 2) {
    throw std::invalid_argument("param_row: " + p.name + " is not 2-D");
  }
  int cols = p.value.shape[1];
  if (row < 0 || row >= p.value.shape[0]) {
    throw std::invalid_argument("param_row: row out of range in " + p.name);
  }
  int id = new_node(Op::param_row, cols);
  Node& n = nodes_.back();
  n.aux = param_id;
  n.rows = row;
  std::memcpy(vptr(n), p.value.data.data() + static_cast<size_t>(row) * cols,
              static_cast<size_t>(cols) * sizeof(double));
  row_memo_.emplace(key, id);
  return id;
}

int Graph::input(std::span<const double> values) {
  int id = new_node(Op::input, static_cast<int>(values.size()));
  std::memcpy(vptr(nodes_.back()), values.data(), values.size() * sizeof(double));
  return id;
}

int Graph::scalar_input(double v) { return input(std::span<const double>(&v, 1)); }

int Graph::matvec(int w, int rows, int cols, int x) {
  check_size(w, rows * cols, "matvec weights");
  check_size(x, cols, "matvec input");
  int id = new_node(Op::matvec, rows);
  Node& n = nodes_.back();
  n.a = w;
  n.b = x;
  n.rows = rows;
  n.cols = cols;
  const double* wv = vptr(nodes_[static_cast<size_t>(w)]);
  const double* xv = vptr(nodes_[static_cast<size_t>(x)]);
  double* out = vptr(n);
  for (int r = 0; r < rows; ++r) {
    const double* wr = wv + static_cast<size_t>(r) * cols;
    double acc = 0.0;
    for (int c = 0; c < cols; ++c) acc += wr[c] * xv[c];
    out[r] = acc;
  }
  return id;
}

int Graph::add(int a, int b) {
  int len = nodes_[static_cast<size_t>(a)].len;
  check_size(b, len, "add");
  int id = new_node(Op::add, len);
  Node& n = nodes_.back();
  n.a = a;
  n.b = b;
  const double* av = vptr(nodes_[static_cast<size_t>(a)]);
  const double* bv = vptr(nodes_[static_cast<size_t>(b)]);
  double* out = vptr(n);
  for (int i = 0; i < len; ++i) out[i] = av[i] + bv[i];
  return id;
}

int Graph::sub(int a, int b) {
  int len = nodes_[static_cast<size_t>(a)].len;
  check_size(b, len, "sub");
  int id = new_node(Op::sub, len);
  Node& n = nodes_.back();
  n.a = a;
  n.b = b;
  const double* av = vptr(nodes_[static_cast<size_t>(a)]);
  const double* bv = vptr(nodes_[static_cast<size_t>(b)]);
  double* out = vptr(n);
  for (int i = 0; i < len; ++i) out[i] = av[i] - bv[i];
  return id;
}

int Graph::mul(int a, int b) {
  int len = nodes_[static_cast<size_t>(a)].len;
  check_size(b, len, "mul");
  int id = new_node(Op::mul, len);
  Node& n = nodes_.back();
  n.a = a;
  n.b = b;
  const double* av = vptr(nodes_[static_cast<size_t>(a)]);
  const double* bv = vptr(nodes_[static_cast<size_t>(b)]);
  double* out = vptr(n);
  for (int i = 0; i < len; ++i) out[i] = av[i] * bv[i];
  return id;
}

int Graph::relu(int a) {
  int len = nodes_[static_cast<size_t>(a)].len;
  int id = new_node(Op::relu, len);
  Node& n = nodes_.back();
  n.a = a;
  const double* av = vptr(nodes_[static_cast<size_t>(a)]);
  double* out = vptr(n);
  for (int i = 0; i < len; ++i) out[i] = av[i] > 0.0 ? av[i] : 0.0;
  return id;
}

int Graph::sigmoid(int a) {
  int len = nodes_[static_cast<size_t>(a)].len;
  int id = new_node(Op::sigmoid, len);
  Node& n = nodes_.back();
  n.a = a;
  const double* av = vptr(nodes_[static_cast<size_t>(a)]);
  double* out = vptr(n);
  for (int i = 0; i < len; ++i) out[i] = 1.0 / (1.0 + std::exp(-av[i]));
  return id;
}

int Graph::tanh_(int a) {
  int len = nodes_[static_cast<size_t>(a)].len;
  int id = new_node(Op::tanh_fn, len);
  Node& n = nodes_.back();
  n.a = a;
  const double* av = vptr(nodes_[static_cast<size_t>(a)]);
  double* out = vptr(n);
  for (int i = 0; i < len; ++i) out[i] = std::tanh(av[i]);
  return id;
}

int Graph::affine(int a, double scale, double shift) {
  int len = nodes_[static_cast<size_t>(a)].len;
  int id = new_node(Op::affine, len);
  Node& n = nodes_.back();
  n.a = a;
  n.alpha = scale;
  n.beta = shift;
  const double* av = vptr(nodes_[static_cast<size_t>(a)]);
  double* out = vptr(n);
  for (int i = 0; i < len; ++i) out[i] = scale * av[i] + shift;
  return id;
}

int Graph::dot(int a, int b) {
  int len = nodes_[static_cast<size_t>(a)].len;
  check_size(b, len, "dot");
  int id = new_node(Op::dot, 1);
  Node& n = nodes_.back();
  n.a = a;
  n.b = b;
  const double* av = vptr(nodes_[static_cast<size_t>(a)]);
  const double* bv = vptr(nodes_[static_cast<size_t>(b)]);
  double acc = 0.0;
  for (int i = 0; i < len; ++i) acc += av[i] * bv[i];
  *vptr(n) = acc;
  return id;
}

int Graph::concat(int a, int b) {
  int la = nodes_[static_cast<size_t>(a)].len;
  int lb = nodes_[static_cast<size_t>(b)].len;
  int id = new_node(Op::concat, la + lb);
  Node& n = nodes_.back();
  n.a = a;
  n.b = b;
  std::memcpy(vptr(n), vptr(nodes_[static_cast<size_t>(a)]),
              static_cast<size_t>(la) * sizeof(double));
  std::memcpy(vptr(n) + la, vptr(nodes_[static_cast<size_t>(b)]),
              static_cast<size_t>(lb) * sizeof(double));
  return id;
}

int Graph::sum_of(std::span<const int> ids) {
  if (ids.empty()) throw std::invalid_argument("sum_of: empty list");
  int len = nodes_[static_cast<size_t>(ids[0])].len;
  for (int v : ids) check_size(v, len, "sum_of");
  int id = new_node(Op::sum_many, len);
  Node& n = nodes_.back();
  n.vidx = static_cast<int>(varargs_.size());
  n.vcount = static_cast<int>(ids.size());
  varargs_.insert(varargs_.end(), ids.begin(), ids.end());
  double* out = vptr(n);
  std::memcpy(out, vptr(nodes_[static_cast<size_t>(ids[0])]),
              static_cast<size_t>(len) * sizeof(double));
  for (size_t k = 1; k < ids.size(); ++k) {
    const double* src = vptr(nodes_[static_cast<size_t>(ids[k])]);
    for (int i = 0; i < len; ++i) out[i] += src[i];
  }
  return id;
}

int Graph::mean_of(std::span<const int> ids) {
  int s = sum_of(ids);
  return affine(s, 1.0 / static_cast<double>(ids.size()), 0.0);
}

int Graph::max_of(std::span<const int> scalar_ids) {
  if (scalar_ids.empty()) throw std::invalid_argument("max_of: empty list");
  for (int v : scalar_ids) check_size(v, 1, "max_of");
  int id = new_node(Op::max_many, 1);
  Node& n = nodes_.back();
  n.vidx = static_cast<int>(varargs_.size());
  n.vcount = static_cast<int>(scalar_ids.size());
  varargs_.insert(varargs_.end(), scalar_ids.begin(), scalar_ids.end());
  int best = 0;
  double bestv = *vptr(nodes_[static_cast<size_t>(scalar_ids[0])]);
  for (size_t k = 1; k < scalar_ids.size(); ++k) {
    double v = *vptr(nodes_[static_cast<size_t>(scalar_ids[k])]);
    if (v > bestv) {
      bestv = v;
      best = static_cast<int>(k);
    }
  }
  n.aux = best;
  *vptr(n) = bestv;
  return id;
}

int Graph::size_of(int id) const { return nodes_[static_cast<size_t>(id)].len; }

double Graph::value0(int id) const {
  return value_[static_cast<size_t>(nodes_[static_cast<size_t>(id)].off)];
}

std::span<const double> Graph::value(int id) const {
  const Node& n = nodes_[static_cast<size_t>(id)];
  return {value_.data() + n.off, static_cast<size_t>(n.len)};
}

std::span<const double> Graph::grad_of(int id) const {
  const Node& n = nodes_[static_cast<size_t>(id)];
  return {grad_.data() + n.off, static_cast<size_t>(n.len)};
}

int Graph::argmax_of(int max_node) const {
  return nodes_[static_cast<size_t>(max_node)].aux;
}

bool Graph::all_finite() const {
  for (double v : value_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

void Graph::backward(int loss_id) {
  if (backward_done_) {
    throw std::logic_error("backward called twice without reset");
  }
  backward_done_ = true;
  check_size(loss_id, 1, "backward loss");
  grad_.assign(value_.size(), 0.0);
  grad_[static_cast<size_t>(nodes_[static_cast<size_t>(loss_id)].off)] = 1.0;

  for (int i = static_cast<int>(nodes_.size()) - 1; i >= 0; --i) {
    Node& n = nodes_[static_cast<size_t>(i)];
    const double* g = grad_.data() + n.off;
    switch (n.op) {
      case Op::param: {
        double* pg = store_->at(n.aux).grad.data.data();
        for (int k = 0; k < n.len; ++k) pg[k] += g[k];
        break;
      }
      case Op::param_row: {
        Parameter& p = store_->at(n.aux);
        double* pg = p.grad.data.data() +
                     static_cast<size_t>(n.rows) * p.value.shape[1];
        for (int k = 0; k < n.len; ++k) pg[k] += g[k];
        break;
      }
      case Op::input:
        break;
      case Op::matvec: {
        const Node& wn = nodes_[static_cast<size_t>(n.a)];
        const Node& xn = nodes_[static_cast<size_t>(n.b)];
        const double* wv = value_.data() + wn.off;
        const double* xv = value_.data() + xn.off;
        double* gw = grad_.data() + wn.off;
        double* gx = grad_.data() + xn.off;
        for (int r = 0; r < n.rows; ++r) {
          double gr = g[r];
          if (gr == 0.0) continue;
          double* gwr = gw + static_cast<size_t>(r) * n.cols;
          const double* wr = wv + static_cast<size_t>(r) * n.cols;
          for (int c = 0; c < n.cols; ++c) {
            gwr[c] += gr * xv[c];
            gx[c] += gr * wr[c];
          }
        }
        break;
      }
      case Op::add: {
        double* ga = grad_.data() + nodes_[static_cast<size_t>(n.a)].off;
        double* gb = grad_.data() + nodes_[static_cast<size_t>(n.b)].off;
        for (int k = 0; k < n.len; ++k) {
          ga[k] += g[k];
          gb[k] += g[k];
        }
        break;
      }
      case Op::sub: {
        double* ga = grad_.data() + nodes_[static_cast<size_t>(n.a)].off;
        double* gb = grad_.data() + nodes_[static_cast<size_t>(n.b)].off;
        for (int k = 0; k < n.len; ++k) {
          ga[k] += g[k];
          gb[k] -= g[k];
        }
        break;
      }
      case Op::mul: {
        const double* av = value_.data() + nodes_[static_cast<size_t>(n.a)].off;
        const double* bv = value_.data() + nodes_[static_cast<size_t>(n.b)].off;
        double* ga = grad_.data() + nodes_[static_cast<size_t>(n.a)].off;
        double* gb = grad_.data() + nodes_[static_cast<size_t>(n.b)].off;
        for (int k = 0; k < n.len; ++k) {
          ga[k] += g[k] * bv[k];
          gb[k] += g[k] * av[k];
        }
        break;
      }
      case Op::relu: {
        const double* av = value_.data() + nodes_[static_cast<size_t>(n.a)].off;
        double* ga = grad_.data() + nodes_[static_cast<size_t>(n.a)].off;
        for (int k = 0; k < n.len; ++k) {
          if (av[k] > 0.0) ga[k] += g[k];
        }
        break;
      }
      case Op::sigmoid: {
        const double* yv = value_.data() + n.off;
        double* ga = grad_.data() + nodes_[static_cast<size_t>(n.a)].off;
        for (int k = 0; k < n.len; ++k) {
          ga[k] += g[k] * yv[k] * (1.0 - yv[k]);
        }
        break;
      }
      case Op::tanh_fn: {
        const double* yv = value_.data() + n.off;
        double* ga = grad_.data() + nodes_[static_cast<size_t>(n.a)].off;
        for (int k = 0; k < n.len; ++k) {
          ga[k] += g[k] * (1.0 - yv[k] * yv[k]);
        }
        break;
      }
      case Op::affine: {
        double* ga = grad_.data() + nodes_[static_cast<size_t>(n.a)].off;
        for (int k = 0; k < n.len; ++k) ga[k] += g[k] * n.alpha;
        break;
      }
      case Op::dot: {
        const Node& an = nodes_[static_cast<size_t>(n.a)];
        const Node& bn = nodes_[static_cast<size_t>(n.b)];
        const double* av = value_.data() + an.off;
        const double* bv = value_.data() + bn.off;
        double* ga = grad_.data() + an.off;
        double* gb = grad_.data() + bn.off;
        double g0 = g[0];
        for (int k = 0; k < an.len; ++k) {
          ga[k] += g0 * bv[k];
          gb[k] += g0 * av[k];
        }
        break;
      }
      case Op::concat: {
        const Node& an = nodes_[static_cast<size_t>(n.a)];
        const Node& bn = nodes_[static_cast<size_t>(n.b)];
        double* ga = grad_.data() + an.off;
        double* gb = grad_.data() + bn.off;
        for (int k = 0; k < an.len; ++k) ga[k] += g[k];
        for (int k = 0; k < bn.len; ++k) gb[k] += g[an.len + k];
        break;
      }
      case Op::sum_many: {
        for (int j = 0; j < n.vcount; ++j) {
          int src = varargs_[static_cast<size_t>(n.vidx + j)];
          double* gs = grad_.data() + nodes_[static_cast<size_t>(src)].off;
          for (int k = 0; k < n.len; ++k) gs[k] += g[k];
        }
        break;
      }
      case Op::max_many: {
        int src = varargs_[static_cast<size_t>(n.vidx + n.aux)];
        grad_[static_cast<size_t>(nodes_[static_cast<size_t>(src)].off)] += g[0];
        break;
      }
    }
  }
}

}  // namespace mwp
