#include "mwp/layers.hpp"

#include <stdexcept>

namespace mwp {

Mlp Mlp::build(ParameterStore& store, const std::string& name,
               const MlpSpec& spec) {
  if (spec.hidden_layers < 1 || spec.input_dim < 1 || spec.hidden_dim < 1 ||
      spec.output_dim < 1) {
    throw std::invalid_argument("mlp " + name + ": bad spec");
  }
  Mlp m;
  m.name_ = name;
  m.spec_ = spec;
  int in = spec.input_dim;
  for (int k = 0; k < spec.hidden_layers; ++k) {
    std::string tag = name + ".w" + std::to_string(k);
    m.w_.push_back(store.add(tag, {spec.hidden_dim, in}, Init::uniform_fan_in));
    m.b_.push_back(store.add(name + ".b" + std::to_string(k),
                             {spec.hidden_dim}, Init::zeros));
    in = spec.hidden_dim;
  }
  int last = spec.hidden_layers;
  m.w_.push_back(store.add(name + ".w" + std::to_string(last),
                           {spec.output_dim, in}, Init::uniform_fan_in));
  m.b_.push_back(store.add(name + ".b" + std::to_string(last),
                           {spec.output_dim}, Init::zeros));
  return m;
}

int Mlp::forward(Graph& g, int x) const {
  if (g.size_of(x) != spec_.input_dim) {
    throw std::invalid_argument("mlp " + name_ + ": input size " +
                                std::to_string(g.size_of(x)) + " != " +
                                std::to_string(spec_.input_dim));
  }
  int h = x;
  for (int k = 0; k < spec_.hidden_layers; ++k) {
    int rows = spec_.hidden_dim;
    int cols = k == 0 ? spec_.input_dim : spec_.hidden_dim;
    h = g.relu(g.add(g.matvec(g.param(w_[static_cast<size_t>(k)]), rows, cols, h),
                     g.param(b_[static_cast<size_t>(k)])));
  }
  int k = spec_.hidden_layers;
  return g.add(g.matvec(g.param(w_[static_cast<size_t>(k)]), spec_.output_dim,
                        spec_.hidden_dim, h),
               g.param(b_[static_cast<size_t>(k)]));
}

GruCell GruCell::build(ParameterStore& store, const std::string& name,
                       const GruCellSpec& spec) {
  if (spec.input_dim < 1 || spec.hidden_dim < 1) {
    throw std::invalid_argument("gru " + name + ": bad spec");
  }
  GruCell c;
  c.name_ = name;
  c.spec_ = spec;
  auto mat_in = [&](const char* tag) {
    return store.add(name + "." + tag, {spec.hidden_dim, spec.input_dim},
                     Init::uniform_fan_in);
  };
  auto mat_h = [&](const char* tag) {
    return store.add(name + "." + tag, {spec.hidden_dim, spec.hidden_dim},
                     Init::uniform_fan_in);
  };
  auto bias = [&](const char* tag) {
    return store.add(name + "." + tag, {spec.hidden_dim}, Init::zeros);
  };
  c.wz_ = mat_in("wz");
  c.uz_ = mat_h("uz");
  c.bz_ = bias("bz");
  c.wr_ = mat_in("wr");
  c.ur_ = mat_h("ur");
  c.br_ = bias("br");
  c.wn_ = mat_in("wn");
  c.un_ = mat_h("un");
  c.bn_ = bias("bn");
  return c;
}

int GruCell::forward(Graph& g, int x, int h) const {
  if (g.size_of(x) != spec_.input_dim || g.size_of(h) != spec_.hidden_dim) {
    throw std::invalid_argument("gru " + name_ + ": shape mismatch");
  }
  int in = spec_.input_dim;
  int hd = spec_.hidden_dim;
  int z = g.sigmoid(g.add(g.add(g.matvec(g.param(wz_), hd, in, x),
                                g.matvec(g.param(uz_), hd, hd, h)),
                          g.param(bz_)));
  int r = g.sigmoid(g.add(g.add(g.matvec(g.param(wr_), hd, in, x),
                                g.matvec(g.param(ur_), hd, hd, h)),
                          g.param(br_)));
  int n = g.tanh_(g.add(g.add(g.matvec(g.param(wn_), hd, in, x),
                              g.matvec(g.param(un_), hd, hd, g.mul(r, h))),
                        g.param(bn_)));
  // h' = z*h + (1-z)*n
  return g.add(g.mul(z, h), g.mul(g.affine(z, -1.0, 1.0), n));
}

}  // namespace mwp
