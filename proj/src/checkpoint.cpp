#include "mwp/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <stdexcept>

namespace mwp {

namespace {

constexpr char kMagic[4] = {'M', 'W', 'P', 'C'};

void put_u32(std::ostream& os, uint32_t v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

void put_u64(std::ostream& os, uint64_t v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

uint32_t get_u32(std::istream& is) {
  uint32_t v = 0;
  is.read(reinterpret_cast<char*>(&v), sizeof(v));
  return v;
}

uint64_t get_u64(std::istream& is) {
  uint64_t v = 0;
  is.read(reinterpret_cast<char*>(&v), sizeof(v));
  return v;
}

}  // namespace

void save_checkpoint(const std::string& path, const std::string& config_json,
                     const ParameterStore& store) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("cannot open checkpoint for write: " + path);
  os.write(kMagic, 4);
  put_u32(os, kCheckpointVersion);
  put_u64(os, config_json.size());
  os.write(config_json.data(), static_cast<std::streamsize>(config_json.size()));
  put_u64(os, store.size());
  for (size_t i = 0; i < store.size(); ++i) {
    const Parameter& p = store.at(static_cast<int>(i));
    put_u32(os, static_cast<uint32_t>(p.name.size()));
    os.write(p.name.data(), static_cast<std::streamsize>(p.name.size()));
    put_u32(os, static_cast<uint32_t>(p.value.shape.size()));
    for (int d : p.value.shape) put_u32(os, static_cast<uint32_t>(d));
    os.write(reinterpret_cast<const char*>(p.value.data.data()),
             static_cast<std::streamsize>(p.value.data.size() * sizeof(double)));
  }
  if (!os) throw std::runtime_error("checkpoint write failed: " + path);
}

CheckpointData load_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open checkpoint: " + path);
  char magic[4] = {};
  is.read(magic, 4);
  if (!is || std::memcmp(magic, kMagic, 4) != 0) {
    throw std::runtime_error("not a checkpoint file: " + path);
  }
  CheckpointData data;
  data.version = get_u32(is);
  if (data.version != kCheckpointVersion) {
    throw std::runtime_error("unsupported checkpoint version " +
                             std::to_string(data.version));
  }
  uint64_t cfg_len = get_u64(is);
  data.config_json.resize(cfg_len);
  is.read(data.config_json.data(), static_cast<std::streamsize>(cfg_len));
  uint64_t count = get_u64(is);
  for (uint64_t i = 0; i < count; ++i) {
    uint32_t name_len = get_u32(is);
    std::string name(name_len, '\0');
    is.read(name.data(), name_len);
    uint32_t ndim = get_u32(is);
    std::vector<int> shape(ndim);
    for (uint32_t d = 0; d < ndim; ++d) {
      shape[d] = static_cast<int>(get_u32(is));
    }
    Tensor t = Tensor::zeros(shape);
    is.read(reinterpret_cast<char*>(t.data.data()),
            static_cast<std::streamsize>(t.data.size() * sizeof(double)));
    if (!is) throw std::runtime_error("truncated checkpoint: " + path);
    data.params.emplace_back(std::move(name), std::move(t));
  }
  return data;
}

void restore_parameters(ParameterStore& store, const CheckpointData& data) {
  if (data.params.size() != store.size()) {
    throw std::runtime_error("checkpoint parameter count mismatch");
  }
  for (size_t i = 0; i < data.params.size(); ++i) {
    Parameter& p = store.at(static_cast<int>(i));
    const auto& [name, tensor] = data.params[i];
    if (name != p.name || tensor.shape != p.value.shape) {
      throw std::runtime_error("checkpoint mismatch at parameter " + name);
    }
    p.value.data = tensor.data;
  }
}

}  // namespace mwp
