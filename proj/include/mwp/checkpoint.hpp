#pragma once

#include <string>
#include <utility>
#include <vector>

#include "mwp/tensor.hpp"

namespace mwp {

// Binary checkpoint: magic, format version, config echo (opaque string),
// then the ordered list of named parameters with shapes and raw 64-bit
// values. Save/load round-trips are bit-exact.
inline constexpr uint32_t kCheckpointVersion = 1;

struct CheckpointData {
  uint32_t version = kCheckpointVersion;
  std::string config_json;
  std::vector<std::pair<std::string, Tensor>> params;
};

void save_checkpoint(const std::string& path, const std::string& config_json,
                     const ParameterStore& store);

// Throws std::runtime_error on I/O failure or a corrupt/unsupported file.
CheckpointData load_checkpoint(const std::string& path);

// Copies values into an already-built store; every name and shape must
// match exactly, else std::runtime_error.
void restore_parameters(ParameterStore& store, const CheckpointData& data);

}  // namespace mwp
