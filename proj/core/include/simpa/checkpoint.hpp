#pragma once

#include <map>
#include <string>

#include "simpa/maml_baseline.hpp"
#include "simpa/meta_learning.hpp"

namespace simpa {

// Checkpoint layout (little-endian):
//   magic "SIMPACK1" | u32 version | u64 iteration | u32 mode (0 simpa, 1 maml)
//   u64 config_len | config JSON bytes
//   u32 n_blocks | blocks: { u32 name_len | name | u32 ndim | u64 dims[] | f64 data[] }
struct CheckpointData {
  std::uint32_t version = 1;
  std::uint64_t iteration = 0;
  std::string mode;
  std::string config_json;
  std::map<std::string, Tensor> blocks;
};

void save_checkpoint(const std::string& path, const MetaState& state,
                     const std::string& config_json);
void save_checkpoint(const std::string& path, const MamlState& state,
                     const std::string& config_json);

CheckpointData read_checkpoint(const std::string& path);

// Rebuild full states; shapes are validated against the config-derived
// architectures and mismatches raise with the offending block name.
MetaState meta_state_from_checkpoint(const CheckpointData& data, const TrainConfig& cfg);
MamlState maml_state_from_checkpoint(const CheckpointData& data, const TrainConfig& cfg);

}  // namespace simpa
