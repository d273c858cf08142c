#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "proad/layers.hpp"

namespace proad {

// Binary checkpoint, little-endian:
//   "PROADCKP" | u32 version | u64 header_len | header (key = value text)
//   | u64 count | count x { u32 name_len | name | u32 rank | u64 dims[rank] | f64 data[] }
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct CheckpointData {
  std::string header;
  ParameterList tensors;

  const Tensor* find(const std::string& name) const;
};

void save_checkpoint(const std::filesystem::path& path, const std::string& header, const ParameterList& tensors);
CheckpointData load_checkpoint(const std::filesystem::path& path);

// Copies stored values into `targets` by name. Throws ConfigError naming the
// first missing tensor or shape mismatch.
void restore_parameters(const CheckpointData& checkpoint, const ParameterList& targets,
                        const std::string& name_prefix = "");

}  // namespace proad
