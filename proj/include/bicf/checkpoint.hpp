#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>

#include "bicf/neural.hpp"

namespace bicf {

// Container layout:
//   "BICFCKPT" | u32 version | u64 header bytes | JSON header | f32 blocks
// All integers and floats little-endian. Blocks follow the model's tensor
// order; the header lists each block's name and shape.
inline constexpr std::uint32_t kCheckpointVersion = 1;

using CheckpointMetadata = std::map<std::string, std::string>;

struct Checkpoint {
  JointModel model;
  CheckpointMetadata metadata;
};

// Parameters are written at float precision. Call quantize_to_float() first
// if the in-memory model must equal the reloaded one.
void write_checkpoint(std::ostream& out, const JointModel& model,
                      const CheckpointMetadata& metadata = {});
void save_checkpoint(const std::filesystem::path& path, const JointModel& model,
                     const CheckpointMetadata& metadata = {});

// Throws ParseError on a corrupt or truncated container.
Checkpoint read_checkpoint(std::istream& in);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace bicf
