#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ease/model.h"

namespace ease {

// Binary layout:
//   "EASE1"
//   uint32 LE: d_s, d_e, |vocab|, |entities|, flags
//   float64 LE row-major: token_emb, entity_emb, projection (d_s x d_e)
//   uint32 LE CRC-32 of every preceding byte
// The training head is never written.
inline constexpr char kCheckpointMagic[] = "EASE1";

enum CheckpointFlags : std::uint32_t {
  kFlagPretrainedEntities = 1u << 0,
};

std::vector<unsigned char> serialize_checkpoint(const ModelParams& params);
ModelParams deserialize_checkpoint(const std::vector<unsigned char>& bytes);

void save_checkpoint(const ModelParams& params, const std::string& path);
ModelParams load_checkpoint(const std::string& path);

}  // namespace ease
