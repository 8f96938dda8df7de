#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "attnkit/model.hpp"

namespace attnkit {

struct CheckpointError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Binary checkpoint layout (all integers little-endian u32, floats
// little-endian f64):
//   magic "ATNK" | version | config block (length-prefixed key=value
//   lines) | param count | per-param records (name length + bytes, rank,
//   dims, payload) | CRC-32 of all preceding bytes.
inline constexpr std::uint32_t kCheckpointVersion = 1;

std::uint32_t crc32(const std::uint8_t* data, std::size_t len, std::uint32_t seed = 0);

std::vector<std::uint8_t> serialize_checkpoint(const Model& model);
void save_checkpoint(const std::string& path, const Model& model);

// Validates magic, version and CRC, then checks that parameter names and
// shapes match the rebuilt model before copying values in. Every mismatch
// raises a distinct CheckpointError naming the offender.
Model deserialize_checkpoint(const std::vector<std::uint8_t>& bytes);
Model load_checkpoint(const std::string& path);

}  // namespace attnkit
