#pragma once

#include <string>
#include <vector>

#include "autodiff/module.hpp"
#include "common/io.hpp"

BNAS_NS_BEGIN

// Checkpoint container, all integers little-endian:
//
//   magic   8 bytes  "BNASCKPT"
//   version u32      1
//   count   u32      number of entries
//   entry * count:
//     name_len u32, name bytes (UTF-8, no terminator)
//     dims     4 x u32 (n, c, h, w)
//     payload  n*c*h*w x IEEE-754 binary32
//   meta_count u32
//   meta * meta_count:
//     key_len u32, key bytes, value_len u32, value bytes
//
// Values are stored as binary32 whatever the in-memory precision. The
// metadata block carries provenance strings (config hash, seed, ...).

struct NamedTensor {
  std::string name;
  Tensor tensor;
};

inline constexpr char kCheckpointMagic[8] = {'B', 'N', 'A', 'S', 'C', 'K', 'P', 'T'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

using Metadata = std::vector<std::pair<std::string, std::string>>;

void write_checkpoint(const std::string& path, const std::vector<NamedTensor>& entries, const Metadata& meta = {});
std::vector<NamedTensor> read_checkpoint(const std::string& path, Metadata* meta = nullptr);

void write_metadata(ByteWriter& out, const Metadata& meta);
Metadata read_metadata(ByteReader& in);

/// Parameters then buffers, under their collected names.
std::vector<NamedTensor> snapshot(const StateList& state);
/// Copies entries into `state`; every name must be present with a matching shape.
void restore(const StateList& state, const std::vector<NamedTensor>& entries);

BNAS_NS_END
