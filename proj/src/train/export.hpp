#pragma once

#include <string>
#include <vector>

#include "autodiff/checkpoint.hpp"
#include "tensor/bits.hpp"

BNAS_NS_BEGIN

// Frozen inference container, little-endian:
//   magic "BNASFRZN", u32 version (1), u32 entry count, then per entry
//   u32 name length, name bytes, u32 kind, u32 dims[4] (N, C, H, W), and
//   kind 0 (float):  N*C*H*W binary32 values
//   kind 1 (binary): u32 words per filter, N*words u64 sign words
//                    (bit i of filter f is weight i of f, 1 = +1, tail bits 0),
//                    then N binary32 beta scalars,
//   then the metadata block of the checkpoint container.
// Binary entries replace the float master weights; everything else
// (batchnorm, stem, classifier, running statistics) is stored as float.
inline constexpr char kFrozenMagic[8] = {'B', 'N', 'A', 'S', 'F', 'R', 'Z', 'N'};
inline constexpr std::uint32_t kFrozenVersion = 1;

enum class FrozenKind : std::uint32_t { Float = 0, Binary = 1 };

struct FrozenEntry {
  std::string name;
  FrozenKind kind = FrozenKind::Float;
  Shape shape;
  Tensor values;        // Float
  BitTensor bits;       // Binary
  std::vector<real> beta;  // Binary
};

std::vector<FrozenEntry> freeze(const StateList& state);
void write_frozen(const std::string& path, const std::vector<FrozenEntry>& entries, const Metadata& meta = {});
std::vector<FrozenEntry> read_frozen(const std::string& path, Metadata* meta = nullptr);

/// Bytes the frozen payloads occupy (weights only, headers excluded).
std::size_t frozen_payload_bytes(const std::vector<FrozenEntry>& entries);

BNAS_NS_END
