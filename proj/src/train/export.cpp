#include "train/export.hpp"

#include <cstring>

#include "binary/kernels.hpp"
#include "common/error.hpp"
#include "common/io.hpp"

BNAS_NS_BEGIN

std::vector<FrozenEntry> freeze(const StateList& state) {
  std::vector<FrozenEntry> out;
  for (const auto& p : state.params) {
    FrozenEntry e;
    e.name = p.name;
    e.shape = p.param->value().shape();
    if (p.param->binary) {
      BinaryWeights bw = binarize_weights(p.param->value());
      e.kind = FrozenKind::Binary;
      e.bits = std::move(bw.bits);
      e.beta = std::move(bw.beta);
    } else {
      e.values = p.param->value();
    }
    out.push_back(std::move(e));
  }
  for (const auto& b : state.buffers) {
    FrozenEntry e;
    e.name = b.name;
    e.shape = b.tensor->shape();
    e.values = *b.tensor;
    out.push_back(std::move(e));
  }
  return out;
}

void write_frozen(const std::string& path, const std::vector<FrozenEntry>& entries, const Metadata& meta) {
  ByteWriter w;
  w.bytes(kFrozenMagic, sizeof kFrozenMagic);
  w.u32(kFrozenVersion);
  w.u32(static_cast<std::uint32_t>(entries.size()));
  for (const auto& e : entries) {
    w.u32(static_cast<std::uint32_t>(e.name.size()));
    w.bytes(e.name.data(), e.name.size());
    w.u32(static_cast<std::uint32_t>(e.kind));
    for (int d : {e.shape.n, e.shape.c, e.shape.h, e.shape.w}) w.u32(static_cast<std::uint32_t>(d));
    if (e.kind == FrozenKind::Float) {
      for (real v : e.values.span()) w.f32(static_cast<float>(v));
    } else {
      w.u32(static_cast<std::uint32_t>(e.bits.words_per_row()));
      for (Word word : e.bits.words()) w.u64(word);
      for (real b : e.beta) w.f32(static_cast<float>(b));
    }
  }
  write_metadata(w, meta);
  w.save(path);
}

std::vector<FrozenEntry> read_frozen(const std::string& path, Metadata* meta) {
  ByteReader r = ByteReader::open(path);
  char magic[8];
  r.bytes(magic, sizeof magic);
  if (std::memcmp(magic, kFrozenMagic, sizeof magic) != 0) throw ParseError(path + ": not a frozen model (bad magic)");
  const std::uint32_t version = r.u32();
  if (version != kFrozenVersion)
    throw ParseError(path + ": unsupported frozen model version " + std::to_string(version));
  const std::uint32_t count = r.u32();
  std::vector<FrozenEntry> out;
  for (std::uint32_t i = 0; i < count; ++i) {
    FrozenEntry e;
    e.name.resize(r.u32());
    r.bytes(e.name.data(), e.name.size());
    const std::uint32_t kind = r.u32();
    if (kind > 1) throw ParseError(path + ": entry '" + e.name + "' has unknown kind " + std::to_string(kind));
    e.kind = static_cast<FrozenKind>(kind);
    int d[4];
    for (int& v : d) v = static_cast<int>(r.u32());
    e.shape = {d[0], d[1], d[2], d[3]};
    if (e.kind == FrozenKind::Float) {
      e.values = Tensor(e.shape);
      for (real& v : e.values.vec()) v = r.f32();
    } else {
      const int row_bits = static_cast<int>(e.shape.item());
      e.bits = BitTensor(e.shape, e.shape.n, row_bits);
      if (static_cast<int>(r.u32()) != e.bits.words_per_row())
        throw ParseError(path + ": entry '" + e.name + "' has an inconsistent word count");
      for (Word& word : e.bits.raw_words()) word = r.u64();
      for (int f = 0; f < e.shape.n; ++f)
        if (e.bits.row_words(f).back() & ~e.bits.pad_mask())
          throw ParseError(path + ": entry '" + e.name + "' has nonzero padding bits");
      e.beta.resize(e.shape.n);
      for (real& b : e.beta) b = r.f32();
    }
    out.push_back(std::move(e));
  }
  Metadata m = read_metadata(r);
  if (meta) *meta = std::move(m);
  if (!r.at_end()) throw ParseError(path + ": trailing bytes at offset " + std::to_string(r.offset()));
  return out;
}

std::size_t frozen_payload_bytes(const std::vector<FrozenEntry>& entries) {
  std::size_t bytes = 0;
  for (const auto& e : entries)
    bytes += e.kind == FrozenKind::Float ? e.values.size() * 4
                                         : e.bits.words().size() * sizeof(Word) + e.beta.size() * 4;
  return bytes;
}

BNAS_NS_END
