#include "autodiff/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <map>

#include "common/error.hpp"
#include "common/io.hpp"

BNAS_NS_BEGIN

void write_metadata(ByteWriter& out, const Metadata& meta) {
  out.u32(static_cast<std::uint32_t>(meta.size()));
  for (const auto& [k, v] : meta) {
    out.u32(static_cast<std::uint32_t>(k.size()));
    out.bytes(k.data(), k.size());
    out.u32(static_cast<std::uint32_t>(v.size()));
    out.bytes(v.data(), v.size());
  }
}

Metadata read_metadata(ByteReader& in) {
  Metadata meta;
  const std::uint32_t count = in.u32();
  for (std::uint32_t i = 0; i < count; ++i) {
    std::string k(in.u32(), '\0');
    in.bytes(k.data(), k.size());
    std::string v(in.u32(), '\0');
    in.bytes(v.data(), v.size());
    meta.emplace_back(std::move(k), std::move(v));
  }
  return meta;
}

void write_checkpoint(const std::string& path, const std::vector<NamedTensor>& entries, const Metadata& meta) {
  ByteWriter out;
  out.bytes(kCheckpointMagic, sizeof kCheckpointMagic);
  out.u32(kCheckpointVersion);
  out.u32(static_cast<std::uint32_t>(entries.size()));
  for (const auto& e : entries) {
    out.u32(static_cast<std::uint32_t>(e.name.size()));
    out.bytes(e.name.data(), e.name.size());
    const Shape& s = e.tensor.shape();
    for (int d : {s.n, s.c, s.h, s.w}) out.u32(static_cast<std::uint32_t>(d));
    for (real v : e.tensor.span()) out.f32(static_cast<float>(v));
  }
  write_metadata(out, meta);
  out.save(path);
}

std::vector<NamedTensor> read_checkpoint(const std::string& path, Metadata* meta) {
  ByteReader in = ByteReader::open(path);
  char magic[8];
  in.bytes(magic, sizeof magic);
  if (std::memcmp(magic, kCheckpointMagic, sizeof magic) != 0)
    throw ParseError(path + ": not a checkpoint (bad magic)");
  const std::uint32_t version = in.u32();
  if (version != kCheckpointVersion)
    throw ParseError(path + ": unsupported checkpoint version " + std::to_string(version));
  const std::uint32_t count = in.u32();
  std::vector<NamedTensor> entries;
  for (std::uint32_t i = 0; i < count; ++i) {
    NamedTensor e;
    e.name.resize(in.u32());
    in.bytes(e.name.data(), e.name.size());
    Shape s;
    s.n = static_cast<int>(in.u32());
    s.c = static_cast<int>(in.u32());
    s.h = static_cast<int>(in.u32());
    s.w = static_cast<int>(in.u32());
    e.tensor = Tensor(s);
    for (real& v : e.tensor.vec()) v = static_cast<real>(in.f32());
    entries.push_back(std::move(e));
  }
  Metadata m = read_metadata(in);
  if (meta) *meta = std::move(m);
  if (!in.at_end()) throw ParseError(path + ": trailing bytes at offset " + std::to_string(in.offset()));
  return entries;
}

std::vector<NamedTensor> snapshot(const StateList& state) {
  std::vector<NamedTensor> out;
  for (const auto& p : state.params) out.push_back({p.name, p.param->value()});
  for (const auto& b : state.buffers) out.push_back({b.name, *b.tensor});
  return out;
}

void restore(const StateList& state, const std::vector<NamedTensor>& entries) {
  std::map<std::string, const Tensor*> by_name;
  for (const auto& e : entries) by_name[e.name] = &e.tensor;
  auto load = [&](const std::string& name, Tensor& dst) {
    auto it = by_name.find(name);
    if (it == by_name.end()) throw ParseError("checkpoint is missing '" + name + "'");
    if (it->second->shape() != dst.shape())
      throw GeometryError("checkpoint entry '" + name + "' has shape " + it->second->shape().str() +
                          ", model expects " + dst.shape().str());
    dst = *it->second;
  };
  for (const auto& p : state.params) load(p.name, p.param->value());
  for (const auto& b : state.buffers) load(b.name, *b.tensor);
}

BNAS_NS_END
