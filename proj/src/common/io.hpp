#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "common/error.hpp"

BNAS_NS_BEGIN

/// Little-endian binary writer into memory, flushed with save().
class ByteWriter {
 public:
  void bytes(const void* p, std::size_t n) {
    const auto* b = static_cast<const unsigned char*>(p);
    buf_.insert(buf_.end(), b, b + n);
  }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<unsigned char>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) buf_.push_back(static_cast<unsigned char>(v >> (8 * i)));
  }
  void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
  const std::vector<unsigned char>& buffer() const { return buf_; }

  void save(const std::string& path) const {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot open '" + path + "' for writing");
    f.write(reinterpret_cast<const char*>(buf_.data()), static_cast<std::streamsize>(buf_.size()));
    if (!f) throw IoError("write to '" + path + "' failed");
  }

 private:
  std::vector<unsigned char> buf_;
};

class ByteReader {
 public:
  ByteReader(std::vector<unsigned char> data, std::string name) : data_(std::move(data)), name_(std::move(name)) {}

  static ByteReader open(const std::string& path) { return ByteReader(read_file(path), path); }

  static std::vector<unsigned char> read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open '" + path + "'");
    return std::vector<unsigned char>(std::istreambuf_iterator<char>(f), {});
  }

  void bytes(void* p, std::size_t n) {
    need(n);
    std::memcpy(p, data_.data() + pos_, n);
    pos_ += n;
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(data_[pos_ + i]) << (8 * i);
    pos_ += 4;
    return v;
  }
  std::uint32_t u32_be() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v = (v << 8) | data_[pos_ + i];
    pos_ += 4;
    return v;
  }
  std::uint64_t u64() {
    std::uint64_t lo = u32();
    return lo | (static_cast<std::uint64_t>(u32()) << 32);
  }
  float f32() { return std::bit_cast<float>(u32()); }

  std::size_t offset() const { return pos_; }
  std::size_t size() const { return data_.size(); }
  bool at_end() const { return pos_ == data_.size(); }
  const unsigned char* cursor() const { return data_.data() + pos_; }
  void skip(std::size_t n) {
    need(n);
    pos_ += n;
  }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > data_.size())
      throw IoError(name_ + ": truncated at byte offset " + std::to_string(pos_) + " (need " + std::to_string(n) +
                    " more bytes, file has " + std::to_string(data_.size()) + ")");
  }

  std::vector<unsigned char> data_;
  std::string name_;
  std::size_t pos_ = 0;
};

BNAS_NS_END
