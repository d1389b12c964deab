#include "data/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numeric>

#include "common/error.hpp"
#include "common/io.hpp"

BNAS_NS_BEGIN

std::string hex64(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i, v >>= 4) s[i] = digits[v & 0xf];
  return s;
}

namespace {

std::string digest_of(const std::string& path, const std::vector<unsigned char>& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return std::filesystem::path(path).filename().string() + ":" + hex64(h);
}

void append_cifar(const std::string& path, const std::vector<unsigned char>& bytes, ImageSet& out) {
  if (bytes.empty() || bytes.size() % kCifarRecordBytes != 0) {
    const std::size_t whole = bytes.size() / kCifarRecordBytes;
    throw IoError(path + ": truncated CIFAR-10 batch, " + std::to_string(bytes.size()) +
                  " bytes is not a positive multiple of " + std::to_string(kCifarRecordBytes) +
                  "; incomplete record starts at byte offset " + std::to_string(whole * kCifarRecordBytes));
  }
  const std::size_t records = bytes.size() / kCifarRecordBytes;
  for (std::size_t r = 0; r < records; ++r) {
    const unsigned char* rec = bytes.data() + r * kCifarRecordBytes;
    if (rec[0] > 9)
      throw IoError(path + ": label " + std::to_string(rec[0]) + " out of range at byte offset " +
                    std::to_string(r * kCifarRecordBytes));
    out.labels.push_back(rec[0]);
    out.pixels.insert(out.pixels.end(), rec + 1, rec + kCifarRecordBytes);
  }
}

}  // namespace

void read_cifar10_batch(const std::string& path, ImageSet& out) {
  append_cifar(path, ByteReader::read_file(path), out);
}

Dataset load_cifar10(const std::string& dir) {
  Dataset d;
  d.name = "cifar10";
  d.mean.assign(std::begin(kCifarMean), std::end(kCifarMean));
  d.stddev.assign(std::begin(kCifarStd), std::end(kCifarStd));
  auto load = [&](const std::string& file, ImageSet& set) {
    const std::string path = (std::filesystem::path(dir) / file).string();
    if (!std::filesystem::exists(path)) throw IoError(path + ": missing CIFAR-10 batch file");
    auto bytes = ByteReader::read_file(path);
    append_cifar(path, bytes, set);
    d.digests.push_back(digest_of(path, bytes));
  };
  for (int i = 1; i <= 5; ++i) load("data_batch_" + std::to_string(i) + ".bin", d.train);
  load("test_batch.bin", d.test);
  return d;
}

void read_idx_images(const std::string& path, ImageSet& out, int channels, int size) {
  ByteReader in = ByteReader::open(path);
  const std::uint32_t magic = in.u32_be();
  if (magic != kIdxImagesMagic)
    throw ParseError(path + ": bad IDX image magic, expected 0x00000803, got 0x" + hex64(magic).substr(8));
  const std::uint32_t count = in.u32_be(), rows = in.u32_be(), cols = in.u32_be();
  if (rows > static_cast<std::uint32_t>(size) || cols > static_cast<std::uint32_t>(size))
    throw ParseError(path + ": " + std::to_string(rows) + "x" + std::to_string(cols) + " images do not fit " +
                     std::to_string(size) + "x" + std::to_string(size));
  out.channels = channels;
  out.height = out.width = size;
  const int top = (size - static_cast<int>(rows)) / 2, left = (size - static_cast<int>(cols)) / 2;
  std::vector<std::uint8_t> img(static_cast<std::size_t>(rows) * cols);
  for (std::uint32_t i = 0; i < count; ++i) {
    in.bytes(img.data(), img.size());
    const std::size_t base = out.pixels.size();
    out.pixels.resize(base + out.record_bytes(), 0);
    for (int c = 0; c < channels; ++c)
      for (std::uint32_t y = 0; y < rows; ++y)
        for (std::uint32_t x = 0; x < cols; ++x)
          out.pixels[base + (static_cast<std::size_t>(c) * size + top + y) * size + left + x] = img[y * cols + x];
  }
  if (!in.at_end()) throw ParseError(path + ": trailing bytes at offset " + std::to_string(in.offset()));
}

void read_idx_labels(const std::string& path, std::vector<int>& labels) {
  ByteReader in = ByteReader::open(path);
  const std::uint32_t magic = in.u32_be();
  if (magic != kIdxLabelsMagic)
    throw ParseError(path + ": bad IDX label magic, expected 0x00000801, got 0x" + hex64(magic).substr(8));
  const std::uint32_t count = in.u32_be();
  for (std::uint32_t i = 0; i < count; ++i) {
    unsigned char b;
    in.bytes(&b, 1);
    if (b > 9) throw ParseError(path + ": label out of range at byte offset " + std::to_string(in.offset() - 1));
    labels.push_back(b);
  }
  if (!in.at_end()) throw ParseError(path + ": trailing bytes at offset " + std::to_string(in.offset()));
}

Dataset load_mnist(const std::string& dir, int channels, int size) {
  Dataset d;
  d.name = "mnist";
  d.mean.assign(channels, kMnistMean);
  d.stddev.assign(channels, kMnistStd);
  auto path = [&](const char* f) { return (std::filesystem::path(dir) / f).string(); };
  auto pair = [&](const char* images, const char* labels, ImageSet& set) {
    read_idx_images(path(images), set, channels, size);
    read_idx_labels(path(labels), set.labels);
    if (set.labels.size() * set.record_bytes() != set.pixels.size())
      throw ParseError(std::string(images) + " and " + labels + " disagree on the record count");
    for (const char* f : {images, labels}) d.digests.push_back(digest_of(path(f), ByteReader::read_file(path(f))));
  };
  pair("train-images-idx3-ubyte", "train-labels-idx1-ubyte", d.train);
  pair("t10k-images-idx3-ubyte", "t10k-labels-idx1-ubyte", d.test);
  return d;
}

Dataset synthetic_dataset(std::size_t train_size, std::size_t test_size, std::uint64_t seed, int num_classes,
                          int size) {
  BNAS_EXPECT(num_classes >= 1 && size >= 1, ContractViolation, "synthetic dataset: bad geometry");
  Dataset d;
  d.name = "synthetic";
  d.num_classes = num_classes;
  d.mean.assign(3, 0.5);
  d.stddev.assign(3, 0.25);
  // Each class is a colour-tinted oriented grating; samples add phase jitter and noise.
  auto fill = [&](ImageSet& set, std::size_t n, const char* stream) {
    Rng rng(seed, stream);
    set.height = set.width = size;
    set.pixels.resize(n * set.record_bytes());
    for (std::size_t i = 0; i < n; ++i) {
      const int label = static_cast<int>(i % num_classes);
      set.labels.push_back(label);
      const double angle = 3.14159265358979 * label / num_classes;
      const double freq = 0.25 + 0.05 * (label % 3);
      const double phase = rng.uniform(0, 6.283);
      for (int c = 0; c < 3; ++c) {
        const double tint = 0.6 + 0.4 * std::cos(label * 1.7 + c * 2.1);
        for (int y = 0; y < size; ++y)
          for (int x = 0; x < size; ++x) {
            const double v = std::sin(freq * (x * std::cos(angle) + y * std::sin(angle)) + phase);
            double p = 128 + 90 * tint * v + 30 * rng.normal();
            set.pixels[i * set.record_bytes() + (c * size + y) * size + x] =
                static_cast<std::uint8_t>(std::clamp(p, 0.0, 255.0));
          }
      }
    }
  };
  fill(d.train, train_size, "synthetic-train");
  fill(d.test, test_size, "synthetic-test");
  return d;
}

Dataset subset(const Dataset& d, std::size_t train_n, std::size_t test_n, std::uint64_t seed) {
  Dataset out = d;
  auto pick = [&](const ImageSet& src, ImageSet& dst, std::size_t n, const char* stream) {
    if (n == 0 || n >= src.size()) return;
    std::vector<std::size_t> idx(src.size());
    std::iota(idx.begin(), idx.end(), 0);
    Rng(seed, stream).shuffle(idx.begin(), idx.end());
    idx.resize(n);
    dst.pixels.clear();
    dst.labels.clear();
    for (std::size_t i : idx) {
      dst.labels.push_back(src.labels[i]);
      dst.pixels.insert(dst.pixels.end(), src.image(i), src.image(i) + src.record_bytes());
    }
  };
  pick(d.train, out.train, train_n, "subset-train");
  pick(d.test, out.test, test_n, "subset-test");
  return out;
}

Batch make_batch(const Dataset& d, const ImageSet& set, std::span<const std::size_t> indices, const Augment& aug,
                 Rng* rng) {
  const int c = set.channels, h = set.height, w = set.width;
  Batch b{Tensor({static_cast<int>(indices.size()), c, h, w}), {}};
  std::vector<real> scale(c), shift(c);
  for (int ch = 0; ch < c; ++ch) {
    scale[ch] = static_cast<real>(1.0 / (255.0 * d.stddev[ch]));
    shift[ch] = static_cast<real>(d.mean[ch] / d.stddev[ch]);
  }
  for (std::size_t k = 0; k < indices.size(); ++k) {
    const std::size_t i = indices[k];
    BNAS_EXPECT(i < set.size(), ContractViolation, "batch index out of range");
    b.labels.push_back(set.labels[i]);
    int dy = 0, dx = 0;
    bool flip = false;
    if (aug.enabled && rng) {
      dy = static_cast<int>(rng->below(2 * aug.pad + 1)) - aug.pad;
      dx = static_cast<int>(rng->below(2 * aug.pad + 1)) - aug.pad;
      flip = aug.flip && rng->coin();
    }
    const std::uint8_t* src = set.image(i);
    real* dst = b.images.data() + k * set.record_bytes();
    for (int ch = 0; ch < c; ++ch)
      for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
          const int sy = y + dy, sx0 = flip ? w - 1 - x : x, sx = sx0 + dx;
          // Out-of-image pixels are the zero-padded border (0 before normalisation).
          const real raw = (sy >= 0 && sy < h && sx >= 0 && sx < w) ? src[(ch * h + sy) * w + sx] : 0;
          dst[(ch * h + y) * w + x] = raw * scale[ch] - shift[ch];
        }
  }
  return b;
}

SearchSplit search_split(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  Rng(seed, "split").shuffle(idx.begin(), idx.end());
  SearchSplit s;
  s.train.assign(idx.begin(), idx.begin() + n / 2);
  s.val.assign(idx.begin() + n / 2, idx.end());
  return s;
}

BNAS_NS_END
