#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "common/rng.hpp"
#include "tensor/tensor.hpp"

BNAS_NS_BEGIN

/// Raw 8-bit images, CHW per record, plus labels.
struct ImageSet {
  int channels = 3;
  int height = 32;
  int width = 32;
  std::vector<std::uint8_t> pixels;
  std::vector<int> labels;

  std::size_t size() const { return labels.size(); }
  std::size_t record_bytes() const { return static_cast<std::size_t>(channels) * height * width; }
  const std::uint8_t* image(std::size_t i) const { return pixels.data() + i * record_bytes(); }
};

struct Dataset {
  std::string name;
  int num_classes = 10;
  ImageSet train;
  ImageSet test;
  std::vector<double> mean;    // per channel, on the [0, 1] scale
  std::vector<double> stddev;  // per channel
  std::vector<std::string> digests;  // "file:fnv1a64" per source file
};

// Normalisation constants. CIFAR-10 uses the per-channel training-set
// statistics; MNIST the usual single-channel ones, replicated per channel.
inline constexpr double kCifarMean[3] = {0.4914, 0.4822, 0.4465};
inline constexpr double kCifarStd[3] = {0.2470, 0.2435, 0.2616};
inline constexpr double kMnistMean = 0.1307;
inline constexpr double kMnistStd = 0.3081;

inline constexpr std::size_t kCifarRecordBytes = 3073;
inline constexpr std::uint32_t kIdxImagesMagic = 0x00000803;
inline constexpr std::uint32_t kIdxLabelsMagic = 0x00000801;

/// Reads data_batch_1..5.bin and test_batch.bin from `dir`.
Dataset load_cifar10(const std::string& dir);
/// Parses one CIFAR-10 binary batch file into `out` (appending).
void read_cifar10_batch(const std::string& path, ImageSet& out);

/// Reads the four IDX files from `dir`; images are zero-padded to
/// `size` x `size` and replicated to `channels` channels.
Dataset load_mnist(const std::string& dir, int channels = 3, int size = 32);
void read_idx_images(const std::string& path, ImageSet& out, int channels, int size);
void read_idx_labels(const std::string& path, std::vector<int>& labels);

/// Deterministic class-conditional toy images (3 x size x size), for smoke
/// runs and tests when no real dataset is at hand.
Dataset synthetic_dataset(std::size_t train_size, std::size_t test_size, std::uint64_t seed, int num_classes = 10,
                          int size = 32);

/// Keeps the first n records of a seeded permutation of each split (0 = keep all).
Dataset subset(const Dataset& d, std::size_t train_n, std::size_t test_n, std::uint64_t seed);

struct Batch {
  Tensor images;
  std::vector<int> labels;
};

struct Augment {
  bool enabled = false;
  int pad = 4;       // random crop from a zero-padded image
  bool flip = true;  // random horizontal flip
};

/// Normalised batch of the given records. Augmentation draws from `rng`.
Batch make_batch(const Dataset& d, const ImageSet& set, std::span<const std::size_t> indices,
                 const Augment& aug = {}, Rng* rng = nullptr);

/// Search-time split of n training records: a seeded shuffle, first half
/// for weights, second half for architecture parameters.
struct SearchSplit {
  std::vector<std::size_t> train;
  std::vector<std::size_t> val;
};
SearchSplit search_split(std::size_t n, std::uint64_t seed);

std::string hex64(std::uint64_t v);

BNAS_NS_END
