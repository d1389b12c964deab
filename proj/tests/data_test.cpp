#include <gtest/gtest.h>

#include <fstream>
#include <set>

#include "common/error.hpp"
#include "data/dataset.hpp"
#include "support.hpp"

using namespace bnas;
using namespace testing_support;

namespace {

void write_bytes(const std::string& path, const std::vector<unsigned char>& bytes) {
  std::ofstream f(path, std::ios::binary);
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

unsigned char fixture_pixel(int record, int k) { return static_cast<unsigned char>((record * 7 + k * 3) % 256); }

// `records` CIFAR-10 records, labels record % 10 (offset by `first`).
std::vector<unsigned char> cifar_records(int first, int records) {
  std::vector<unsigned char> out;
  for (int r = first; r < first + records; ++r) {
    out.push_back(static_cast<unsigned char>(r % 10));
    for (int k = 0; k < 3072; ++k) out.push_back(fixture_pixel(r, k));
  }
  return out;
}

void write_cifar_dir(const TempDir& dir) {
  for (int i = 1; i <= 5; ++i) write_bytes(dir.file("data_batch_" + std::to_string(i) + ".bin"), cifar_records(2 * i, 2));
  write_bytes(dir.file("test_batch.bin"), cifar_records(100, 3));
}

void put_be32(std::vector<unsigned char>& out, std::uint32_t v) {
  for (int i = 3; i >= 0; --i) out.push_back(static_cast<unsigned char>(v >> (8 * i)));
}

std::vector<unsigned char> idx_images(int n, int rows, int cols, std::uint32_t magic = kIdxImagesMagic) {
  std::vector<unsigned char> out;
  put_be32(out, magic);
  put_be32(out, n);
  put_be32(out, rows);
  put_be32(out, cols);
  for (int i = 0; i < n; ++i)
    for (int p = 0; p < rows * cols; ++p) out.push_back(static_cast<unsigned char>(1 + i * 50 + p));
  return out;
}

std::vector<unsigned char> idx_labels(const std::vector<int>& labels) {
  std::vector<unsigned char> out;
  put_be32(out, kIdxLabelsMagic);
  put_be32(out, static_cast<std::uint32_t>(labels.size()));
  for (int l : labels) out.push_back(static_cast<unsigned char>(l));
  return out;
}

}  // namespace

TEST(Cifar10, ParsesFixtureRecordsExactly) {
  TempDir dir;
  write_cifar_dir(dir);
  const Dataset d = load_cifar10(dir.path().string());
  ASSERT_EQ(d.train.size(), 10u);
  ASSERT_EQ(d.test.size(), 3u);
  EXPECT_EQ(d.train.labels[0], 2);
  EXPECT_EQ(d.test.labels[2], 2);  // record 102
  // First record of the training set is record 2 of the fixture.
  for (int k = 0; k < 3072; ++k) ASSERT_EQ(d.train.image(0)[k], fixture_pixel(2, k));
  for (int k = 0; k < 3072; ++k) ASSERT_EQ(d.test.image(1)[k], fixture_pixel(101, k));
  EXPECT_EQ(d.digests.size(), 6u);
  EXPECT_EQ(d.mean[0], kCifarMean[0]);
}

TEST(Cifar10, LoadingIsBitDeterministic) {
  TempDir dir;
  write_cifar_dir(dir);
  const Dataset a = load_cifar10(dir.path().string()), b = load_cifar10(dir.path().string());
  EXPECT_EQ(a.train.pixels, b.train.pixels);
  EXPECT_EQ(a.train.labels, b.train.labels);
  EXPECT_EQ(a.digests, b.digests);
}

TEST(Cifar10, TruncatedFileCitesTheOffset) {
  TempDir dir;
  write_cifar_dir(dir);
  auto bytes = cifar_records(0, 2);
  bytes.resize(bytes.size() - 100);
  write_bytes(dir.file("data_batch_3.bin"), bytes);
  try {
    load_cifar10(dir.path().string());
    FAIL() << "expected an error";
  } catch (const IoError& e) {
    const std::string m = e.what();
    EXPECT_NE(m.find("data_batch_3.bin"), std::string::npos);
    EXPECT_NE(m.find("byte offset 3073"), std::string::npos) << m;
  }
}

TEST(Cifar10, MissingFileAndBadLabel) {
  TempDir dir;
  write_cifar_dir(dir);
  std::filesystem::remove(dir.file("test_batch.bin"));
  EXPECT_THROW(load_cifar10(dir.path().string()), IoError);
  auto bytes = cifar_records(0, 2);
  bytes[kCifarRecordBytes] = 12;
  write_bytes(dir.file("bad.bin"), bytes);
  ImageSet s;
  try {
    read_cifar10_batch(dir.file("bad.bin"), s);
    FAIL();
  } catch (const IoError& e) {
    EXPECT_NE(std::string(e.what()).find("offset 3073"), std::string::npos);
  }
}

TEST(Mnist, FixturePixelsArePaddedToCentre) {
  TempDir dir;
  write_bytes(dir.file("train-images-idx3-ubyte"), idx_images(3, 2, 2));
  write_bytes(dir.file("train-labels-idx1-ubyte"), idx_labels({4, 0, 9}));
  write_bytes(dir.file("t10k-images-idx3-ubyte"), idx_images(1, 2, 2));
  write_bytes(dir.file("t10k-labels-idx1-ubyte"), idx_labels({3}));
  const Dataset d = load_mnist(dir.path().string(), 3, 6);
  ASSERT_EQ(d.train.size(), 3u);
  EXPECT_EQ(d.train.labels, (std::vector<int>{4, 0, 9}));
  EXPECT_EQ(d.train.height, 6);
  // Image i, pixel p at (2 + p / 2, 2 + p % 2) in every channel; zero elsewhere.
  for (int i = 0; i < 3; ++i)
    for (int c = 0; c < 3; ++c)
      for (int y = 0; y < 6; ++y)
        for (int x = 0; x < 6; ++x) {
          const bool inside = y >= 2 && y < 4 && x >= 2 && x < 4;
          const int want = inside ? 1 + i * 50 + (y - 2) * 2 + (x - 2) : 0;
          ASSERT_EQ(d.train.image(i)[(c * 6 + y) * 6 + x], want);
        }
  EXPECT_EQ(d.stddev[2], kMnistStd);
}

TEST(Mnist, WrongMagicNamesExpectedAndActual) {
  TempDir dir;
  write_bytes(dir.file("img"), idx_images(1, 2, 2, 0x00000801));
  ImageSet s;
  try {
    read_idx_images(dir.file("img"), s, 1, 4);
    FAIL();
  } catch (const ParseError& e) {
    const std::string m = e.what();
    EXPECT_NE(m.find("0x00000803"), std::string::npos) << m;
    EXPECT_NE(m.find("0x00000801"), std::string::npos) << m;
  }
  write_bytes(dir.file("lab"), idx_images(1, 2, 2));
  std::vector<int> labels;
  EXPECT_THROW(read_idx_labels(dir.file("lab"), labels), ParseError);
}

TEST(Mnist, ImagesLargerThanTargetAreRejected) {
  TempDir dir;
  write_bytes(dir.file("img"), idx_images(1, 5, 5));
  ImageSet s;
  EXPECT_THROW(read_idx_images(dir.file("img"), s, 1, 4), ParseError);
}

TEST(Batches, NormalisationUsesTheDocumentedConstants) {
  Dataset d = synthetic_dataset(4, 2, 1, 10, 4);
  d.mean.assign(std::begin(kCifarMean), std::end(kCifarMean));
  d.stddev.assign(std::begin(kCifarStd), std::end(kCifarStd));
  const std::vector<std::size_t> idx{2, 0};
  Batch b = make_batch(d, d.train, idx);
  EXPECT_EQ(b.labels, (std::vector<int>{d.train.labels[2], d.train.labels[0]}));
  for (int c = 0; c < 3; ++c) {
    const double raw = d.train.image(2)[(c * 4 + 1) * 4 + 3];
    EXPECT_NEAR(b.images.at(0, c, 1, 3), (raw / 255.0 - kCifarMean[c]) / kCifarStd[c], 1e-5);
  }
}

TEST(Batches, AugmentationIsSeededAndPadsWithZeroPixels) {
  Dataset d = synthetic_dataset(8, 2, 1, 10, 8);
  const std::vector<std::size_t> idx{0, 1, 2, 3, 4, 5, 6, 7};
  Augment aug{true, 4, true};
  Rng r1(3), r2(3);
  Batch a = make_batch(d, d.train, idx, aug, &r1);
  Batch b = make_batch(d, d.train, idx, aug, &r2);
  EXPECT_EQ(a.images.vec(), b.images.vec());
  // Padded pixels normalise to -mean/std exactly.
  const real pad = static_cast<real>(-d.mean[0] / d.stddev[0]);
  bool saw_pad = false;
  for (std::size_t i = 0; i < a.images.size() / 3; ++i) saw_pad |= std::fabs(a.images[i] - pad) < 1e-6;
  EXPECT_TRUE(saw_pad);
}

TEST(Synthetic, DeterministicAndLabelled) {
  const Dataset a = synthetic_dataset(50, 20, 9, 10, 8), b = synthetic_dataset(50, 20, 9, 10, 8);
  EXPECT_EQ(a.train.pixels, b.train.pixels);
  EXPECT_EQ(a.test.labels, b.test.labels);
  for (int l : a.train.labels) {
    EXPECT_GE(l, 0);
    EXPECT_LT(l, 10);
  }
  std::set<int> classes(a.train.labels.begin(), a.train.labels.end());
  EXPECT_GT(classes.size(), 5u);
}

TEST(Subset, SeededAndBounded) {
  const Dataset d = synthetic_dataset(40, 20, 1, 10, 4);
  const Dataset a = subset(d, 10, 5, 2), b = subset(d, 10, 5, 2), all = subset(d, 0, 0, 2);
  EXPECT_EQ(a.train.size(), 10u);
  EXPECT_EQ(a.test.size(), 5u);
  EXPECT_EQ(a.train.pixels, b.train.pixels);
  EXPECT_EQ(all.train.size(), 40u);
  EXPECT_EQ(subset(d, 100, 0, 2).train.size(), 40u);
}
