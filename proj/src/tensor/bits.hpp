#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "tensor/tensor.hpp"

BNAS_NS_BEGIN

using Word = std::uint64_t;
inline constexpr int kWordBits = 64;

inline int words_for(int bits) { return (bits + kWordBits - 1) / kWordBits; }

/// Mask of the logical bits in the last word of a row of `bits` bits.
inline Word tail_mask(int bits) {
  const int rem = bits % kWordBits;
  return rem == 0 ? ~Word{0} : ((Word{1} << rem) - 1);
}

/// A read-only view of one packed row. Bit i lives in word i/64 at position i%64.
struct BitRow {
  std::span<const Word> words;
  int bits = 0;
};

/// Sign planes packed one bit per element, +1 -> 1 and -1 -> 0. Each row packs
/// a contiguous run of the innermost axes (c*h*w for a 4-d tensor, i.e.
/// channel-major within a row); unused tail bits are kept at zero.
class BitTensor {
 public:
  BitTensor() = default;
  BitTensor(Shape logical, int rows, int row_bits);

  const Shape& logical_shape() const { return shape_; }
  int rows() const { return rows_; }
  int row_bits() const { return row_bits_; }
  int words_per_row() const { return words_per_row_; }
  Word pad_mask() const { return tail_mask(row_bits_); }

  BitRow row(int r) const {
    return {std::span<const Word>(words_).subspan(static_cast<std::size_t>(r) * words_per_row_,
                                                  words_per_row_),
            row_bits_};
  }
  std::span<Word> row_words(int r) {
    return std::span<Word>(words_).subspan(static_cast<std::size_t>(r) * words_per_row_, words_per_row_);
  }
  std::span<const Word> words() const { return words_; }
  std::vector<Word>& raw_words() { return words_; }

  bool bit(int r, int i) const {
    return (words_[static_cast<std::size_t>(r) * words_per_row_ + i / kWordBits] >> (i % kWordBits)) & 1u;
  }
  void set(int r, int i) {
    words_[static_cast<std::size_t>(r) * words_per_row_ + i / kWordBits] |= Word{1} << (i % kWordBits);
  }

 private:
  Shape shape_{};
  int rows_ = 0;
  int row_bits_ = 0;
  int words_per_row_ = 0;
  std::vector<Word> words_;
};

/// Bit i is 1 iff t[i] >= 0 (sign(0) = +1). Rows are the batch items.
BitTensor pack_signs(const Tensor& t);

/// Packs `rows` rows of `row_bits` consecutive values each.
BitTensor pack_sign_rows(std::span<const real> values, int rows, int row_bits, Shape logical);

/// Decodes to a tensor of +-1 values with the logical shape.
Tensor unpack(const BitTensor& b);

/// Flips every logical bit of every row; padding stays zero.
BitTensor complement(const BitTensor& b);

/// Dot product of the +-1 vectors encoded by two rows of logical length n:
/// n - 2 * popcount(a XOR b), with tail bits masked off.
int xnor_popcount_dot(BitRow a, BitRow b, int n);

BNAS_NS_END
