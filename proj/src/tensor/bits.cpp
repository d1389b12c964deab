#include "tensor/bits.hpp"

#include <bit>

#include "common/error.hpp"

BNAS_NS_BEGIN

BitTensor::BitTensor(Shape logical, int rows, int row_bits)
    : shape_(logical),
      rows_(rows),
      row_bits_(row_bits),
      words_per_row_(words_for(row_bits)),
      words_(static_cast<std::size_t>(rows) * words_for(row_bits), 0) {
  BNAS_EXPECT(rows >= 0 && row_bits >= 0, ContractViolation, "negative bit tensor extent");
}

BitTensor pack_sign_rows(std::span<const real> values, int rows, int row_bits, Shape logical) {
  BNAS_EXPECT(values.size() == static_cast<std::size_t>(rows) * row_bits, ContractViolation,
              "pack_sign_rows: value count does not match rows * row_bits");
  BitTensor out(logical, rows, row_bits);
  for (int r = 0; r < rows; ++r) {
    const real* src = values.data() + static_cast<std::size_t>(r) * row_bits;
    auto dst = out.row_words(r);
    for (int wi = 0; wi < out.words_per_row(); ++wi) {
      const int base = wi * kWordBits;
      const int len = std::min(kWordBits, row_bits - base);
      Word word = 0;
      for (int b = 0; b < len; ++b) word |= static_cast<Word>(src[base + b] >= real(0)) << b;
      dst[wi] = word;
    }
  }
  return out;
}

BitTensor pack_signs(const Tensor& t) {
  const Shape& s = t.shape();
  return pack_sign_rows(t.span(), s.n, static_cast<int>(s.item()), s);
}

Tensor unpack(const BitTensor& b) {
  Tensor out(b.logical_shape());
  BNAS_EXPECT(out.size() == static_cast<std::size_t>(b.rows()) * b.row_bits(), ContractViolation,
              "unpack: logical shape does not cover the packed rows");
  std::size_t k = 0;
  for (int r = 0; r < b.rows(); ++r)
    for (int i = 0; i < b.row_bits(); ++i) out[k++] = b.bit(r, i) ? real(1) : real(-1);
  return out;
}

BitTensor complement(const BitTensor& b) {
  BitTensor out = b;
  const Word mask = b.pad_mask();
  for (int r = 0; r < out.rows(); ++r) {
    auto w = out.row_words(r);
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = ~w[i];
    if (!w.empty()) w.back() &= mask;
  }
  return out;
}

int xnor_popcount_dot(BitRow a, BitRow b, int n) {
  BNAS_EXPECT(a.bits == n && b.bits == n && a.words.size() == b.words.size(), ContractViolation,
              "xnor_popcount_dot: row lengths " + std::to_string(a.bits) + " and " +
                  std::to_string(b.bits) + " do not match n = " + std::to_string(n));
  const std::size_t nw = a.words.size();
  if (nw == 0) return 0;
  int diff = 0;
  for (std::size_t i = 0; i + 1 < nw; ++i) diff += std::popcount(a.words[i] ^ b.words[i]);
  diff += std::popcount((a.words[nw - 1] ^ b.words[nw - 1]) & tail_mask(n));
  return n - 2 * diff;
}

BNAS_NS_END
