#include "binary/kernels.hpp"

#include <cmath>

#include "common/error.hpp"

BNAS_NS_BEGIN

BinaryWeights binarize_weights(const Tensor& w) {
  const Shape& s = w.shape();
  BinaryWeights out{pack_signs(w), std::vector<real>(s.n)};
  const std::size_t n = s.item();
  for (int f = 0; f < s.n; ++f) {
    double l1 = 0;
    for (std::size_t i = 0; i < n; ++i) l1 += std::fabs(static_cast<double>(w[f * n + i]));
    out.beta[f] = static_cast<real>(n ? l1 / static_cast<double>(n) : 0.0);
  }
  return out;
}

BinaryConvKernel BinaryConvKernel::from_weights(const Tensor& w, const ConvGeometry& g, int groups) {
  const Shape& s = w.shape();
  BNAS_EXPECT(groups >= 1 && s.n % groups == 0, GeometryError,
              "binary conv: " + std::to_string(s.n) + " filters not divisible into " + std::to_string(groups) + " groups");
  BNAS_EXPECT(s.h == g.kh && s.w == g.kw, GeometryError, "binary conv: weight " + s.str() + " does not match kernel size");
  return {g, s.c * groups, s.n, groups, binarize_weights(w)};
}

Tensor activation_scale(const Tensor& a, const ConvGeometry& g) {
  const Shape& s = a.shape();
  g.check(s.h, s.w);
  const int oh = g.out_h(s.h), ow = g.out_w(s.w), taps = g.taps();
  Tensor d({1, 1, s.h, s.w});
  Tensor k({s.n, 1, oh, ow});
  std::vector<real> rows(static_cast<std::size_t>(oh) * ow * taps);
  const real inv_taps = real(1) / static_cast<real>(taps);
  for (int n = 0; n < s.n; ++n) {
    d.fill(0);
    for (int c = 0; c < s.c; ++c) {
      const real* plane = a.data() + a.index(n, c, 0, 0);
      for (std::size_t i = 0; i < s.plane(); ++i) d[i] += std::fabs(plane[i]);
    }
    for (real& v : d.vec()) v /= static_cast<real>(s.c);
    im2row(d.data(), 1, s.h, s.w, g, 0, rows.data());
    for (int p = 0; p < oh * ow; ++p) {
      real acc = 0;
      for (int t = 0; t < taps; ++t) acc += rows[p * taps + t];
      k[static_cast<std::size_t>(n) * oh * ow + p] = acc * inv_taps;
    }
  }
  return k;
}

namespace {

// Sign bits of the patches of channels [c0, c0 + cn) of one image, one row
// per output position, tap order (c, i, j). Padding taps read 0 and so pack
// as +1, matching sign(0) = +1.
void pack_sign_patches(const real* img, int c0, int cn, int h, int w, const ConvGeometry& g, BitTensor& out) {
  const int oh = g.out_h(h), ow = g.out_w(w);
  for (int y = 0; y < oh; ++y)
    for (int x = 0; x < ow; ++x) {
      Word* dst = out.row_words(y * ow + x).data();
      const int y0 = y * g.stride - g.padding, x0 = x * g.stride - g.padding;
      Word acc = 0;
      int bit = 0;
      for (int c = c0; c < c0 + cn; ++c) {
        const real* plane = img + static_cast<std::size_t>(c) * h * w;
        for (int i = 0; i < g.kh; ++i) {
          const int iy = y0 + i * g.dilation;
          const bool row_ok = iy >= 0 && iy < h;
          for (int j = 0; j < g.kw; ++j) {
            const int ix = x0 + j * g.dilation;
            const bool pos = !(row_ok && ix >= 0 && ix < w) || plane[iy * w + ix] >= 0;
            acc |= Word(pos) << bit;
            if (++bit == kWordBits) {
              *dst++ = acc;
              acc = 0;
              bit = 0;
            }
          }
        }
      }
      if (bit) *dst = acc;
    }
}

}  // namespace

Tensor binary_conv_forward(const Tensor& a, const BinaryConvKernel& k, Tensor* scale_map) {
  const Shape& s = a.shape();
  BNAS_EXPECT(s.c == k.in_channels, GeometryError,
              "binary conv expects " + std::to_string(k.in_channels) + " input channels, got " + s.str());
  BNAS_EXPECT(a.all_finite(), NumericError, "binary conv input contains NaN or Inf");
  const ConvGeometry& g = k.geom;
  g.check(s.h, s.w);
  const int oh = g.out_h(s.h), ow = g.out_w(s.w), p_count = oh * ow;
  const int k_all = s.c * g.taps();
  const int k_group = k_all / k.groups;
  const int f_group = k.out_channels / k.groups;

  Tensor kmap = activation_scale(a, g);
  Tensor out({s.n, k.out_channels, oh, ow});
  const int c_group = s.c / k.groups;
  BitTensor patches({p_count, 1, 1, k_group}, p_count, k_group);
  for (int n = 0; n < s.n; ++n) {
    // One packed patch matrix per group; groups are contiguous channel ranges.
    for (int gi = 0; gi < k.groups; ++gi) {
      pack_sign_patches(a.data() + n * s.item(), gi * c_group, c_group, s.h, s.w, g, patches);
      for (int fl = 0; fl < f_group; ++fl) {
        const int f = gi * f_group + fl;
        const BitRow wrow = k.weights.bits.row(f);
        const real beta = k.weights.beta[f];
        real* dst = out.data() + out.index(n, f, 0, 0);
        const real* km = kmap.data() + static_cast<std::size_t>(n) * p_count;
        for (int p = 0; p < p_count; ++p)
          dst[p] = beta * km[p] * static_cast<real>(xnor_popcount_dot(patches.row(p), wrow, k_group));
      }
    }
  }
  if (scale_map) *scale_map = std::move(kmap);
  return out;
}

Tensor binary_conv_forward(const Tensor& a, const Tensor& w, const ConvGeometry& g, int groups) {
  return binary_conv_forward(a, BinaryConvKernel::from_weights(w, g, groups));
}

Tensor ste_backward(const Tensor& grad_out, const Tensor& pre_sign) {
  BNAS_EXPECT(grad_out.shape() == pre_sign.shape(), GeometryError,
              "ste_backward: " + grad_out.shape().str() + " vs " + pre_sign.shape().str());
  Tensor out(grad_out.shape());
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = std::fabs(pre_sign[i]) <= real(1) ? grad_out[i] : real(0);
  return out;
}

Tensor binary_separable_conv(const Tensor& a, const Tensor& w_depthwise, const Tensor& w_pointwise,
                             const ConvGeometry& g) {
  const int channels = a.shape().c;
  BNAS_EXPECT(w_depthwise.shape().n == channels && w_depthwise.shape().c == 1, GeometryError,
              "separable conv: depthwise weight must be (C, 1, kh, kw), got " + w_depthwise.shape().str());
  BNAS_EXPECT(w_pointwise.shape().h == 1 && w_pointwise.shape().w == 1 && w_pointwise.shape().c == channels,
              GeometryError, "separable conv: pointwise weight must be (C_out, C, 1, 1), got " + w_pointwise.shape().str());
  Tensor a2 = binary_conv_forward(a, w_depthwise, g, channels);
  return binary_conv_forward(a2, w_pointwise, ConvGeometry{1, 1, 1, 1, 0}, 1);
}

BNAS_NS_END
