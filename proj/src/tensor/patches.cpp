#include "tensor/patches.hpp"

#include <cblas.h>

#include "common/error.hpp"

BNAS_NS_BEGIN

void ConvGeometry::check(int h, int w) const {
  BNAS_EXPECT(kh >= 1 && kw >= 1, GeometryError, "kernel size must be >= 1");
  BNAS_EXPECT(stride >= 1, GeometryError, "stride must be >= 1");
  BNAS_EXPECT(dilation >= 1, GeometryError, "dilation must be >= 1");
  BNAS_EXPECT(padding >= 0, GeometryError, "padding must be >= 0");
  const int oh = out_h(h), ow = out_w(w);
  BNAS_EXPECT(oh > 0 && ow > 0, GeometryError,
              "convolution output is empty: input " + std::to_string(h) + "x" + std::to_string(w) +
                  ", kernel " + std::to_string(kh) + "x" + std::to_string(kw) + ", dilation " +
                  std::to_string(dilation) + ", padding " + std::to_string(padding));
}

void im2row(const real* img, int channels, int h, int w, const ConvGeometry& g, real pad_value,
            real* rows) {
  const int oh = g.out_h(h), ow = g.out_w(w);
  const int k = channels * g.kh * g.kw;
  for (int y = 0; y < oh; ++y) {
    for (int x = 0; x < ow; ++x) {
      real* row = rows + (static_cast<std::size_t>(y) * ow + x) * k;
      const int y0 = y * g.stride - g.padding;
      const int x0 = x * g.stride - g.padding;
      for (int c = 0; c < channels; ++c) {
        const real* plane = img + static_cast<std::size_t>(c) * h * w;
        for (int i = 0; i < g.kh; ++i) {
          const int iy = y0 + i * g.dilation;
          const bool row_ok = iy >= 0 && iy < h;
          for (int j = 0; j < g.kw; ++j) {
            const int ix = x0 + j * g.dilation;
            *row++ = (row_ok && ix >= 0 && ix < w) ? plane[iy * w + ix] : pad_value;
          }
        }
      }
    }
  }
}

void row2im_add(const real* rows, int channels, int h, int w, const ConvGeometry& g, real* img) {
  const int oh = g.out_h(h), ow = g.out_w(w);
  for (int y = 0; y < oh; ++y) {
    for (int x = 0; x < ow; ++x) {
      const real* row = rows + (static_cast<std::size_t>(y) * ow + x) * channels * g.kh * g.kw;
      const int y0 = y * g.stride - g.padding;
      const int x0 = x * g.stride - g.padding;
      for (int c = 0; c < channels; ++c) {
        real* plane = img + static_cast<std::size_t>(c) * h * w;
        for (int i = 0; i < g.kh; ++i) {
          const int iy = y0 + i * g.dilation;
          const bool row_ok = iy >= 0 && iy < h;
          for (int j = 0; j < g.kw; ++j, ++row) {
            const int ix = x0 + j * g.dilation;
            if (row_ok && ix >= 0 && ix < w) plane[iy * w + ix] += *row;
          }
        }
      }
    }
  }
}

Tensor lower_conv_patches(const Tensor& x, const ConvGeometry& g, real pad_value) {
  const Shape& s = x.shape();
  g.check(s.h, s.w);
  const int oh = g.out_h(s.h), ow = g.out_w(s.w);
  const int k = s.c * g.kh * g.kw;
  Tensor out({s.n * oh * ow, k, 1, 1});
  for (int n = 0; n < s.n; ++n)
    im2row(x.data() + n * s.item(), s.c, s.h, s.w, g, pad_value,
           out.data() + static_cast<std::size_t>(n) * oh * ow * k);
  return out;
}

void gemm(bool trans_a, bool trans_b, int m, int n, int k, real alpha, const real* a, int lda,
          const real* b, int ldb, real beta, real* c, int ldc) {
  const auto ta = trans_a ? CblasTrans : CblasNoTrans;
  const auto tb = trans_b ? CblasTrans : CblasNoTrans;
  if constexpr (sizeof(real) == sizeof(float)) {
    cblas_sgemm(CblasRowMajor, ta, tb, m, n, k, alpha, reinterpret_cast<const float*>(a), lda,
                reinterpret_cast<const float*>(b), ldb, beta, reinterpret_cast<float*>(c), ldc);
  } else {
    cblas_dgemm(CblasRowMajor, ta, tb, m, n, k, alpha, reinterpret_cast<const double*>(a), lda,
                reinterpret_cast<const double*>(b), ldb, beta, reinterpret_cast<double*>(c), ldc);
  }
}

BNAS_NS_END
