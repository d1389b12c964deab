#pragma once

#include "tensor/tensor.hpp"

BNAS_NS_BEGIN

struct ConvGeometry {
  int kh = 1, kw = 1;
  int stride = 1;
  int dilation = 1;
  int padding = 0;

  int out_h(int h) const { return (h + 2 * padding - dilation * (kh - 1) - 1) / stride + 1; }
  int out_w(int w) const { return (w + 2 * padding - dilation * (kw - 1) - 1) / stride + 1; }
  int taps() const { return kh * kw; }

  /// Throws GeometryError on bad parameters or an empty output.
  void check(int h, int w) const;
  bool operator==(const ConvGeometry&) const = default;
};

/// Lowers one (C, H, W) image into OH*OW rows of C*kh*kw taps, tap order
/// (c, i, j). Out-of-bounds taps read `pad_value`.
void im2row(const real* img, int channels, int h, int w, const ConvGeometry& g, real pad_value,
            real* rows);

/// Adjoint of im2row: scatters row gradients back onto the image (+=).
/// Padding taps are dropped.
void row2im_add(const real* rows, int channels, int h, int w, const ConvGeometry& g, real* img);

/// Patch matrix for a batch: shape (N*OH*OW, C*kh*kw, 1, 1), rows ordered by (n, oh, ow).
Tensor lower_conv_patches(const Tensor& x, const ConvGeometry& g, real pad_value = 0);

/// Row-major C = alpha * op(A) * op(B) + beta * C, backed by BLAS.
void gemm(bool trans_a, bool trans_b, int m, int n, int k, real alpha, const real* a, int lda,
          const real* b, int ldb, real beta, real* c, int ldc);

BNAS_NS_END
