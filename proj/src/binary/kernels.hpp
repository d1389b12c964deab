#pragma once

#include <vector>

#include "tensor/bits.hpp"
#include "tensor/patches.hpp"

BNAS_NS_BEGIN

/// Packed sign(W) plus per-filter scale beta[f] = ||W[f]||_1 / n, n = (C_in/groups)*kh*kw.
struct BinaryWeights {
  BitTensor bits;          // one row per output filter
  std::vector<real> beta;  // one scalar per output filter
};

BinaryWeights binarize_weights(const Tensor& w);

/// Frozen binary convolution: packed weights, scales and geometry.
struct BinaryConvKernel {
  ConvGeometry geom;
  int in_channels = 0;
  int out_channels = 0;
  int groups = 1;
  BinaryWeights weights;

  static BinaryConvKernel from_weights(const Tensor& w, const ConvGeometry& g, int groups = 1);
};

/// K = D * k: D is the channel mean of |A| (one plane per item), k the
/// kh x kw averaging kernel 1/(kh*kw), applied with the conv's
/// stride/dilation/padding (zero padding). Shape (N, 1, OH, OW).
Tensor activation_scale(const Tensor& a, const ConvGeometry& g);

/// out[f] = beta[f] * K (.) (B[f] * sign(A)), the core computed by XNOR and
/// popcount over lowered patches. A is the pre-sign activation; spatial
/// padding enters as sign(0) = +1 bits. Optionally returns K.
Tensor binary_conv_forward(const Tensor& a, const BinaryConvKernel& k, Tensor* scale_map = nullptr);

/// Same result from unscaled W, binarized on the fly.
Tensor binary_conv_forward(const Tensor& a, const Tensor& w, const ConvGeometry& g, int groups = 1);

/// grad_out masked by 1[|pre_sign| <= 1].
Tensor ste_backward(const Tensor& grad_out, const Tensor& pre_sign);

/// Depthwise binary conv (geometry g), then the intermediate activation
/// A2 = beta1 K1 (.) (B1 * I1) is re-binarized for the 1x1 pointwise binary conv.
Tensor binary_separable_conv(const Tensor& a, const Tensor& w_depthwise, const Tensor& w_pointwise,
                             const ConvGeometry& g);

BNAS_NS_END
