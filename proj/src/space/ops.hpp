#pragma once

#include <memory>

#include "autodiff/module.hpp"
#include "binary/layers.hpp"
#include "space/layer_type.hpp"

BNAS_NS_BEGIN

/// One candidate operation instantiated for an edge (channels in == out).
class EdgeOp : public Module {
 public:
  explicit EdgeOp(LayerType t) : type_(t) {}
  virtual Var forward(const Var& x, const Context& ctx) = 0;
  LayerType type() const { return type_; }

 private:
  LayerType type_;
};

/// Spatial size after a same-padded op with this stride.
inline int strided_extent(int extent, int stride) { return (extent - 1) / stride + 1; }

/// Geometry of a conv-type op: padding keeps the output at strided_extent.
ConvGeometry op_geometry(LayerType t, int stride);

std::unique_ptr<EdgeOp> make_edge_op(LayerType t, int channels, int stride, Precision precision, Rng& rng);

/// Zero tensor of the strided output shape; no parameters, zero gradient.
Var zeroise_forward(const Var& x, int stride);

/// Parameter-free inter-cell skip path: 2x2 average pooling when the target
/// is spatially halved, then zero-padding of the channel axis (or folding
/// it, when the input is wider than the target).
Var skip_adapt(const Var& x, const Shape& target);

/// 1x1 block aligning a cell input to the cell width (binary or float).
class Preprocess : public Module {
 public:
  Preprocess(int in, int out, int stride, Precision precision, Rng& rng);
  Var forward(const Var& x, const Context& ctx);
  void collect(const std::string& prefix, StateList& out) override;

 private:
  Precision precision_;
  std::unique_ptr<BinaryConvLayer> binary_;
  std::unique_ptr<Conv2dLayer> conv_;
  std::unique_ptr<BatchNormLayer> bn_;
};

BNAS_NS_END
