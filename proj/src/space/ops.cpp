#include "space/ops.hpp"

#include "common/error.hpp"

BNAS_NS_BEGIN

namespace {

class BinaryConvOp : public EdgeOp {
 public:
  BinaryConvOp(LayerType t, int channels, int stride, Rng& rng)
      : EdgeOp(t), layer_(channels, channels, op_geometry(t, stride), rng) {}
  Var forward(const Var& x, const Context& ctx) override { return layer_.forward(x, ctx); }
  void collect(const std::string& prefix, StateList& out) override { layer_.collect(prefix, out); }

 private:
  BinaryConvLayer layer_;
};

class BinarySepOp : public EdgeOp {
 public:
  BinarySepOp(LayerType t, int channels, int stride, Rng& rng)
      : EdgeOp(t), layer_(channels, channels, op_geometry(t, stride), rng) {}
  Var forward(const Var& x, const Context& ctx) override { return layer_.forward(x, ctx); }
  void collect(const std::string& prefix, StateList& out) override { layer_.collect(prefix, out); }

 private:
  BinarySeparableLayer layer_;
};

// relu -> conv -> bn
class FloatConvOp : public EdgeOp {
 public:
  FloatConvOp(LayerType t, int channels, int stride, Rng& rng)
      : EdgeOp(t), conv_(channels, channels, op_geometry(t, stride), rng), bn_(channels) {}
  Var forward(const Var& x, const Context& ctx) override { return bn_.forward(conv_.forward(relu(x)), ctx); }
  void collect(const std::string& prefix, StateList& out) override {
    conv_.collect(prefix + "conv.", out);
    bn_.collect(prefix + "bn.", out);
  }

 private:
  Conv2dLayer conv_;
  BatchNormLayer bn_;
};

// relu -> depthwise -> pointwise -> bn
class FloatSepOp : public EdgeOp {
 public:
  FloatSepOp(LayerType t, int channels, int stride, Rng& rng)
      : EdgeOp(t),
        depthwise_(channels, channels, op_geometry(t, stride), rng, channels),
        pointwise_(channels, channels, ConvGeometry{}, rng),
        bn_(channels) {}
  Var forward(const Var& x, const Context& ctx) override {
    return bn_.forward(pointwise_.forward(depthwise_.forward(relu(x))), ctx);
  }
  void collect(const std::string& prefix, StateList& out) override {
    depthwise_.collect(prefix + "depthwise.", out);
    pointwise_.collect(prefix + "pointwise.", out);
    bn_.collect(prefix + "bn.", out);
  }

 private:
  Conv2dLayer depthwise_, pointwise_;
  BatchNormLayer bn_;
};

class PoolOp : public EdgeOp {
 public:
  PoolOp(LayerType t, int stride) : EdgeOp(t), stride_(stride) {}
  Var forward(const Var& x, const Context&) override {
    return type() == LayerType::MaxPool3x3 ? max_pool(x, 3, stride_, 1) : avg_pool(x, 3, stride_, 1);
  }
  void collect(const std::string&, StateList&) override {}

 private:
  int stride_;
};

class ZeroiseOp : public EdgeOp {
 public:
  explicit ZeroiseOp(int stride) : EdgeOp(LayerType::Zeroise), stride_(stride) {}
  Var forward(const Var& x, const Context&) override { return zeroise_forward(x, stride_); }
  void collect(const std::string&, StateList&) override {}

 private:
  int stride_;
};

}  // namespace

ConvGeometry op_geometry(LayerType t, int stride) {
  const int k = kernel_size(t);
  const int dilation = is_dilated(t) ? 2 : 1;
  return ConvGeometry{k, k, stride, dilation, dilation * (k - 1) / 2};
}

std::unique_ptr<EdgeOp> make_edge_op(LayerType t, int channels, int stride, Precision precision, Rng& rng) {
  BNAS_EXPECT(stride == 1 || stride == 2, ContractViolation, "edge stride must be 1 or 2");
  switch (t) {
    case LayerType::MaxPool3x3:
    case LayerType::AvgPool3x3:
      return std::make_unique<PoolOp>(t, stride);
    case LayerType::Zeroise:
      return std::make_unique<ZeroiseOp>(stride);
    case LayerType::SepConv3x3:
    case LayerType::SepConv5x5:
      if (precision == Precision::Float) return std::make_unique<FloatSepOp>(t, channels, stride, rng);
      return std::make_unique<BinarySepOp>(t, channels, stride, rng);
    default:
      if (precision == Precision::Float) return std::make_unique<FloatConvOp>(t, channels, stride, rng);
      return std::make_unique<BinaryConvOp>(t, channels, stride, rng);
  }
}

Var zeroise_forward(const Var& x, int stride) {
  BNAS_EXPECT(stride == 1 || stride == 2, ContractViolation, "zeroise stride must be 1 or 2");
  const Shape s = x->shape();
  return zeros({s.n, s.c, strided_extent(s.h, stride), strided_extent(s.w, stride)});
}

Var skip_adapt(const Var& x, const Shape& target) {
  const Shape s = x->shape();
  BNAS_EXPECT(s.n == target.n, GeometryError, "skip_adapt: batch size mismatch");
  Var y = x;
  if (target.h != s.h || target.w != s.w) {
    BNAS_EXPECT(target.h == strided_extent(s.h, 2) && target.w == strided_extent(s.w, 2), GeometryError,
                "skip_adapt: cannot map spatial " + s.str() + " onto " + target.str());
    // Odd extents get one padded row/column so the pooled size matches a stride-2 op.
    y = avg_pool(y, 2, 2, s.h % 2);
  }
  // A wide stem can feed a cell whose concat is narrower (fewer than 3 nodes).
  if (target.c < s.c) return channel_fold(y, target.c);
  return channel_pad(y, target.c);
}

Preprocess::Preprocess(int in, int out, int stride, Precision precision, Rng& rng) : precision_(precision) {
  const ConvGeometry g{1, 1, stride, 1, 0};
  if (precision == Precision::Binary) {
    binary_ = std::make_unique<BinaryConvLayer>(in, out, g, rng);
  } else {
    conv_ = std::make_unique<Conv2dLayer>(in, out, g, rng);
    bn_ = std::make_unique<BatchNormLayer>(out);
  }
}

Var Preprocess::forward(const Var& x, const Context& ctx) {
  if (binary_) return binary_->forward(x, ctx);
  return bn_->forward(conv_->forward(relu(x)), ctx);
}

void Preprocess::collect(const std::string& prefix, StateList& out) {
  if (binary_) {
    binary_->collect(prefix, out);
  } else {
    conv_->collect(prefix + "conv.", out);
    bn_->collect(prefix + "bn.", out);
  }
}

BNAS_NS_END
