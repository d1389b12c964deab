#include "study/probe.hpp"

#include "common/error.hpp"
#include "space/ops.hpp"

BNAS_NS_BEGIN

struct ProbeNet::BinaryBlock : ProbeNet::Block {
  BinaryConvLayer layer;
  BinaryBlock(int in, int out, ConvGeometry g, Rng& rng) : layer(in, out, g, rng) {}
  Var forward(const Var& x, const Context& ctx) override { return layer.forward(x, ctx); }
  void collect(const std::string& prefix, StateList& out) override { layer.collect(prefix, out); }
};

// Input channels need not match the width, so the depthwise stage keeps the
// input width and the pointwise stage maps to the output width.
struct ProbeNet::BinarySepBlock : ProbeNet::Block {
  BinarySeparableLayer layer;
  BinarySepBlock(int in, int out, ConvGeometry g, Rng& rng) : layer(in, out, g, rng) {}
  Var forward(const Var& x, const Context& ctx) override { return layer.forward(x, ctx); }
  void collect(const std::string& prefix, StateList& out) override { layer.collect(prefix, out); }
};

struct ProbeNet::FloatBlock : ProbeNet::Block {
  std::unique_ptr<Conv2dLayer> depthwise;
  Conv2dLayer conv;
  BatchNormLayer bn;
  FloatBlock(int in, int out, ConvGeometry g, bool separable, Rng& rng)
      : depthwise(separable ? std::make_unique<Conv2dLayer>(in, in, g, rng, in) : nullptr),
        conv(in, out, separable ? ConvGeometry{} : g, rng),
        bn(out) {}
  Var forward(const Var& x, const Context& ctx) override {
    Var y = depthwise ? depthwise->forward(x) : x;
    return relu(bn.forward(conv.forward(y), ctx));
  }
  void collect(const std::string& prefix, StateList& out) override {
    if (depthwise) depthwise->collect(prefix + "depthwise.", out);
    conv.collect(prefix + "conv.", out);
    bn.collect(prefix + "bn.", out);
  }
};

ProbeNet::ProbeNet(LayerType layer, Precision precision, int in_channels, int height, int width, int classes,
                   Rng& rng) {
  BNAS_EXPECT(is_parameterized(layer), InvalidArgument,
              std::string("probe net: '") + layer_name(layer) + "' is not a convolution layer");
  int c = in_channels, h = height, w = width;
  for (int i = 0; i < kRepeats; ++i) {
    const int stride = i == 0 ? 2 : 1;
    const ConvGeometry g = op_geometry(layer, stride);
    if (precision == Precision::Float)
      blocks_.push_back(std::make_unique<FloatBlock>(c, kWidth, g, is_separable(layer), rng));
    else if (is_separable(layer))
      blocks_.push_back(std::make_unique<BinarySepBlock>(c, kWidth, g, rng));
    else
      blocks_.push_back(std::make_unique<BinaryBlock>(c, kWidth, g, rng));
    c = kWidth;
    h = g.out_h(h);
    w = g.out_w(w);
  }
  fc_.push_back(std::make_unique<LinearLayer>(c * h * w, kHidden1, rng));
  fc_.push_back(std::make_unique<LinearLayer>(kHidden1, kHidden2, rng));
  fc_.push_back(std::make_unique<LinearLayer>(kHidden2, classes, rng));
}

Var ProbeNet::forward(const Var& x, const Context& ctx) {
  Var y = x;
  for (auto& b : blocks_) y = b->forward(y, ctx);
  y = flatten(y);
  for (std::size_t i = 0; i < fc_.size(); ++i) {
    y = fc_[i]->forward(y);
    if (i + 1 < fc_.size()) y = relu(y);
  }
  return y;
}

void ProbeNet::collect(const std::string& prefix, StateList& out) {
  for (std::size_t i = 0; i < blocks_.size(); ++i) blocks_[i]->collect(prefix + "layer" + std::to_string(i) + ".", out);
  for (std::size_t i = 0; i < fc_.size(); ++i) fc_[i]->collect(prefix + "fc" + std::to_string(i) + ".", out);
}

BNAS_NS_END
