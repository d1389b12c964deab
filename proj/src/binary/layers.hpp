#pragma once

#include "autodiff/module.hpp"
#include "binary/kernels.hpp"

BNAS_NS_BEGIN

/// Binary convolution on the tape. Forward runs the popcount kernel with B
/// and beta rebuilt from the master weights on every call. Backward uses the
/// clipped straight-through estimator on both the activation and the weights;
/// beta and K are held constant.
Var binary_conv(const Var& pre_sign, const Var& weight, const ConvGeometry& g, int groups = 1);

/// batchnorm -> sign -> binary conv -> beta K scaling.
class BinaryConvLayer : public Module {
 public:
  BinaryConvLayer(int in, int out, ConvGeometry g, Rng& rng, int groups = 1);
  Var forward(const Var& x, const Context& ctx);
  void collect(const std::string& prefix, StateList& out) override;

  const ConvGeometry& geometry() const { return geom_; }
  int groups() const { return groups_; }
  Parameter& weight() { return *weight_; }
  BatchNormLayer& norm() { return bn_; }

 private:
  ConvGeometry geom_;
  int groups_;
  BatchNormLayer bn_;
  ParamPtr weight_;
};

/// Binary depthwise conv followed by a re-binarized binary 1x1 conv, with a
/// single batchnorm in front.
class BinarySeparableLayer : public Module {
 public:
  BinarySeparableLayer(int in, int out, ConvGeometry g, Rng& rng);
  Var forward(const Var& x, const Context& ctx);
  void collect(const std::string& prefix, StateList& out) override;

 private:
  ConvGeometry geom_;
  BatchNormLayer bn_;
  ParamPtr depthwise_, pointwise_;
};

BNAS_NS_END
