#pragma once

#include <memory>
#include <vector>

#include "binary/layers.hpp"
#include "space/layer_type.hpp"

BNAS_NS_BEGIN

/// Small classifier made of one layer type: three of that layer (32
/// channels, stride 2 on the first) followed by three fully connected
/// layers, flatten -> 512 -> 128 -> classes.
///
/// Binary layers are batchnorm -> sign -> binary conv (separable ones use the
/// depthwise + re-binarized pointwise pair). Float layers are conv ->
/// batchnorm -> relu. The fully connected layers stay float.
class ProbeNet : public Classifier {
 public:
  static constexpr int kWidth = 32;
  static constexpr int kRepeats = 3;
  static constexpr int kHidden1 = 512;
  static constexpr int kHidden2 = 128;

  ProbeNet(LayerType layer, Precision precision, int in_channels, int height, int width, int classes, Rng& rng);
  Var forward(const Var& x, const Context& ctx) override;
  void collect(const std::string& prefix, StateList& out) override;

  int conv_layers() const { return static_cast<int>(blocks_.size()); }
  int fc_layers() const { return static_cast<int>(fc_.size()); }

 private:
  struct Block : Module {
    virtual Var forward(const Var& x, const Context& ctx) = 0;
  };
  struct BinaryBlock;
  struct BinarySepBlock;
  struct FloatBlock;

  std::vector<std::unique_ptr<Block>> blocks_;
  std::vector<std::unique_ptr<LinearLayer>> fc_;
};

BNAS_NS_END
