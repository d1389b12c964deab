#pragma once

#include <memory>
#include <string>
#include <vector>

#include "autodiff/ops.hpp"
#include "common/rng.hpp"

BNAS_NS_BEGIN

enum class ParamRole { Weight, Arch };

/// A learnable tensor: value and gradient live on a persistent leaf node,
/// the momentum buffer beside it.
struct Parameter {
  Var var;
  Tensor momentum;
  ParamRole role = ParamRole::Weight;
  bool conv_weight = false;  // counted by gradient-magnitude logging
  bool binary = false;       // sign-binarised in the forward pass; exported as packed bits

  explicit Parameter(Tensor init, ParamRole r = ParamRole::Weight, bool conv = false);

  Tensor& value() { return var->value; }
  const Tensor& value() const { return var->value; }
  Tensor& grad() { return var->grad_ref(); }
  void zero_grad();
};
using ParamPtr = std::shared_ptr<Parameter>;

struct NamedParam {
  std::string name;
  Parameter* param;
};
struct NamedBuffer {
  std::string name;
  Tensor* tensor;
};

/// Flattened view of a module tree's state, in registration order.
struct StateList {
  std::vector<NamedParam> params;
  std::vector<NamedBuffer> buffers;

  std::vector<Parameter*> select(ParamRole role) const;
  std::size_t count(ParamRole role) const;
  void zero_grad() const;
};

class Module {
 public:
  virtual ~Module() = default;
  virtual void collect(const std::string& prefix, StateList& out) = 0;

  StateList state() {
    StateList s;
    collect("", s);
    return s;
  }
};

struct Context {
  bool training = true;
};

/// Image batch (N, C, H, W) -> logits (N, classes, 1, 1).
class Classifier : public Module {
 public:
  virtual Var forward(const Var& x, const Context& ctx) = 0;
};

class Conv2dLayer : public Module {
 public:
  Conv2dLayer(int in, int out, ConvGeometry g, Rng& rng, int groups = 1);
  Var forward(const Var& x) const { return conv2d(x, weight_->var, geom_, groups_); }
  void collect(const std::string& prefix, StateList& out) override;
  const ConvGeometry& geometry() const { return geom_; }
  Parameter& weight() { return *weight_; }

 private:
  ConvGeometry geom_;
  int groups_;
  ParamPtr weight_;
};

class BatchNormLayer : public Module {
 public:
  explicit BatchNormLayer(int channels, bool affine = true);
  Var forward(const Var& x, const Context& ctx);
  void collect(const std::string& prefix, StateList& out) override;
  int channels() const { return static_cast<int>(state_.running_mean.size()); }
  bool affine() const { return gamma_ != nullptr; }

 private:
  ParamPtr gamma_, beta_;
  BatchNormState state_;
};

class LinearLayer : public Module {
 public:
  LinearLayer(int in, int out, Rng& rng);
  Var forward(const Var& x) const { return linear(x, weight_->var, bias_->var); }
  void collect(const std::string& prefix, StateList& out) override;

 private:
  ParamPtr weight_, bias_;
};

/// Sum of |grad| over every convolution weight (binary or float).
double conv_grad_magnitude(const StateList& state);

/// He-normal initialisation for a (out, in, kh, kw) kernel.
Tensor he_normal(Shape s, Rng& rng);

BNAS_NS_END
