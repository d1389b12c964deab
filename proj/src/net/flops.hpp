#pragma once

#include <string>
#include <vector>

#include "net/network.hpp"

BNAS_NS_BEGIN

/// Cost of one layer. Float multiply-accumulates count as one op; binary
/// MACs are counted separately and weigh 1/64 in the effective total.
/// The twin_* fields describe the same layer in a full-precision network:
/// binary convs become float convs of identical geometry, scaling work and
/// beta scalars disappear.
struct LayerCost {
  std::string name;
  std::string kind;
  double float_ops = 0;   // includes scale_ops
  double scale_ops = 0;   // beta / K scaling work
  double binary_ops = 0;  // binary MACs
  double params_float = 0;
  double params_binary_bits = 0;
  double betas = 0;
  double twin_float_ops = 0;
  double twin_params = 0;

  double effective_flops() const { return float_ops + binary_ops / 64.0; }
};

struct FlopsReport {
  std::vector<LayerCost> layers;
  double float_ops = 0;
  double scale_ops = 0;
  double binary_ops = 0;
  double params_float = 0;
  double params_binary_bits = 0;
  double betas = 0;
  double twin_float_ops = 0;
  double twin_params = 0;

  void add(LayerCost c);
  double effective_flops() const { return float_ops + binary_ops / 64.0; }

  std::string text() const;
  std::string csv() const;
};

// Per-layer cost formulas. h, w are input extents.
LayerCost binary_conv_cost(const std::string& name, int in, int out, int h, int w, const ConvGeometry& g,
                           int groups = 1);
LayerCost float_conv_cost(const std::string& name, int in, int out, int h, int w, const ConvGeometry& g,
                          int groups = 1);
LayerCost batchnorm_cost(const std::string& name, int channels, int h, int w, bool affine = true);
LayerCost elementwise_cost(const std::string& name, const std::string& kind, double elements);
LayerCost pool_cost(const std::string& name, int channels, int h, int w, int kernel, int stride, int padding);
LayerCost linear_cost(const std::string& name, int in, int out);

/// Cost of one edge op on a (channels, h, w) input.
std::vector<LayerCost> edge_op_cost(const std::string& name, LayerType t, int channels, int h, int w, int stride,
                                    Precision precision);

FlopsReport count_flops(const NetworkSpec& spec);

/// 32 * twin params / (32 * float params + binary bits + 32 * betas). The twin
/// is taken from `reference` when given (e.g. the same budget without zeroise).
double memory_savings(const FlopsReport& report, const FlopsReport* reference = nullptr);
/// twin float ops / effective flops, with the same choice of twin.
double inference_speedup(const FlopsReport& report, const FlopsReport* reference = nullptr);

BNAS_NS_END
