#pragma once

#include <string>
#include <vector>

#include "common/config.hpp"

BNAS_NS_BEGIN

/// Candidate operations on a cell edge. The first seven form the binary
/// search space; the separable convolutions exist only for the keep-sepconv
/// study and the quantization-error probes.
enum class LayerType : int {
  BinConv3x3 = 0,
  BinConv5x5 = 1,
  BinDilConv3x3 = 2,
  BinDilConv5x5 = 3,
  MaxPool3x3 = 4,
  AvgPool3x3 = 5,
  Zeroise = 6,
  SepConv3x3 = 7,
  SepConv5x5 = 8,
};

inline constexpr int kBaseOpCount = 7;

const char* layer_name(LayerType t);
/// Throws ParseError naming the unknown string.
LayerType parse_layer(const std::string& name);
bool is_parameterized(LayerType t);
bool is_separable(LayerType t);
bool is_dilated(LayerType t);
int kernel_size(LayerType t);

/// Ablation switches that reshape the search space or the cell template.
struct SpaceFlags {
  bool no_skip = false;
  bool no_zeroise = false;
  bool no_dilated = false;
  bool keep_sepconv = false;

  bool operator==(const SpaceFlags&) const = default;
};

/// The 7 base ops minus/plus what the flags remove/add, in op-id order.
/// Throws ContractViolation if nothing is left.
std::vector<LayerType> search_space(const SpaceFlags& flags);

enum class Precision { Binary, Float };

BNAS_NS_END
