#include "space/layer_type.hpp"

#include "common/error.hpp"

BNAS_NS_BEGIN

namespace {
constexpr const char* kNames[] = {"bin_conv_3x3",  "bin_conv_5x5", "bin_dil_conv_3x3",
                                  "bin_dil_conv_5x5", "max_pool_3x3", "avg_pool_3x3",
                                  "zeroise",       "sep_conv_3x3", "sep_conv_5x5"};
}

const char* layer_name(LayerType t) { return kNames[static_cast<int>(t)]; }

LayerType parse_layer(const std::string& name) {
  for (int i = 0; i < 9; ++i)
    if (name == kNames[i]) return static_cast<LayerType>(i);
  throw ParseError("unknown op name '" + name + "'");
}

bool is_parameterized(LayerType t) {
  switch (t) {
    case LayerType::MaxPool3x3:
    case LayerType::AvgPool3x3:
    case LayerType::Zeroise:
      return false;
    default:
      return true;
  }
}

bool is_separable(LayerType t) { return t == LayerType::SepConv3x3 || t == LayerType::SepConv5x5; }

bool is_dilated(LayerType t) { return t == LayerType::BinDilConv3x3 || t == LayerType::BinDilConv5x5; }

int kernel_size(LayerType t) {
  switch (t) {
    case LayerType::BinConv5x5:
    case LayerType::BinDilConv5x5:
    case LayerType::SepConv5x5:
      return 5;
    case LayerType::Zeroise:
      return 0;
    default:
      return 3;
  }
}

std::vector<LayerType> search_space(const SpaceFlags& flags) {
  std::vector<LayerType> ops;
  for (int i = 0; i < kBaseOpCount; ++i) {
    const auto t = static_cast<LayerType>(i);
    if (flags.no_zeroise && t == LayerType::Zeroise) continue;
    if (flags.no_dilated && is_dilated(t)) continue;
    ops.push_back(t);
  }
  if (flags.keep_sepconv) {
    ops.push_back(LayerType::SepConv3x3);
    ops.push_back(LayerType::SepConv5x5);
  }
  BNAS_EXPECT(!ops.empty(), ContractViolation, "search space is empty after applying flags");
  return ops;
}

BNAS_NS_END
