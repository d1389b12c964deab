#pragma once

#include <memory>
#include <vector>

#include "space/cell.hpp"

BNAS_NS_BEGIN

struct SuperNetConfig {
  int cells = 8;
  int channels = 16;
  int num_classes = 10;
  int in_channels = 3;
  int nodes = 4;
  int stem_multiplier = 3;
  SpaceFlags flags;
  Precision precision = Precision::Binary;
  /// Overrides the flag-derived op list when non-empty.
  std::vector<LayerType> ops;
};

/// Indices of the reduction cells: floor(L/3) and floor(2L/3).
std::vector<int> reduction_cells(int cells);

/// Float stem -> cells of mixed edges -> global average pool -> float linear.
class SuperNet : public Classifier {
 public:
  SuperNet(const SuperNetConfig& config, Rng& rng);

  Var forward(const Var& x, const Context& ctx) override;
  void collect(const std::string& prefix, StateList& out) override;

  ArchParams& arch() { return arch_; }
  const ArchParams& arch() const { return arch_; }
  const SuperNetConfig& config() const { return config_; }
  const std::vector<LayerType>& ops() const { return arch_.ops; }
  const std::vector<std::unique_ptr<SearchCell>>& cells() const { return cells_; }

 private:
  SuperNetConfig config_;
  Conv2dLayer stem_;
  BatchNormLayer stem_bn_;
  std::vector<std::unique_ptr<SearchCell>> cells_;
  std::unique_ptr<LinearLayer> classifier_;
  ArchParams arch_;
};

BNAS_NS_END
