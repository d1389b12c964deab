#pragma once

#include <memory>
#include <string>
#include <vector>

#include "genotype/genotype.hpp"

BNAS_NS_BEGIN

struct NetworkSpec {
  Genotype genotype;
  int cells = 8;
  int channels = 16;
  int num_classes = 10;
  int in_channels = 3;
  int height = 32;
  int width = 32;
  int stem_multiplier = 3;
  bool inter_cell_skip = true;
  Precision precision = Precision::Binary;

  void validate() const;
};

/// Channel and spatial bookkeeping of one cell instance.
struct CellPlan {
  int index = 0;
  bool reduction = false;
  bool reduction_prev = false;
  int c_pp = 0, c_p = 0, c = 0;  // input widths and the per-node width
  int h_pp = 0, w_pp = 0;        // spatial size of c(k-2)
  int h = 0, w = 0;              // spatial size of c(k-1)
  int out_h = 0, out_w = 0;
  int nodes = 0;
  int out_channels() const { return nodes * c; }
};

struct NetworkPlan {
  int stem_channels = 0;
  std::vector<CellPlan> cells;
  int final_channels = 0;
};

/// Walks the stack once: widths double at the reduction cells, c(k-2)
/// is downsampled by its preprocessing block after a reduction.
NetworkPlan plan_network(const NetworkSpec& spec);

/// Genotype-wired cell: preprocessing, the chosen edges, node sums,
/// concatenation and the optional skip from c(k-1).
class DiscreteCell : public Module {
 public:
  DiscreteCell(const CellPlan& plan, const std::vector<GenotypeNode>& nodes, bool inter_cell_skip,
               Precision precision, Rng& rng);
  Var forward(const Var& s0, const Var& s1, const Context& ctx);
  void collect(const std::string& prefix, StateList& out) override;
  const CellPlan& plan() const { return plan_; }

 private:
  struct Edge {
    int node;
    int from;
    std::unique_ptr<EdgeOp> op;
  };
  CellPlan plan_;
  CellTemplate tmpl_;
  Preprocess pre0_, pre1_;
  std::vector<Edge> edges_;
};

class Network : public Classifier {
 public:
  Network(const NetworkSpec& spec, Rng& rng);
  Var forward(const Var& x, const Context& ctx) override;
  void collect(const std::string& prefix, StateList& out) override;
  const NetworkSpec& spec() const { return spec_; }
  const NetworkPlan& plan() const { return plan_; }

 private:
  NetworkSpec spec_;
  NetworkPlan plan_;
  Conv2dLayer stem_;
  BatchNormLayer stem_bn_;
  std::vector<std::unique_ptr<DiscreteCell>> cells_;
  std::unique_ptr<LinearLayer> classifier_;
};

std::unique_ptr<Network> build_network(const NetworkSpec& spec, std::uint64_t seed);

BNAS_NS_END
