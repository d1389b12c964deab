#pragma once

#include <memory>
#include <vector>

#include "space/ops.hpp"

BNAS_NS_BEGIN

/// Cell wiring: nodes 0 and 1 are the cell inputs c(k-2), c(k-1); each
/// intermediate node i (0-based) takes one edge from every earlier node.
/// The cell output concatenates the intermediate nodes and, with the
/// inter-cell skip on, adds the adapted c(k-1).
struct CellTemplate {
  int nodes = 4;
  bool inter_cell_skip = true;

  static int edge_count(int nodes) { return nodes * (nodes + 3) / 2; }
  int edge_count() const { return edge_count(nodes); }
  /// Position of the edge (source -> intermediate node) in the edge table.
  static int edge_index(int node, int source) { return node * (node + 3) / 2 + source; }
};

/// Per-edge architecture logits for the normal and the reduction cell.
struct ArchParams {
  std::vector<LayerType> ops;
  int edges = 0;
  ParamPtr normal;
  ParamPtr reduce;

  ArchParams() = default;
  ArchParams(std::vector<LayerType> op_list, int edge_count);

  /// softmax of one row.
  std::vector<double> probs(bool reduction, int edge) const;
  /// Deep copy of the logits.
  ArchParams clone() const;
  const Parameter& table(bool reduction) const { return reduction ? *reduce : *normal; }
};

class MixedEdge : public Module {
 public:
  MixedEdge(const std::vector<LayerType>& ops, int channels, int stride, Precision precision, Rng& rng);
  /// sum_o probs[row, o] * op_o(x)
  Var forward(const Var& x, const Var& probs, int row, const Context& ctx);
  void collect(const std::string& prefix, StateList& out) override;
  std::size_t size() const { return ops_.size(); }

 private:
  std::vector<std::unique_ptr<EdgeOp>> ops_;
};

/// Continuous-relaxation cell used during search.
class SearchCell : public Module {
 public:
  SearchCell(int c_pp, int c_p, int c, bool reduction, bool reduction_prev, const CellTemplate& tmpl,
             const std::vector<LayerType>& ops, Precision precision, Rng& rng);
  Var forward(const Var& s0, const Var& s1, const Var& probs, const Context& ctx);
  void collect(const std::string& prefix, StateList& out) override;
  bool reduction() const { return reduction_; }
  int out_channels() const { return tmpl_.nodes * c_; }

 private:
  CellTemplate tmpl_;
  int c_;
  bool reduction_;
  Preprocess pre0_, pre1_;
  std::vector<std::unique_ptr<MixedEdge>> edges_;
};

/// Forward of a cell DAG given per-edge functions. Shared by the search
/// cell and the discrete cell.
template <class EdgeFn>
Var cell_dag(const Var& p0, const Var& p1, const Var& raw_s1, const CellTemplate& tmpl, EdgeFn&& edge) {
  std::vector<Var> states{p0, p1};
  for (int i = 0; i < tmpl.nodes; ++i) {
    std::vector<Var> terms;
    for (int j = 0; j < i + 2; ++j) {
      Var t = edge(i, j, states[j]);
      if (t) terms.push_back(std::move(t));
    }
    states.push_back(add_n(terms));
  }
  Var out = concat(std::vector<Var>(states.begin() + 2, states.end()));
  if (tmpl.inter_cell_skip) out = add(out, skip_adapt(raw_s1, out->shape()));
  return out;
}

BNAS_NS_END
