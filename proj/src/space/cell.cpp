#include "space/cell.hpp"

#include "autodiff/ops.hpp"
#include "common/error.hpp"

BNAS_NS_BEGIN

ArchParams::ArchParams(std::vector<LayerType> op_list, int edge_count)
    : ops(std::move(op_list)), edges(edge_count) {
  const int k = static_cast<int>(ops.size());
  normal = std::make_shared<Parameter>(Tensor({edges, k, 1, 1}), ParamRole::Arch);
  reduce = std::make_shared<Parameter>(Tensor({edges, k, 1, 1}), ParamRole::Arch);
}

std::vector<double> ArchParams::probs(bool reduction, int edge) const {
  const Tensor& t = table(reduction).value();
  const std::size_t k = ops.size();
  return softmax(t.span().subspan(static_cast<std::size_t>(edge) * k, k));
}

ArchParams ArchParams::clone() const {
  ArchParams c(ops, edges);
  c.normal->value() = normal->value();
  c.reduce->value() = reduce->value();
  return c;
}

MixedEdge::MixedEdge(const std::vector<LayerType>& ops, int channels, int stride, Precision precision, Rng& rng) {
  for (LayerType t : ops) ops_.push_back(make_edge_op(t, channels, stride, precision, rng));
}

Var MixedEdge::forward(const Var& x, const Var& probs, int row, const Context& ctx) {
  std::vector<Var> outs;
  outs.reserve(ops_.size());
  for (auto& op : ops_) outs.push_back(op->forward(x, ctx));
  return weighted_sum(outs, probs, row);
}

void MixedEdge::collect(const std::string& prefix, StateList& out) {
  for (std::size_t i = 0; i < ops_.size(); ++i)
    ops_[i]->collect(prefix + layer_name(ops_[i]->type()) + ".", out);
}

SearchCell::SearchCell(int c_pp, int c_p, int c, bool reduction, bool reduction_prev, const CellTemplate& tmpl,
                       const std::vector<LayerType>& ops, Precision precision, Rng& rng)
    : tmpl_(tmpl),
      c_(c),
      reduction_(reduction),
      pre0_(c_pp, c, reduction_prev ? 2 : 1, precision, rng),
      pre1_(c_p, c, 1, precision, rng) {
  for (int i = 0; i < tmpl.nodes; ++i)
    for (int j = 0; j < i + 2; ++j) {
      const int stride = reduction && j < 2 ? 2 : 1;
      edges_.push_back(std::make_unique<MixedEdge>(ops, c, stride, precision, rng));
    }
}

Var SearchCell::forward(const Var& s0, const Var& s1, const Var& probs, const Context& ctx) {
  Var p0 = pre0_.forward(s0, ctx);
  Var p1 = pre1_.forward(s1, ctx);
  return cell_dag(p0, p1, s1, tmpl_, [&](int node, int source, const Var& x) {
    const int e = CellTemplate::edge_index(node, source);
    return edges_[e]->forward(x, probs, e, ctx);
  });
}

void SearchCell::collect(const std::string& prefix, StateList& out) {
  pre0_.collect(prefix + "pre0.", out);
  pre1_.collect(prefix + "pre1.", out);
  for (std::size_t e = 0; e < edges_.size(); ++e) edges_[e]->collect(prefix + "edge" + std::to_string(e) + ".", out);
}

BNAS_NS_END
