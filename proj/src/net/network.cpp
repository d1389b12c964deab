#include "net/network.hpp"

#include <algorithm>

#include "common/error.hpp"
#include "space/supernet.hpp"

BNAS_NS_BEGIN

void NetworkSpec::validate() const {
  BNAS_EXPECT(cells >= 3, InvalidArgument, "network: cells must be >= 3, got " + std::to_string(cells));
  BNAS_EXPECT(channels >= 1, InvalidArgument, "network: channels must be >= 1");
  BNAS_EXPECT(num_classes >= 1, InvalidArgument, "network: num_classes must be >= 1");
  BNAS_EXPECT(in_channels >= 1 && height >= 1 && width >= 1, InvalidArgument, "network: bad input shape");
  BNAS_EXPECT(stem_multiplier >= 1, InvalidArgument, "network: stem_multiplier must be >= 1");
  try {
    bnas::validate(genotype);
  } catch (const ParseError& e) {
    throw InvalidArgument(std::string("network: invalid genotype: ") + e.what());
  }
}

NetworkPlan plan_network(const NetworkSpec& spec) {
  spec.validate();
  NetworkPlan plan;
  plan.stem_channels = spec.stem_multiplier * spec.channels;
  const auto red = reduction_cells(spec.cells);
  int c_pp = plan.stem_channels, c_p = plan.stem_channels, c = spec.channels;
  int h_pp = spec.height, w_pp = spec.width, h = spec.height, w = spec.width;
  bool reduction_prev = false;
  for (int i = 0; i < spec.cells; ++i) {
    CellPlan cp;
    cp.index = i;
    cp.reduction = std::find(red.begin(), red.end(), i) != red.end();
    if (cp.reduction) c *= 2;
    cp.reduction_prev = reduction_prev;
    cp.c_pp = c_pp;
    cp.c_p = c_p;
    cp.c = c;
    cp.h_pp = h_pp;
    cp.w_pp = w_pp;
    cp.h = h;
    cp.w = w;
    cp.out_h = cp.reduction ? strided_extent(h, 2) : h;
    cp.out_w = cp.reduction ? strided_extent(w, 2) : w;
    cp.nodes = static_cast<int>(spec.genotype.cell(cp.reduction).size());
    if (reduction_prev && strided_extent(h_pp, 2) != h)
      throw GeometryError("cell " + std::to_string(i) + ": c(k-2) of " + std::to_string(h_pp) +
                          " rows cannot be reduced to " + std::to_string(h));
    if (!reduction_prev && h_pp != h)
      throw GeometryError("cell " + std::to_string(i) + ": cell inputs disagree on spatial size");
    plan.cells.push_back(cp);
    reduction_prev = cp.reduction;
    c_pp = c_p;
    h_pp = h;
    w_pp = w;
    c_p = cp.out_channels();
    h = cp.out_h;
    w = cp.out_w;
  }
  plan.final_channels = c_p;
  return plan;
}

DiscreteCell::DiscreteCell(const CellPlan& plan, const std::vector<GenotypeNode>& nodes, bool inter_cell_skip,
                           Precision precision, Rng& rng)
    : plan_(plan),
      tmpl_{plan.nodes, inter_cell_skip},
      pre0_(plan.c_pp, plan.c, plan.reduction_prev ? 2 : 1, precision, rng),
      pre1_(plan.c_p, plan.c, 1, precision, rng) {
  for (const auto& n : nodes)
    for (const auto& e : n.edges) {
      const int stride = plan.reduction && e.from < 2 ? 2 : 1;
      edges_.push_back({n.node - 2, e.from, make_edge_op(e.op, plan.c, stride, precision, rng)});
    }
}

Var DiscreteCell::forward(const Var& s0, const Var& s1, const Context& ctx) {
  Var p0 = pre0_.forward(s0, ctx);
  Var p1 = pre1_.forward(s1, ctx);
  try {
    return cell_dag(p0, p1, s1, tmpl_, [&](int node, int source, const Var& x) -> Var {
      Var sum;
      for (std::size_t k = 0; k < edges_.size(); ++k) {
        const Edge& e = edges_[k];
        if (e.node != node || e.from != source) continue;
        Var y;
        try {
          y = e.op->forward(x, ctx);
        } catch (const GeometryError& err) {
          throw GeometryError("edge " + std::to_string(source) + "->" + std::to_string(node + 2) + " (" +
                              layer_name(e.op->type()) + "): " + err.what());
        }
        sum = sum ? add(sum, y) : y;
      }
      return sum;
    });
  } catch (const GeometryError& err) {
    throw GeometryError("cell " + std::to_string(plan_.index) + ": " + err.what());
  }
}

void DiscreteCell::collect(const std::string& prefix, StateList& out) {
  pre0_.collect(prefix + "pre0.", out);
  pre1_.collect(prefix + "pre1.", out);
  for (std::size_t k = 0; k < edges_.size(); ++k)
    edges_[k].op->collect(prefix + "edge" + std::to_string(k) + "." + layer_name(edges_[k].op->type()) + ".", out);
}

Network::Network(const NetworkSpec& spec, Rng& rng)
    : spec_(spec),
      plan_(plan_network(spec)),
      stem_(spec.in_channels, plan_.stem_channels, ConvGeometry{3, 3, 1, 1, 1}, rng),
      stem_bn_(plan_.stem_channels) {
  for (const auto& cp : plan_.cells)
    cells_.push_back(std::make_unique<DiscreteCell>(cp, spec.genotype.cell(cp.reduction), spec.inter_cell_skip,
                                                    spec.precision, rng));
  classifier_ = std::make_unique<LinearLayer>(plan_.final_channels, spec.num_classes, rng);
}

Var Network::forward(const Var& x, const Context& ctx) {
  const Shape s = x->shape();
  BNAS_EXPECT(s.c == spec_.in_channels && s.h == spec_.height && s.w == spec_.width, GeometryError,
              "network expects inputs of " + std::to_string(spec_.in_channels) + "x" + std::to_string(spec_.height) +
                  "x" + std::to_string(spec_.width) + ", got " + s.str());
  Var s0 = stem_bn_.forward(stem_.forward(x), ctx);
  Var s1 = s0;
  for (auto& cell : cells_) {
    Var next = cell->forward(s0, s1, ctx);
    s0 = s1;
    s1 = next;
  }
  return classifier_->forward(global_avg_pool(s1));
}

void Network::collect(const std::string& prefix, StateList& out) {
  stem_.collect(prefix + "stem.conv.", out);
  stem_bn_.collect(prefix + "stem.bn.", out);
  for (std::size_t i = 0; i < cells_.size(); ++i) cells_[i]->collect(prefix + "cell" + std::to_string(i) + ".", out);
  classifier_->collect(prefix + "classifier.", out);
}

std::unique_ptr<Network> build_network(const NetworkSpec& spec, std::uint64_t seed) {
  Rng rng(seed, "network-init");
  return std::make_unique<Network>(spec, rng);
}

BNAS_NS_END
