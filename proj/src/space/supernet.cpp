#include "space/supernet.hpp"

#include <algorithm>

#include "common/error.hpp"

BNAS_NS_BEGIN

std::vector<int> reduction_cells(int cells) { return {cells / 3, 2 * cells / 3}; }

SuperNet::SuperNet(const SuperNetConfig& config, Rng& rng)
    : config_(config),
      stem_(config.in_channels, config.stem_multiplier * config.channels, ConvGeometry{3, 3, 1, 1, 1}, rng),
      stem_bn_(config.stem_multiplier * config.channels) {
  BNAS_EXPECT(config.cells >= 3, ContractViolation, "supernet needs at least 3 cells");
  BNAS_EXPECT(config.channels >= 1, ContractViolation, "supernet needs at least 1 channel");
  std::vector<LayerType> ops = config.ops.empty() ? search_space(config.flags) : config.ops;
  BNAS_EXPECT(!ops.empty(), ContractViolation, "search space is empty");
  CellTemplate tmpl{config.nodes, !config.flags.no_skip};
  arch_ = ArchParams(ops, tmpl.edge_count());

  const auto red = reduction_cells(config.cells);
  int c_curr = config.stem_multiplier * config.channels;
  int c_pp = c_curr, c_p = c_curr;
  c_curr = config.channels;
  bool reduction_prev = false;
  for (int i = 0; i < config.cells; ++i) {
    const bool reduction = std::find(red.begin(), red.end(), i) != red.end();
    if (reduction) c_curr *= 2;
    cells_.push_back(std::make_unique<SearchCell>(c_pp, c_p, c_curr, reduction, reduction_prev, tmpl, ops,
                                                  config.precision, rng));
    reduction_prev = reduction;
    c_pp = c_p;
    c_p = cells_.back()->out_channels();
  }
  classifier_ = std::make_unique<LinearLayer>(c_p, config.num_classes, rng);
}

Var SuperNet::forward(const Var& x, const Context& ctx) {
  Var probs_normal = row_softmax(arch_.normal->var);
  Var probs_reduce = row_softmax(arch_.reduce->var);
  Var s0 = stem_bn_.forward(stem_.forward(x), ctx);
  Var s1 = s0;
  for (auto& cell : cells_) {
    Var next = cell->forward(s0, s1, cell->reduction() ? probs_reduce : probs_normal, ctx);
    s0 = s1;
    s1 = next;
  }
  return classifier_->forward(global_avg_pool(s1));
}

void SuperNet::collect(const std::string& prefix, StateList& out) {
  stem_.collect(prefix + "stem.conv.", out);
  stem_bn_.collect(prefix + "stem.bn.", out);
  for (std::size_t i = 0; i < cells_.size(); ++i) cells_[i]->collect(prefix + "cell" + std::to_string(i) + ".", out);
  classifier_->collect(prefix + "classifier.", out);
  out.params.push_back({prefix + "arch.normal", arch_.normal.get()});
  out.params.push_back({prefix + "arch.reduce", arch_.reduce.get()});
}

BNAS_NS_END
