#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <set>

#include "common/error.hpp"
#include "data/dataset.hpp"
#include "search/search.hpp"
#include "space/ops.hpp"
#include "space/supernet.hpp"
#include "support.hpp"

using namespace bnas;
using namespace testing_support;

TEST(SearchSpace, BaseOpsInIdOrder) {
  const auto ops = search_space({});
  ASSERT_EQ(ops.size(), 7u);
  for (int i = 0; i < 7; ++i) EXPECT_EQ(static_cast<int>(ops[i]), i);
}

TEST(SearchSpace, FlagsReshapeTheList) {
  SpaceFlags f;
  f.no_zeroise = true;
  f.no_dilated = true;
  f.keep_sepconv = true;
  const auto ops = search_space(f);
  const std::vector<LayerType> want{LayerType::BinConv3x3, LayerType::BinConv5x5, LayerType::MaxPool3x3,
                                    LayerType::AvgPool3x3, LayerType::SepConv3x3, LayerType::SepConv5x5};
  EXPECT_EQ(ops, want);
}

TEST(SearchSpace, NamesRoundTrip) {
  for (int i = 0; i <= 8; ++i) {
    const auto t = static_cast<LayerType>(i);
    EXPECT_EQ(parse_layer(layer_name(t)), t);
  }
  EXPECT_THROW(parse_layer("conv_7x7"), ParseError);
  EXPECT_TRUE(is_parameterized(LayerType::BinDilConv5x5));
  EXPECT_FALSE(is_parameterized(LayerType::Zeroise));
  EXPECT_FALSE(is_parameterized(LayerType::AvgPool3x3));
}

TEST(CellTemplate, EdgeIndexingCoversEveryEdgeOnce) {
  for (int nodes = 1; nodes <= 5; ++nodes) {
    std::set<int> seen;
    for (int i = 0; i < nodes; ++i)
      for (int j = 0; j < i + 2; ++j) seen.insert(CellTemplate::edge_index(i, j));
    EXPECT_EQ(static_cast<int>(seen.size()), CellTemplate::edge_count(nodes));
    EXPECT_EQ(*seen.rbegin(), CellTemplate::edge_count(nodes) - 1);
  }
  EXPECT_EQ(CellTemplate::edge_count(4), 14);
}

TEST(SuperNet, ReductionCellPositions) {
  EXPECT_EQ(reduction_cells(8), (std::vector<int>{2, 5}));
  EXPECT_EQ(reduction_cells(20), (std::vector<int>{6, 13}));
  EXPECT_EQ(reduction_cells(3), (std::vector<int>{1, 2}));
}

TEST(SkipAdapt, WideInputFoldsChannelsModuloTarget) {
  Rng rng(2);
  const Tensor x = random_tensor({1, 5, 2, 2}, rng);
  const Tensor y = skip_adapt(constant(x), {1, 2, 2, 2})->value;
  for (int p = 0; p < 4; ++p) {
    const int h = p / 2, w = p % 2;
    EXPECT_FLOAT_EQ(y.at(0, 0, h, w), x.at(0, 0, h, w) + x.at(0, 2, h, w) + x.at(0, 4, h, w));
    EXPECT_FLOAT_EQ(y.at(0, 1, h, w), x.at(0, 1, h, w) + x.at(0, 3, h, w));
  }
  const Tensor z = skip_adapt(constant(x), {1, 7, 1, 1})->value;
  EXPECT_FLOAT_EQ(z.at(0, 6, 0, 0), 0.0f);
  EXPECT_NEAR(z.at(0, 4, 0, 0), (x.at(0, 4, 0, 0) + x.at(0, 4, 0, 1) + x.at(0, 4, 1, 0) + x.at(0, 4, 1, 1)) / 4, 1e-6);
}

TEST(SuperNet, ForwardShapeAndArchTables) {
  Rng rng(1);
  SuperNetConfig cfg;
  cfg.cells = 3;
  cfg.channels = 2;
  cfg.nodes = 2;
  SuperNet net(cfg, rng);
  EXPECT_EQ(net.arch().edges, CellTemplate::edge_count(2));
  EXPECT_EQ(net.arch().normal->value().shape(), (Shape{5, 7, 1, 1}));
  Context ctx;
  Var y = net.forward(constant(random_tensor({2, 3, 8, 8}, rng)), ctx);
  EXPECT_EQ(y->shape(), (Shape{2, 10, 1, 1}));
  EXPECT_EQ(net.state().count(ParamRole::Arch), 2u * 5 * 7);
}

TEST(Diversity, CoefficientAnchors) {
  EXPECT_DOUBLE_EQ(diversity_coefficient(1.0, 7.7, 0.0), 1.0);
  EXPECT_NEAR(diversity_coefficient(1.0, 7.7, 7.7), 1.0 / std::numbers::e, 1e-12);
  EXPECT_NEAR(diversity_coefficient(2.5, 7.7, 15.4), 2.5 * std::exp(-2.0), 1e-12);
  EXPECT_EQ(diversity_coefficient(0.0, 7.7, 3.0), 0.0);
  EXPECT_THROW(diversity_coefficient(1.0, 7.7, -1.0), Error);
}

TEST(Diversity, CoefficientIsMonotoneInTime) {
  double prev = diversity_coefficient(1.0, 7.7, 0.0);
  for (double t = 0.25; t < 60; t += 0.25) {
    const double c = diversity_coefficient(1.0, 7.7, t);
    EXPECT_LT(c, prev);
    EXPECT_GT(c, 0);
    prev = c;
  }
}

TEST(Diversity, UniformRowsHaveEntropyLnK) {
  ArchParams arch(search_space({}), 14);
  EXPECT_NEAR(arch_entropy(arch), 28 * std::log(7.0), 1e-9);
  arch.normal->value().at(0, 0, 0, 0) = 5;
  EXPECT_LT(arch_entropy(arch), 28 * std::log(7.0));
}

TEST(Diversity, LossIsCrossEntropyMinusWeightedEntropy) {
  Rng rng(3);
  ArchParams arch(search_space({}), 5);
  for (real& v : arch.normal->value().vec()) v = static_cast<real>(rng.normal());
  Var ce = constant(Tensor::scalar(2.0f));
  const double t = 3.1;
  const double want = 2.0 - diversity_coefficient(1.0, 7.7, t) * arch_entropy(arch);
  EXPECT_NEAR(search_loss(ce, arch, 1.0, 7.7, t)->value.item(), want, 1e-4);
  EXPECT_EQ(search_loss(ce, arch, 0.0, 7.7, t), ce);
}

TEST(Diversity, EntropyGradientPushesTowardUniform) {
  // One descent step on -H moves every row closer to uniform.
  ArchParams arch(search_space({}), 2);
  arch.normal->value().at(0, 0, 0, 0) = 2;
  const double before = arch_entropy(arch);
  Var loss = search_loss(constant(Tensor::scalar(0)), arch, 1.0, 7.7, 0.0);
  backward(loss);
  auto& v = arch.normal->value();
  for (std::size_t i = 0; i < v.size(); ++i) v[i] -= real(0.1) * arch.normal->grad()[i];
  EXPECT_GT(arch_entropy(arch), before);
}

TEST(ArgmaxOps, TiesGoToLowestIndexAndFractionCounts) {
  ArchParams arch(search_space({}), 2);
  // normal row 0: tie between ops 4 and 5 -> 4 (pool, not parameterised)
  arch.normal->value().at(0, 4, 0, 0) = 1;
  arch.normal->value().at(0, 5, 0, 0) = 1;
  // normal row 1: op 2 wins
  arch.normal->value().at(1, 2, 0, 0) = 3;
  // reduce rows stay uniform -> op 0
  EXPECT_EQ(argmax_ops(arch), (std::vector<int>{4, 2, 0, 0}));
  EXPECT_DOUBLE_EQ(param_op_fraction(arch), 0.75);
}

TEST(SearchSplit, HalvesArePureFunctionOfSeed) {
  SearchSplit a = search_split(101, 5), b = search_split(101, 5), c = search_split(101, 6);
  EXPECT_EQ(a.train, b.train);
  EXPECT_EQ(a.val, b.val);
  EXPECT_NE(a.train, c.train);
  EXPECT_EQ(a.train.size(), 50u);
  EXPECT_EQ(a.val.size(), 51u);
  std::set<std::size_t> all(a.train.begin(), a.train.end());
  all.insert(a.val.begin(), a.val.end());
  EXPECT_EQ(all.size(), 101u);
  EXPECT_EQ(*all.rbegin(), 100u);
}

namespace {

SearchConfig tiny_search(std::uint64_t seed) {
  SearchConfig c;
  c.epochs = 2;
  c.batch = 8;
  c.cells = 3;
  c.channels = 2;
  c.nodes = 2;
  c.seed = seed;
  return c;
}

}  // namespace

TEST(RunSearch, DeterministicPerSeedAndLogsEveryEpoch) {
  Dataset d = synthetic_dataset(48, 8, 1, 10, 8);
  SearchResult a = run_search(tiny_search(4), d);
  SearchResult b = run_search(tiny_search(4), d);
  EXPECT_EQ(a.arch.normal->value().vec(), b.arch.normal->value().vec());
  EXPECT_EQ(a.arch.reduce->value().vec(), b.arch.reduce->value().vec());
  ASSERT_EQ(a.log.records.size(), 2u);
  EXPECT_DOUBLE_EQ(a.log.records[0].div_coeff, 1.0);
  EXPECT_NEAR(a.log.records[1].div_coeff, std::exp(-1 / 7.7), 1e-12);
  for (const auto& r : a.log.records) {
    EXPECT_TRUE(std::isfinite(r.train_loss));
    EXPECT_EQ(r.argmax_ops.size(), 10u);
  }
  // Alpha moves off its uniform start.
  EXPECT_LT(arch_entropy(a.arch), 10 * std::log(7.0));
  SearchResult c = run_search(tiny_search(5), d);
  EXPECT_NE(a.arch.normal->value().vec(), c.arch.normal->value().vec());
}

TEST(RunSearch, LambdaZeroMatchesNoDiversityColumn) {
  Dataset d = synthetic_dataset(32, 8, 2, 10, 8);
  SearchConfig c = tiny_search(1);
  c.epochs = 1;
  c.lambda = 0;
  SearchResult r = run_search(c, d);
  EXPECT_EQ(r.log.records[0].div_coeff, 0.0);
}

TEST(RunSearch, RejectsTooFewImagesAndBadConfig) {
  Dataset d = synthetic_dataset(1, 1, 2, 10, 8);
  EXPECT_THROW(run_search(tiny_search(1), d), InvalidArgument);
  SearchConfig bad = tiny_search(1);
  bad.tau = 0;
  EXPECT_THROW(bad.validate(), Error);
}

TEST(RunSearch, CsvHeaderAndRows) {
  SearchLog log;
  SearchRecord r;
  r.epoch = 3;
  r.argmax_ops = {1, 6};
  log.records.push_back(r);
  const std::string csv = log.csv();
  EXPECT_EQ(csv.substr(0, csv.find('\n')),
            "epoch,train_loss,val_loss,entropy,div_coeff,param_op_fraction,grad_mag_sum,argmax_ops");
  EXPECT_NE(csv.find("\n3,"), std::string::npos);
  EXPECT_NE(csv.find("1;6"), std::string::npos);
}

TEST(ArchArtifact, SaveLoadRoundTripWithMetadata) {
  TempDir tmp;
  ArchParams arch(search_space({.no_skip = false, .no_zeroise = true}), 14);
  Rng rng(9);
  for (real& v : arch.reduce->value().vec()) v = static_cast<real>(rng.normal());
  save_arch(tmp.file("a.bin"), arch, {{"config_hash", "abc"}});
  Metadata meta;
  ArchParams back = load_arch(tmp.file("a.bin"), &meta);
  EXPECT_EQ(back.ops, arch.ops);
  EXPECT_EQ(back.edges, 14);
  EXPECT_EQ(back.reduce->value().vec(), arch.reduce->value().vec());
  ASSERT_EQ(meta.size(), 1u);
  EXPECT_EQ(meta[0].second, "abc");
}
