#include <gtest/gtest.h>

#include <fstream>

#include "common/error.hpp"
#include "genotype/genotype.hpp"
#include "space/cell.hpp"
#include "support.hpp"

using namespace bnas;
using namespace testing_support;

namespace {

const std::vector<LayerType> kOps = search_space({});

std::vector<double> normalised(std::vector<double> p) {
  double s = 0;
  for (double v : p) s += v;
  for (double& v : p) v /= s;
  return p;
}

std::string message_of(const std::string& json) {
  try {
    deserialize(json);
  } catch (const ParseError& e) {
    return e.what();
  }
  return "";
}

Genotype sample_genotype() {
  Genotype g;
  g.gamma = 1.5;
  g.seed = 7;
  g.config_hash = "00ff";
  g.normal = {{2, {{0, LayerType::BinConv3x3}, {1, LayerType::Zeroise}}},
              {3, {{1, LayerType::MaxPool3x3}, {2, LayerType::BinDilConv5x5}}}};
  g.reduce = {{2, {{0, LayerType::AvgPool3x3}, {1, LayerType::BinConv5x5}}},
              {3, {{0, LayerType::Zeroise}, {2, LayerType::BinDilConv3x3}}}};
  return g;
}

// Independent model of the selection rule: the winner and the quantity
// used to rank edges.
std::pair<LayerType, double> oracle_select(const std::vector<double>& p, double gamma) {
  double zero = -1;
  int best = -1;
  for (std::size_t o = 0; o < kOps.size(); ++o) {
    if (kOps[o] == LayerType::Zeroise) {
      zero = p[o] / gamma;
      continue;
    }
    if (best < 0 || p[o] > p[best]) best = static_cast<int>(o);
  }
  if (zero > p[best]) return {LayerType::Zeroise, zero};
  return {kOps[best], p[best]};
}

}  // namespace

TEST(SelectOp, GammaOneIsPlainArgmax) {
  Rng rng(1);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<double> p(7);
    for (double& v : p) v = rng.uniform(0.01, 1);
    p = normalised(p);
    const auto it = std::max_element(p.begin(), p.end());
    EXPECT_EQ(select_op(p, kOps, 1.0), kOps[it - p.begin()]);
  }
}

TEST(SelectOp, WorkedGammaExample) {
  // zeroise 0.40, conv 0.35, the rest share 0.25.
  std::vector<double> p{0.35, 0.05, 0.05, 0.05, 0.05, 0.05, 0.40};
  EXPECT_EQ(select_op(p, kOps, 1.0), LayerType::Zeroise);
  double strength = 0;
  EXPECT_EQ(select_op(p, kOps, 2.0, &strength), LayerType::BinConv3x3);  // 0.40 / 2 < 0.35
  EXPECT_DOUBLE_EQ(strength, 0.35);
  EXPECT_EQ(select_op(p, kOps, 0.5, &strength), LayerType::Zeroise);
  EXPECT_DOUBLE_EQ(strength, 0.8);
}

TEST(SelectOp, ZeroiseNeedsStrictWinAndTiesGoLow) {
  std::vector<double> p{0.2, 0.1, 0.1, 0.1, 0.1, 0.2, 0.2};
  EXPECT_EQ(select_op(p, kOps, 1.0), LayerType::BinConv3x3);
  std::vector<double> q{0.1, 0.1, 0.3, 0.3, 0.05, 0.05, 0.1};
  EXPECT_EQ(select_op(q, kOps, 1.0), LayerType::BinDilConv3x3);
}

TEST(SelectOp, LargerGammaNeverAddsZeroise) {
  Rng rng(2);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<double> p(7);
    for (double& v : p) v = rng.uniform(0.01, 1);
    p = normalised(p);
    const bool at1 = select_op(p, kOps, 1.0) == LayerType::Zeroise;
    const bool at3 = select_op(p, kOps, 3.0) == LayerType::Zeroise;
    EXPECT_TRUE(at1 || !at3);
  }
}

TEST(SelectOp, RejectsNonPositiveGamma) {
  std::vector<double> p(7, 1.0 / 7);
  EXPECT_THROW(select_op(p, kOps, 0.0), InvalidArgument);
  EXPECT_THROW(select_op(p, kOps, -1.0), InvalidArgument);
}

TEST(Derive, MatchesBruteForceOracle) {
  Rng rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    const int nodes = 1 + static_cast<int>(rng.below(4));
    ArchParams arch(kOps, CellTemplate::edge_count(nodes));
    for (Parameter* t : {arch.normal.get(), arch.reduce.get()})
      for (real& v : t->value().vec()) v = static_cast<real>(rng.normal() * 2);
    // Some exact ties between edges.
    if (trial % 4 == 0) arch.normal->value().vec().assign(arch.normal->value().size(), 0);
    const double gamma = trial % 3 == 0 ? 1.0 : rng.uniform(0.3, 3);
    const Genotype g = derive(arch, gamma);
    ASSERT_EQ(g.normal.size(), static_cast<std::size_t>(nodes));
    for (bool red : {false, true}) {
      for (int i = 0; i < nodes; ++i) {
        std::vector<std::pair<LayerType, double>> sel;
        for (int j = 0; j < i + 2; ++j) sel.push_back(oracle_select(arch.probs(red, CellTemplate::edge_index(i, j)), gamma));
        // An edge survives when fewer than two others beat it (stronger,
        // or equally strong from a lower source).
        std::vector<GenotypeEdge> want;
        for (int j = 0; j < i + 2; ++j) {
          int beaten = 0;
          for (int k = 0; k < i + 2; ++k)
            if (k != j && (sel[k].second > sel[j].second || (sel[k].second == sel[j].second && k < j))) ++beaten;
          if (beaten < 2) want.push_back({j, sel[j].first});
        }
        const GenotypeNode& got = g.cell(red)[i];
        EXPECT_EQ(got.node, i + 2);
        EXPECT_EQ(got.edges, want) << "trial " << trial << " node " << i << (red ? " reduce" : " normal");
      }
    }
  }
}

TEST(Derive, VersionAndProvenance) {
  ArchParams arch(kOps, 14);
  Genotype g = derive(arch, 1.0, 42, "feed");
  EXPECT_EQ(g.version, kGenotypeVersion);
  EXPECT_EQ(g.seed, 42u);
  EXPECT_EQ(g.config_hash, "feed");
  validate(g);
  ArchParams sep(search_space({.keep_sepconv = true}), 14);
  sep.normal->value().at(0, 7, 0, 0) = 5;
  EXPECT_EQ(derive(sep, 1.0).version, kGenotypeVersionSepConv);
}

TEST(GenotypeJson, RoundTripIsIdentity) {
  const Genotype g = sample_genotype();
  const std::string text = serialize(g);
  EXPECT_EQ(deserialize(text), g);
  EXPECT_EQ(serialize(deserialize(text)), text);
  TempDir tmp;
  save_genotype(tmp.file("g.json"), g);
  EXPECT_EQ(load_genotype(tmp.file("g.json")), g);
}

TEST(GenotypeJson, CanonicalFieldOrder) {
  const std::string text = serialize(sample_genotype());
  const auto v = text.find("\"version\""), ga = text.find("\"gamma\""), n = text.find("\"normal\""),
             r = text.find("\"reduce\""), p = text.find("\"provenance\"");
  EXPECT_LT(v, ga);
  EXPECT_LT(ga, n);
  EXPECT_LT(n, r);
  EXPECT_LT(r, p);
}

TEST(GenotypeJson, ErrorsNameTheFieldPath) {
  std::string good = serialize(sample_genotype());
  auto with = [&](const std::string& from, const std::string& to) {
    std::string s = good;
    const auto at = s.find(from);
    EXPECT_NE(at, std::string::npos) << from;
    return s.replace(at, from.size(), to);
  };
  EXPECT_NE(message_of(with("\"bin_dil_conv_5x5\"", "\"conv_9x9\"")).find("normal[1].edges[1].op"),
            std::string::npos);
  EXPECT_NE(message_of(with("\"gamma\"", "\"gama\"")).find("gama: unknown field"), std::string::npos);
  EXPECT_NE(message_of(with("\"version\": 1", "\"version\": 9")).find("version"), std::string::npos);
  EXPECT_NE(message_of("{").find("malformed"), std::string::npos);
  EXPECT_NE(message_of(with("\"bin_conv_3x3\"", "\"sep_conv_3x3\"")).find("requires version"), std::string::npos);
}

TEST(GenotypeJson, RejectsBrokenWiring) {
  Genotype g = sample_genotype();
  g.normal[0].edges[1].from = 2;  // node 2 cannot read itself
  EXPECT_THROW(validate(g), ParseError);
  g = sample_genotype();
  g.reduce[1].edges.pop_back();
  EXPECT_THROW(validate(g), ParseError);
  g = sample_genotype();
  g.gamma = 0;
  EXPECT_THROW(validate(g), ParseError);
}

TEST(GenotypeJson, MissingFileIsIoError) { EXPECT_THROW(load_genotype("/nonexistent/g.json"), IoError); }

TEST(Genotype, OpProportion) {
  const Genotype g = sample_genotype();
  EXPECT_DOUBLE_EQ(op_proportion(g, LayerType::Zeroise), 2.0 / 8.0);
  EXPECT_TRUE(uses_op(g, LayerType::BinDilConv3x3));
  EXPECT_FALSE(uses_op(g, LayerType::SepConv3x3));
}
