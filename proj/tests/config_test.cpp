#include <gtest/gtest.h>

#include <fstream>

#include "common/error.hpp"
#include "config/config.hpp"
#include "support.hpp"

using namespace bnas;
using namespace testing_support;

namespace {

std::string parse_message(Config& c, const std::string& text) {
  try {
    c.load_text(text, "run.cfg");
  } catch (const ParseError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(Config, PaperDefaults) {
  const Config c;
  EXPECT_EQ(c.get("train.epochs"), "600");
  EXPECT_EQ(c.get("train.batch"), "256");
  EXPECT_DOUBLE_EQ(c.real_value("search.tau"), 7.7);
  EXPECT_EQ(c.train().schedule, ScheduleKind::OneCycle);
  EXPECT_EQ(c.search().nodes, 4);
  EXPECT_EQ(c.layer("seed"), ConfigLayer::Preset);
}

TEST(Config, PresetThenFileThenCli) {
  TempDir tmp;
  {
    std::ofstream f(tmp.file("a.cfg"));
    f << "# comment\n\ntrain.epochs = 7   # trailing\nseed=5\n";
  }
  Config c("tiny");
  EXPECT_EQ(c.get("train.epochs"), "2");
  c.set("seed", "9");  // CLI layer first; the file must not override it
  c.load_file(tmp.file("a.cfg"));
  EXPECT_EQ(c.get("train.epochs"), "7");
  EXPECT_EQ(c.layer("train.epochs"), ConfigLayer::File);
  EXPECT_EQ(c.get("seed"), "9");
  EXPECT_EQ(c.layer("seed"), ConfigLayer::Cli);
}

TEST(Config, ErrorsCarryOriginAndLine) {
  Config c;
  EXPECT_NE(parse_message(c, "seed = 1\nbogus.key = 3\n").find("run.cfg:2"), std::string::npos);
  EXPECT_NE(parse_message(c, "seed = 1\nbogus.key = 3\n").find("bogus.key"), std::string::npos);
  EXPECT_NE(parse_message(c, "train.epochs = ten\n").find("expected an integer"), std::string::npos);
  EXPECT_NE(parse_message(c, "just words\n").find("run.cfg:1: expected key = value"), std::string::npos);
  EXPECT_THROW(c.set("dataset", "imagenet"), ParseError);
  EXPECT_THROW(c.set("gamma", "nan"), ParseError);
  EXPECT_THROW(c.set("no_skip", "yes"), ParseError);
  EXPECT_THROW(c.get("nope"), ParseError);
  EXPECT_THROW(Config("huge"), UsageError);
  EXPECT_THROW(c.load_file("/nonexistent/x.cfg"), IoError);
}

TEST(Config, HashIsStableAndSensitive) {
  Config a("desk"), b("desk");
  EXPECT_EQ(a.hash(), b.hash());
  EXPECT_EQ(a.hash().size(), 16u);
  b.set("seed", "1");
  EXPECT_NE(a.hash(), b.hash());
  b.set("seed", "0");
  EXPECT_EQ(a.hash(), b.hash());  // layer does not enter the hash
  EXPECT_NE(Config("desk").hash(), Config("tiny").hash());
  EXPECT_EQ(a.canonical().substr(0, 12), "preset=desk\n");
}

TEST(Config, AblationFlagsReachTheStructs) {
  Config c;
  c.set("no_div", "true");
  c.set("no_skip", "1");
  c.set("keep_sepconv", "true");
  const SearchConfig s = c.search();
  EXPECT_EQ(s.lambda, 0.0);
  EXPECT_TRUE(s.flags.no_skip);
  EXPECT_TRUE(s.flags.keep_sepconv);
  EXPECT_TRUE(c.flags().no_skip);
}

TEST(Config, StudyLists) {
  Config c("tiny");
  c.set("study.seeds", "4, 5");
  c.set("study.layers", "bin_conv_3x3,sep_conv_5x5");
  const StudySpec s = c.study(StudyKind::QuantError);
  EXPECT_EQ(s.seeds, (std::vector<std::uint64_t>{4, 5}));
  EXPECT_EQ(s.layers, (std::vector<LayerType>{LayerType::BinConv3x3, LayerType::SepConv5x5}));
  EXPECT_EQ(s.epochs, 2);
  c.set("study.layers", "conv_11x11");
  EXPECT_THROW(c.study(StudyKind::QuantError), ParseError);
}

TEST(Config, SyntheticDatasetHonoursCaps) {
  Config c("tiny");
  c.set("dataset", "synthetic");
  c.set("train.images", "40");
  c.set("test.images", "10");
  const Dataset d = load_dataset(c);
  EXPECT_EQ(d.train.size(), 40u);
  EXPECT_EQ(d.test.size(), 10u);
  EXPECT_EQ(d.train.height, 16);
  c.set("dataset", "cifar10");
  c.set("data_dir", "/nonexistent");
  EXPECT_THROW(load_dataset(c), IoError);
}
