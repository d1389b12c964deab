// Drives the installed command-line tool as a subprocess.
#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace {

namespace fs = std::filesystem;

struct Outcome {
  int code = -1;
  std::string out;
};

Outcome run(const std::string& args) {
  const std::string cmd = std::string(BNAS_CLI_PATH) + " " + args + " 2>&1";
  Outcome r;
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) return r;
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, n);
  const int status = pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    std::string tmpl = (fs::temp_directory_path() / "bnas_cli_XXXXXX").string();
    dir_ = mkdtemp(tmpl.data());
  }
  void TearDown() override {
    std::error_code ec;
    fs::remove_all(dir_, ec);
  }
  std::string path(const char* name) const { return (dir_ / name).string(); }

  // Globals shared by every pipeline step: a seconds-scale synthetic budget.
  static std::string tiny() {
    return "--preset tiny --dataset synthetic --seed 7 --set synthetic.train=48 --set synthetic.test=16 "
           "--set synthetic.size=8 --set search.epochs=1 --set search.batch=8 --set search.cells=3 "
           "--set search.channels=2 --set search.nodes=2 --set train.epochs=1 --set train.batch=16 ";
  }

  fs::path dir_;
};

int line_count(const std::string& s) {
  int n = 0;
  for (char c : s) n += c == '\n';
  return n;
}

}  // namespace

TEST_F(Cli, HelpListsEverySubcommand) {
  const Outcome r = run("--help");
  EXPECT_EQ(r.code, 0);
  for (const char* sub : {"search", "derive", "train", "eval", "flops", "study", "export"})
    EXPECT_NE(r.out.find(sub), std::string::npos) << sub;
}

TEST_F(Cli, ErrorsAreOneLineWithExitCodes) {
  Outcome r = run("");
  EXPECT_EQ(r.code, 2);
  EXPECT_EQ(r.out.rfind("bnas: error: usage_error: ", 0), 0u) << r.out;
  EXPECT_EQ(line_count(r.out), 1);

  r = run("flops --genotype " + path("missing.json"));
  EXPECT_EQ(r.code, 1);
  EXPECT_EQ(r.out.rfind("bnas: error: io_error: ", 0), 0u) << r.out;
  EXPECT_EQ(line_count(r.out), 1);

  r = run("--preset enormous flops --genotype x.json");
  EXPECT_EQ(r.code, 2);

  r = run("--set no.such.key=1 flops --genotype x.json");
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.out.find("no.such.key"), std::string::npos) << r.out;

  r = run("study table9");
  EXPECT_EQ(r.code, 2);
}

TEST_F(Cli, SearchDeriveTrainEvalExport) {
  const std::string g = tiny();
  Outcome r = run(g + "search --out " + path("a.bin") + " --log " + path("s.csv"));
  ASSERT_EQ(r.code, 0) << r.out;
  r = run(g + "search --out " + path("b.bin") + " --log " + path("s2.csv"));
  ASSERT_EQ(r.code, 0) << r.out;
  auto bytes = [](const std::string& p) {
    std::ifstream f(p, std::ios::binary);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
  };
  EXPECT_EQ(bytes(path("a.bin")), bytes(path("b.bin")));

  r = run(g + "derive --arch " + path("a.bin") + " --gamma 0");
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.out.find("usage_error"), std::string::npos);
  r = run(g + "derive --arch " + path("a.bin") + " --gamma 1.5 --out " + path("g.json"));
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_NE(bytes(path("g.json")).find("\"gamma\": 1.5"), std::string::npos);

  r = run(g + "train --genotype " + path("g.json") + " --out " + path("m.ckpt") + " --metrics " + path("m.csv") +
          " --grads " + path("gr.csv") + " --export " + path("f1.bin"));
  ASSERT_EQ(r.code, 0) << r.out;
  r = run(g + "eval --genotype " + path("g.json") + " --checkpoint " + path("m.ckpt"));
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("top1"), std::string::npos) << r.out;
  r = run(g + "export --genotype " + path("g.json") + " --checkpoint " + path("m.ckpt") + " --out " + path("f2.bin"));
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_EQ(bytes(path("f1.bin")), bytes(path("f2.bin")));

  r = run(g + "flops --genotype " + path("g.json") + " --size 8 --csv " + path("fl.csv"));
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_TRUE(fs::exists(path("fl.csv")));
}

TEST_F(Cli, NoZeroiseConflictsWithAZeroiseGenotype) {
  std::ofstream(path("g.json")) << R"({"version": 1, "gamma": 1.0,
    "normal": [{"node": 2, "edges": [{"from": 0, "op": "zeroise"}, {"from": 1, "op": "bin_conv_3x3"}]}],
    "reduce": [{"node": 2, "edges": [{"from": 0, "op": "max_pool_3x3"}, {"from": 1, "op": "bin_conv_3x3"}]}],
    "provenance": {"seed": 0, "config_hash": ""}})";
  const Outcome r = run(tiny() + "--no-zeroise train --genotype " + path("g.json"));
  EXPECT_EQ(r.code, 2) << r.out;
  EXPECT_NE(r.out.find("usage_error"), std::string::npos);
}
