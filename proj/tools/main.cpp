// bnas command line. Talks to the library through the C interface only.

#include <bnas/bnas.h>

#include <CLI11.hpp>
#include <cstdio>
#include <memory>
#include <string>
#include <vector>

namespace {

struct Failure {
  bnas_status status;
  std::string message;
};

void check(bnas_status s) {
  if (s != BNAS_OK) throw Failure{s, bnas_last_error()};
}

[[noreturn]] void usage(const std::string& msg) { throw Failure{BNAS_ERR_USAGE, msg}; }

template <class T, void (*Free)(T*)>
struct Deleter {
  void operator()(T* p) const { Free(p); }
};
using ConfigPtr = std::unique_ptr<bnas_config, Deleter<bnas_config, bnas_config_free>>;
using DatasetPtr = std::unique_ptr<bnas_dataset, Deleter<bnas_dataset, bnas_dataset_free>>;
using ArchPtr = std::unique_ptr<bnas_arch, Deleter<bnas_arch, bnas_arch_free>>;
using GenotypePtr = std::unique_ptr<bnas_genotype, Deleter<bnas_genotype, bnas_genotype_free>>;
using ModelPtr = std::unique_ptr<bnas_model, Deleter<bnas_model, bnas_model_free>>;

// Runs a text-producing call twice: once for the size, once for the data.
template <class F>
std::string text_of(F&& f) {
  std::size_t needed = 0;
  check(f(nullptr, 0, &needed));
  std::string s(needed, '\0');
  check(f(s.data(), s.size(), &needed));
  s.resize(needed ? needed - 1 : 0);
  return s;
}

struct Options {
  std::string preset = "paper";
  std::string config_file;
  std::vector<std::string> sets;
  std::string seed, data_dir, dataset, precision;
  bool no_skip = false, no_zeroise = false, no_div = false, no_dilated = false, keep_sepconv = false;
};

void set(bnas_config* c, const std::string& key, const std::string& value) {
  if (bnas_config_set(c, key.c_str(), value.c_str()) != BNAS_OK) usage(bnas_last_error());
}

ConfigPtr make_config(const Options& o) {
  bnas_config* raw = nullptr;
  if (bnas_config_new(o.preset.c_str(), &raw) != BNAS_OK) usage(bnas_last_error());
  ConfigPtr c(raw);
  if (!o.config_file.empty()) check(bnas_config_load_file(c.get(), o.config_file.c_str()));
  for (const auto& kv : o.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) usage("--set expects KEY=VALUE, got '" + kv + "'");
    set(c.get(), kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (!o.seed.empty()) set(c.get(), "seed", o.seed);
  if (!o.data_dir.empty()) set(c.get(), "data_dir", o.data_dir);
  if (!o.dataset.empty()) set(c.get(), "dataset", o.dataset);
  if (!o.precision.empty()) set(c.get(), "precision", o.precision);
  if (o.no_skip) set(c.get(), "no_skip", "true");
  if (o.no_zeroise) set(c.get(), "no_zeroise", "true");
  if (o.no_div) set(c.get(), "no_div", "true");
  if (o.no_dilated) set(c.get(), "no_dilated", "true");
  if (o.keep_sepconv) set(c.get(), "keep_sepconv", "true");
  return c;
}

std::string hash_of(const bnas_config* c) {
  char h[17];
  check(bnas_config_hash(c, h));
  return h;
}

DatasetPtr load_data(const bnas_config* c) {
  bnas_dataset* d = nullptr;
  check(bnas_dataset_load(c, &d));
  return DatasetPtr(d);
}

GenotypePtr load_genotype(const std::string& path) {
  bnas_genotype* g = nullptr;
  check(bnas_genotype_load(path.c_str(), &g));
  return GenotypePtr(g);
}

void apply_budget(bnas_config* c, int cells, int channels) {
  if (cells > 0) set(c, "net.cells", std::to_string(cells));
  if (channels > 0) set(c, "net.channels", std::to_string(channels));
}

ModelPtr build_model(const bnas_config* c, const bnas_genotype* g, const bnas_dataset* d) {
  bnas_model* m = nullptr;
  check(bnas_model_build(c, g, d, &m));
  return ModelPtr(m);
}

void print_eval(const bnas_eval_result& r) {
  std::printf("top1=%.2f top5=%.2f loss=%.4f count=%zu\n", r.top1, r.top5, r.loss, r.count);
  std::printf("per_class=");
  for (int i = 0; i < r.num_classes; ++i) std::printf(i ? ",%.2f" : "%.2f", r.per_class[i]);
  std::printf("\n");
}

int run(int argc, char** argv) {
  CLI::App app{"Binary architecture search: search, derive, train, evaluate, count, study, export"};
  app.require_subcommand(1);
  app.fallthrough();
  Options o;
  app.add_option("--preset", o.preset, "Preset defaults: paper, desk, tiny")->capture_default_str();
  app.add_option("--config", o.config_file, "key=value config file (overrides the preset)");
  app.add_option("--set", o.sets, "KEY=VALUE override (repeatable, beats the config file)");
  app.add_option("--seed", o.seed, "Master seed");
  app.add_option("--data-dir", o.data_dir, "Directory holding the dataset files");
  app.add_option("--dataset", o.dataset, "cifar10, mnist or synthetic");
  app.add_option("--precision", o.precision, "binary or float");
  app.add_flag("--no-skip", o.no_skip, "Drop the inter-cell skip connections");
  app.add_flag("--no-zeroise", o.no_zeroise, "Remove zeroise from the search space");
  app.add_flag("--no-div", o.no_div, "Disable the diversity regulariser");
  app.add_flag("--no-dilated", o.no_dilated, "Remove dilated convolutions from the search space");
  app.add_flag("--keep-sepconv", o.keep_sepconv, "Add separable convolutions to the search space");

  auto* search = app.add_subcommand("search", "Run the architecture search");
  std::string arch_out = "arch.bin", log_out = "search_log.csv";
  search->add_option("--out", arch_out, "Architecture parameters file")->capture_default_str();
  search->add_option("--log", log_out, "Per-epoch search log CSV")->capture_default_str();

  auto* derive = app.add_subcommand("derive", "Discretise searched parameters into a genotype");
  std::string arch_in = "arch.bin", genotype_out;
  double gamma = 0;
  derive->add_option("--arch", arch_in, "Architecture parameters file")->capture_default_str();
  auto* gamma_opt = derive->add_option("--gamma", gamma, "Zeroise preference divisor (> 0)");
  derive->add_option("--out", genotype_out, "Genotype JSON path (stdout if omitted)");

  int cells = 0, channels = 0;
  std::string genotype_in, checkpoint, metrics_out = "metrics.csv", grads_out = "grads.csv", frozen_out;
  auto budget = [&](CLI::App* s) {
    s->add_option("--genotype", genotype_in, "Genotype JSON")->required();
    s->add_option("--cells", cells, "Number of cells (net.cells)");
    s->add_option("--channels", channels, "Initial channels (net.channels)");
  };

  auto* train = app.add_subcommand("train", "Train a network built from a genotype");
  budget(train);
  int epochs = 0;
  std::string ckpt_out = "model.ckpt";
  train->add_option("--epochs", epochs, "Training epochs (train.epochs)");
  train->add_option("--out", ckpt_out, "Checkpoint path")->capture_default_str();
  train->add_option("--metrics", metrics_out, "Per-epoch metrics CSV")->capture_default_str();
  train->add_option("--grads", grads_out, "Per-step gradient magnitude CSV")->capture_default_str();
  train->add_option("--export", frozen_out, "Also write a frozen inference checkpoint");

  auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint on the test split");
  budget(eval);
  eval->add_option("--checkpoint", checkpoint, "Checkpoint from train")->required();

  auto* flops = app.add_subcommand("flops", "Count operations and parameters of a genotype's network");
  budget(flops);
  std::string reference, flops_csv;
  int size = 32, in_channels = 3;
  flops->add_option("--reference", reference, "Genotype whose full-precision twin is the baseline");
  flops->add_option("--csv", flops_csv, "Per-layer breakdown CSV");
  flops->add_option("--size", size, "Input height and width")->capture_default_str();
  flops->add_option("--in-channels", in_channels, "Input channels")->capture_default_str();

  auto* study = app.add_subcommand("study", "Run a scripted study");
  std::string study_kind, results = "results";
  study->add_option("kind", study_kind, "quant-error, ablation, sepconv or skip-probe")
      ->required()
      ->check(CLI::IsMember({"quant-error", "ablation", "sepconv", "skip-probe"}));
  study->add_option("--genotype", genotype_in, "Genotype JSON (skip-probe)");
  study->add_option("--results", results, "Results root")->capture_default_str();

  auto* exp = app.add_subcommand("export", "Write a frozen inference checkpoint");
  budget(exp);
  exp->add_option("--checkpoint", checkpoint, "Checkpoint from train")->required();
  exp->add_option("--out", frozen_out, "Frozen checkpoint path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    usage(e.what());
  }

  ConfigPtr config = make_config(o);
  bnas_config* c = config.get();

  if (*search) {
    DatasetPtr data = load_data(c);
    bnas_arch* raw = nullptr;
    check(bnas_search(c, data.get(), log_out.c_str(), &raw));
    ArchPtr arch(raw);
    check(bnas_arch_save(arch.get(), arch_out.c_str()));
    double entropy = 0;
    check(bnas_arch_info(arch.get(), &entropy, nullptr, nullptr));
    std::printf("arch=%s log=%s mean_row_entropy=%.6f config_hash=%s\n", arch_out.c_str(), log_out.c_str(), entropy,
                hash_of(c).c_str());
  } else if (*derive) {
    bnas_arch* raw = nullptr;
    check(bnas_arch_load(arch_in.c_str(), &raw));
    ArchPtr arch(raw);
    if (!*gamma_opt) {
      std::string g = text_of([&](char* b, std::size_t n, std::size_t* need) {
        return bnas_config_get(c, "gamma", b, n, need);
      });
      gamma = std::stod(g);
    }
    bnas_genotype* g = nullptr;
    check(bnas_derive(arch.get(), gamma, &g));
    GenotypePtr genotype(g);
    if (genotype_out.empty()) {
      std::printf("%s\n", text_of([&](char* b, std::size_t n, std::size_t* need) {
                    return bnas_genotype_json(genotype.get(), b, n, need);
                  }).c_str());
    } else {
      check(bnas_genotype_save(genotype.get(), genotype_out.c_str()));
      std::printf("genotype=%s\n", genotype_out.c_str());
    }
  } else if (*train) {
    apply_budget(c, cells, channels);
    if (epochs > 0) set(c, "train.epochs", std::to_string(epochs));
    GenotypePtr g = load_genotype(genotype_in);
    DatasetPtr data = load_data(c);
    ModelPtr model = build_model(c, g.get(), data.get());
    check(bnas_model_train(model.get(), c, data.get(), metrics_out.c_str(), grads_out.c_str()));
    check(bnas_model_save(model.get(), ckpt_out.c_str()));
    if (!frozen_out.empty()) check(bnas_model_export(model.get(), frozen_out.c_str()));
    bnas_eval_result r;
    check(bnas_model_evaluate(model.get(), data.get(), &r));
    std::printf("checkpoint=%s metrics=%s config_hash=%s\n", ckpt_out.c_str(), metrics_out.c_str(),
                hash_of(c).c_str());
    print_eval(r);
  } else if (*eval) {
    apply_budget(c, cells, channels);
    GenotypePtr g = load_genotype(genotype_in);
    DatasetPtr data = load_data(c);
    ModelPtr model = build_model(c, g.get(), data.get());
    check(bnas_model_load(model.get(), checkpoint.c_str()));
    bnas_eval_result r;
    check(bnas_model_evaluate(model.get(), data.get(), &r));
    print_eval(r);
  } else if (*flops) {
    apply_budget(c, cells, channels);
    GenotypePtr g = load_genotype(genotype_in);
    GenotypePtr ref;
    if (!reference.empty()) ref = load_genotype(reference);
    const char* csv = flops_csv.empty() ? nullptr : flops_csv.c_str();
    const std::string text = text_of([&](char* b, std::size_t n, std::size_t* need) {
      return bnas_flops(c, g.get(), ref.get(), in_channels, size, size, nullptr, csv, b, n, need);
    });
    std::fputs(text.c_str(), stdout);
  } else if (*study) {
    DatasetPtr data = load_data(c);
    GenotypePtr g;
    if (!genotype_in.empty()) g = load_genotype(genotype_in);
    const std::string dir = text_of([&](char* b, std::size_t n, std::size_t* need) {
      return bnas_study_run(c, study_kind.c_str(), data.get(), g.get(), results.c_str(), b, n, need);
    });
    std::printf("results=%s\n", dir.c_str());
  } else if (*exp) {
    apply_budget(c, cells, channels);
    GenotypePtr g = load_genotype(genotype_in);
    DatasetPtr data;
    // Geometry comes from the dataset when one is configured; 3x32x32 otherwise.
    std::string dataset = text_of([&](char* b, std::size_t n, std::size_t* need) {
      return bnas_config_get(c, "dataset", b, n, need);
    });
    std::string dir = text_of([&](char* b, std::size_t n, std::size_t* need) {
      return bnas_config_get(c, "data_dir", b, n, need);
    });
    if (dataset == "synthetic" || !dir.empty()) data = load_data(c);
    ModelPtr model = build_model(c, g.get(), data.get());
    check(bnas_model_load(model.get(), checkpoint.c_str()));
    check(bnas_model_export(model.get(), frozen_out.c_str()));
    std::printf("frozen=%s\n", frozen_out.c_str());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const Failure& f) {
    std::string msg = f.message;
    for (char& ch : msg)
      if (ch == '\n') ch = ' ';
    std::fprintf(stderr, "bnas: error: %s: %s\n", bnas_status_name(f.status), msg.c_str());
    return f.status == BNAS_ERR_USAGE ? 2 : 1;
  }
}
