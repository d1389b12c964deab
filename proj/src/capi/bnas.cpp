#include "bnas/bnas.h"

#include <cstring>
#include <fstream>
#include <memory>
#include <new>

#include "autodiff/checkpoint.hpp"
#include "common/error.hpp"
#include "config/config.hpp"
#include "net/flops.hpp"
#include "train/export.hpp"

using namespace bnas;

struct bnas_config {
  Config config;
};
struct bnas_dataset {
  Dataset data;
};
struct bnas_arch {
  ArchParams arch;
  Metadata meta;
};
struct bnas_genotype {
  Genotype genotype;
};
struct bnas_model {
  NetworkSpec spec;
  std::unique_ptr<Network> net;
  Metadata meta;
};

namespace {

thread_local std::string g_last_error;

bnas_status fail(bnas_status s, const std::string& msg) {
  g_last_error = msg;
  return s;
}

template <class F>
bnas_status guarded(F&& f) {
  try {
    f();
    g_last_error.clear();
    return BNAS_OK;
  } catch (const Error& e) {
    return fail(static_cast<bnas_status>(e.kind()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(BNAS_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(BNAS_ERR_INTERNAL, e.what());
  }
}

void need(const void* p, const char* what) {
  if (!p) throw InvalidArgument(std::string(what) + " must not be NULL");
}

void copy_out(const std::string& s, char* buf, std::size_t cap, std::size_t* needed) {
  if (needed) *needed = s.size() + 1;
  if (!buf || cap == 0) {
    if (needed) return;
    throw InvalidArgument("output buffer must not be NULL");
  }
  const std::size_t n = std::min(cap - 1, s.size());
  std::memcpy(buf, s.data(), n);
  buf[n] = '\0';
  if (cap < s.size() + 1) throw InvalidArgument("output buffer of " + std::to_string(cap) + " bytes is too small");
}

Metadata provenance(const Config& c) {
  return {{"config_hash", c.hash()}, {"seed", c.get("seed")}, {"preset", c.preset()}};
}

void write_with_provenance(const std::string& path, const std::string& csv, const std::string& hash) {
  std::ofstream f(path);
  if (!f) throw IoError("cannot open '" + path + "' for writing");
  f << "# config_hash=" << hash << '\n' << csv;
  if (!f) throw IoError("write to '" + path + "' failed");
}

std::string meta_value(const Metadata& m, const std::string& key) {
  for (const auto& [k, v] : m)
    if (k == key) return v;
  return "";
}

NetworkSpec make_spec(const Config& c, const Genotype& g, int in_c, int h, int w, int classes) {
  const SpaceFlags f = c.flags();
  if (f.no_zeroise && uses_op(g, LayerType::Zeroise))
    throw UsageError("--no-zeroise conflicts with a genotype that contains zeroise edges");
  if (f.no_dilated && (uses_op(g, LayerType::BinDilConv3x3) || uses_op(g, LayerType::BinDilConv5x5)))
    throw UsageError("--no-dilated conflicts with a genotype that contains dilated convolutions");
  NetworkSpec s;
  s.genotype = g;
  s.cells = static_cast<int>(c.int_value("net.cells"));
  s.channels = static_cast<int>(c.int_value("net.channels"));
  s.num_classes = classes;
  s.in_channels = in_c;
  s.height = h;
  s.width = w;
  s.inter_cell_skip = !f.no_skip;
  s.precision = c.get("precision") == "float" ? Precision::Float : Precision::Binary;
  s.validate();
  return s;
}

}  // namespace

extern "C" {

const char* bnas_version(void) { return "1.0.0"; }

const char* bnas_last_error(void) { return g_last_error.c_str(); }

const char* bnas_status_name(bnas_status status) {
  switch (status) {
    case BNAS_OK: return "ok";
    case BNAS_ERR_INVALID_ARGUMENT: return "invalid_argument";
    case BNAS_ERR_CONTRACT: return "contract_violation";
    case BNAS_ERR_GEOMETRY: return "geometry_error";
    case BNAS_ERR_PARSE: return "parse_error";
    case BNAS_ERR_IO: return "io_error";
    case BNAS_ERR_NUMERIC: return "numeric_error";
    case BNAS_ERR_USAGE: return "usage_error";
    case BNAS_ERR_INTERNAL: return "internal_error";
  }
  return "unknown_status";
}

bnas_status bnas_config_new(const char* preset, bnas_config** out) {
  return guarded([&] {
    need(out, "out");
    *out = new bnas_config{Config(preset ? preset : "paper")};
  });
}

void bnas_config_free(bnas_config* config) { delete config; }

bnas_status bnas_config_set(bnas_config* config, const char* key, const char* value) {
  return guarded([&] {
    need(config, "config");
    need(key, "key");
    need(value, "value");
    config->config.set(key, value, ConfigLayer::Cli);
  });
}

bnas_status bnas_config_load_file(bnas_config* config, const char* path) {
  return guarded([&] {
    need(config, "config");
    need(path, "path");
    config->config.load_file(path);
  });
}

bnas_status bnas_config_get(const bnas_config* config, const char* key, char* buf, size_t cap, size_t* needed) {
  return guarded([&] {
    need(config, "config");
    need(key, "key");
    copy_out(config->config.get(key), buf, cap, needed);
  });
}

bnas_status bnas_config_hash(const bnas_config* config, char out[17]) {
  return guarded([&] {
    need(config, "config");
    need(out, "out");
    const std::string h = config->config.hash();
    std::memcpy(out, h.c_str(), 17);
  });
}

bnas_status bnas_config_dump(const bnas_config* config, char* buf, size_t cap, size_t* needed) {
  return guarded([&] {
    need(config, "config");
    copy_out(config->config.canonical(), buf, cap, needed);
  });
}

bnas_status bnas_dataset_load(const bnas_config* config, bnas_dataset** out) {
  return guarded([&] {
    need(config, "config");
    need(out, "out");
    *out = new bnas_dataset{load_dataset(config->config)};
  });
}

void bnas_dataset_free(bnas_dataset* dataset) { delete dataset; }

bnas_status bnas_dataset_info(const bnas_dataset* dataset, size_t* train, size_t* test, int* channels, int* height,
                              int* width) {
  return guarded([&] {
    need(dataset, "dataset");
    const ImageSet& t = dataset->data.train;
    if (train) *train = t.size();
    if (test) *test = dataset->data.test.size();
    if (channels) *channels = t.channels;
    if (height) *height = t.height;
    if (width) *width = t.width;
  });
}

bnas_status bnas_search(const bnas_config* config, const bnas_dataset* dataset, const char* log_csv,
                        bnas_arch** out) {
  return guarded([&] {
    need(config, "config");
    need(dataset, "dataset");
    need(out, "out");
    SearchResult r = run_search(config->config.search(), dataset->data);
    if (log_csv) write_with_provenance(log_csv, r.log.csv(), config->config.hash());
    *out = new bnas_arch{std::move(r.arch), provenance(config->config)};
  });
}

void bnas_arch_free(bnas_arch* arch) { delete arch; }

bnas_status bnas_arch_save(const bnas_arch* arch, const char* path) {
  return guarded([&] {
    need(arch, "arch");
    need(path, "path");
    save_arch(path, arch->arch, arch->meta);
  });
}

bnas_status bnas_arch_load(const char* path, bnas_arch** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    Metadata meta;
    ArchParams a = load_arch(path, &meta);
    *out = new bnas_arch{std::move(a), std::move(meta)};
  });
}

bnas_status bnas_arch_info(const bnas_arch* arch, double* entropy, int* edges, int* ops) {
  return guarded([&] {
    need(arch, "arch");
    if (entropy) *entropy = arch_entropy(arch->arch) / (2.0 * arch->arch.edges);
    if (edges) *edges = arch->arch.edges;
    if (ops) *ops = static_cast<int>(arch->arch.ops.size());
  });
}

bnas_status bnas_derive(const bnas_arch* arch, double gamma, bnas_genotype** out) {
  return guarded([&] {
    need(arch, "arch");
    need(out, "out");
    if (!(gamma > 0)) throw UsageError("gamma must be > 0, got " + std::to_string(gamma));
    const std::string seed = meta_value(arch->meta, "seed");
    *out = new bnas_genotype{derive(arch->arch, gamma, seed.empty() ? 0 : std::stoull(seed),
                                    meta_value(arch->meta, "config_hash"))};
  });
}

void bnas_genotype_free(bnas_genotype* genotype) { delete genotype; }

bnas_status bnas_genotype_parse(const char* json, bnas_genotype** out) {
  return guarded([&] {
    need(json, "json");
    need(out, "out");
    *out = new bnas_genotype{deserialize(json)};
  });
}

bnas_status bnas_genotype_load(const char* path, bnas_genotype** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    *out = new bnas_genotype{load_genotype(path)};
  });
}

bnas_status bnas_genotype_save(const bnas_genotype* genotype, const char* path) {
  return guarded([&] {
    need(genotype, "genotype");
    need(path, "path");
    save_genotype(path, genotype->genotype);
  });
}

bnas_status bnas_genotype_json(const bnas_genotype* genotype, char* buf, size_t cap, size_t* needed) {
  return guarded([&] {
    need(genotype, "genotype");
    copy_out(serialize(genotype->genotype), buf, cap, needed);
  });
}

bnas_status bnas_genotype_op_proportion(const bnas_genotype* genotype, const char* op, double* out) {
  return guarded([&] {
    need(genotype, "genotype");
    need(op, "op");
    need(out, "out");
    *out = op_proportion(genotype->genotype, parse_layer(op));
  });
}

bnas_status bnas_model_build(const bnas_config* config, const bnas_genotype* genotype, const bnas_dataset* dataset,
                             bnas_model** out) {
  return guarded([&] {
    need(config, "config");
    need(genotype, "genotype");
    need(out, "out");
    int c = 3, h = 32, w = 32, classes = 10;
    if (dataset) {
      c = dataset->data.train.channels;
      h = dataset->data.train.height;
      w = dataset->data.train.width;
      classes = dataset->data.num_classes;
    }
    NetworkSpec spec = make_spec(config->config, genotype->genotype, c, h, w, classes);
    auto net = build_network(spec, static_cast<std::uint64_t>(config->config.int_value("seed")));
    *out = new bnas_model{spec, std::move(net), provenance(config->config)};
  });
}

void bnas_model_free(bnas_model* model) { delete model; }

bnas_status bnas_model_train(bnas_model* model, const bnas_config* config, const bnas_dataset* dataset,
                             const char* metrics_csv, const char* grads_csv) {
  return guarded([&] {
    need(model, "model");
    need(config, "config");
    need(dataset, "dataset");
    const std::string hash = config->config.hash();
    // Rewrite the metrics after every epoch so long runs can be watched.
    auto observer = [&](const TrainResult& r) {
      if (metrics_csv) write_with_provenance(metrics_csv, r.metrics_csv(), hash);
    };
    TrainResult r = train(*model->net, dataset->data, config->config.train(), observer);
    if (metrics_csv) write_with_provenance(metrics_csv, r.metrics_csv(), hash);
    if (grads_csv) write_with_provenance(grads_csv, r.grads_csv(), hash);
    model->meta = provenance(config->config);
  });
}

bnas_status bnas_model_evaluate(bnas_model* model, const bnas_dataset* dataset, bnas_eval_result* out) {
  return guarded([&] {
    need(model, "model");
    need(dataset, "dataset");
    need(out, "out");
    if (dataset->data.num_classes != model->spec.num_classes)
      throw GeometryError("dataset has " + std::to_string(dataset->data.num_classes) + " classes, model " +
                          std::to_string(model->spec.num_classes));
    const EvalResult r = evaluate(*model->net, dataset->data, dataset->data.test);
    *out = bnas_eval_result{};
    out->top1 = r.top1;
    out->top5 = r.top5;
    out->loss = r.loss;
    out->count = r.count;
    out->num_classes = static_cast<int>(std::min<std::size_t>(r.per_class.size(), BNAS_MAX_CLASSES));
    for (int i = 0; i < out->num_classes; ++i) out->per_class[i] = r.per_class[i];
  });
}

bnas_status bnas_model_save(const bnas_model* model, const char* path) {
  return guarded([&] {
    need(model, "model");
    need(path, "path");
    write_checkpoint(path, snapshot(model->net->state()), model->meta);
  });
}

bnas_status bnas_model_load(bnas_model* model, const char* path) {
  return guarded([&] {
    need(model, "model");
    need(path, "path");
    Metadata meta;
    restore(model->net->state(), read_checkpoint(path, &meta));
    model->meta = std::move(meta);
  });
}

bnas_status bnas_model_export(const bnas_model* model, const char* path) {
  return guarded([&] {
    need(model, "model");
    need(path, "path");
    write_frozen(path, freeze(model->net->state()), model->meta);
  });
}

bnas_status bnas_model_param_count(const bnas_model* model, size_t* out) {
  return guarded([&] {
    need(model, "model");
    need(out, "out");
    std::size_t n = 0;
    for (const auto& p : model->net->state().params) n += p.param->value().size();
    *out = n;
  });
}

bnas_status bnas_flops(const bnas_config* config, const bnas_genotype* genotype, const bnas_genotype* reference,
                       int in_channels, int height, int width, bnas_flops_report* out, const char* csv_path,
                       char* text, size_t cap, size_t* needed) {
  return guarded([&] {
    need(config, "config");
    need(genotype, "genotype");
    const NetworkSpec spec = make_spec(config->config, genotype->genotype, in_channels, height, width, 10);
    const FlopsReport r = count_flops(spec);
    FlopsReport ref;
    if (reference) {
      NetworkSpec rs = spec;
      rs.genotype = reference->genotype;
      ref = count_flops(rs);
    }
    const FlopsReport* base = reference ? &ref : nullptr;
    if (out) {
      *out = bnas_flops_report{r.float_ops, r.scale_ops, r.binary_ops, r.effective_flops(), r.params_float,
                               r.params_binary_bits, r.betas, r.twin_float_ops, r.twin_params,
                               memory_savings(r, base), inference_speedup(r, base)};
    }
    if (csv_path) write_with_provenance(csv_path, r.csv(), config->config.hash());
    if (text || needed) {
      std::string t = r.text();
      if (reference) {
        char line[160];
        std::snprintf(line, sizeof line, "%-22s %18.2fx\n%-22s %18.2fx\n", "memory_savings_vs_ref",
                      memory_savings(r, base), "inference_speedup_vs_ref", inference_speedup(r, base));
        t += line;
      }
      copy_out(t, text, cap, needed);
    }
  });
}

bnas_status bnas_study_run(const bnas_config* config, const char* study, const bnas_dataset* dataset,
                           const bnas_genotype* genotype, const char* results_root, char* dir, size_t cap,
                           size_t* needed) {
  return guarded([&] {
    need(config, "config");
    need(study, "study");
    need(dataset, "dataset");
    need(results_root, "results_root");
    const StudyKind kind = parse_study(study);
    StudySpec spec = config->config.study(kind);
    if (kind == StudyKind::SkipProbe) {
      if (!genotype) throw UsageError("skip-probe needs a genotype (--genotype)");
      spec.genotype = genotype->genotype;
    }
    StudyOutput out = run_study(spec, dataset->data);
    out.files.push_back({"config.txt", config->config.canonical() + "config_hash=" + config->config.hash() + "\n"});
    const std::string path = write_study(out, results_root, kind, timestamp_now());
    if (dir || needed) copy_out(path, dir, cap, needed);
  });
}

}  // extern "C"
