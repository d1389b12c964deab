#include "study/studies.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <sstream>

#include "common/error.hpp"
#include "study/probe.hpp"

BNAS_NS_BEGIN

namespace {

const char* kStudyNames[] = {"quant_error", "ablation", "sepconv_study", "skip_probe"};

std::string fmt(double v, int digits = 4) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(digits);
  os << v;
  return os.str();
}

TrainConfig train_config(const StudySpec& spec, std::uint64_t seed) {
  TrainConfig tc;
  tc.epochs = spec.epochs;
  tc.batch = spec.batch;
  tc.lr = spec.lr;
  tc.augment = spec.augment;
  tc.seed = seed;
  tc.eval_batch = std::max(spec.batch, 64);
  return tc;
}

double sep_proportion(const Genotype& g) {
  return op_proportion(g, LayerType::SepConv3x3) + op_proportion(g, LayerType::SepConv5x5);
}

}  // namespace

StudyKind parse_study(const std::string& name) {
  std::string n = name;
  std::replace(n.begin(), n.end(), '-', '_');
  if (n == "sepconv") n = "sepconv_study";
  for (int i = 0; i < 4; ++i)
    if (n == kStudyNames[i]) return static_cast<StudyKind>(i);
  throw UsageError("unknown study '" + name + "' (expected quant-error, ablation, sepconv or skip-probe)");
}

const char* study_name(StudyKind k) { return kStudyNames[static_cast<int>(k)]; }

void StudySpec::validate(const Dataset& data) const {
  BNAS_EXPECT(!seeds.empty(), UsageError, "study: at least one seed is required");
  BNAS_EXPECT(train_images <= data.train.size(), UsageError,
              "study: train subset of " + std::to_string(train_images) + " exceeds the " +
                  std::to_string(data.train.size()) + " training images");
  BNAS_EXPECT(test_images <= data.test.size(), UsageError, "study: test subset exceeds the test split");
  BNAS_EXPECT(epochs >= 0 && batch >= 1, UsageError, "study: bad epochs/batch");
  if (kind == StudyKind::QuantError)
    BNAS_EXPECT(!layers.empty() && !precisions.empty(), UsageError, "study: no layers or precisions selected");
  if (kind == StudyKind::Ablation) BNAS_EXPECT(!variants.empty(), UsageError, "study: no ablation variants selected");
}

std::string StudyTable::csv() const {
  std::ostringstream os;
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) os << (i ? "," : "") << cells[i];
    os << '\n';
  };
  line(header);
  for (const auto& r : rows) line(r);
  return os.str();
}

std::string StudyTable::text() const {
  std::vector<std::size_t> width(header.size());
  for (std::size_t i = 0; i < header.size(); ++i) width[i] = header[i].size();
  for (const auto& r : rows)
    for (std::size_t i = 0; i < r.size() && i < width.size(); ++i) width[i] = std::max(width[i], r[i].size());
  std::ostringstream os;
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      os << (i ? "  " : "") << cells[i];
      if (i + 1 < cells.size()) os << std::string(width[i] - cells[i].size(), ' ');
    }
    os << '\n';
  };
  line(header);
  std::size_t total = 0;
  for (std::size_t w : width) total += w + 2;
  os << std::string(total > 2 ? total - 2 : 0, '-') << '\n';
  for (const auto& r : rows) line(r);
  return os.str();
}

EvalResult quant_error_study(LayerType layer, Precision precision, const StudySpec& spec, const Dataset& data,
                             std::uint64_t seed) {
  const Dataset d = subset(data, spec.train_images, spec.test_images, seed);
  Rng rng(seed, "probe-init");
  ProbeNet net(layer, precision, d.train.channels, d.train.height, d.train.width, d.num_classes, rng);
  train(net, d, train_config(spec, seed));
  return evaluate(net, d, d.test, std::max(spec.batch, 64));
}

bool apply_variant(const std::string& variant, SearchConfig& search) {
  if (variant == "full") return true;
  if (variant == "no_skip") {
    search.flags.no_skip = true;
    return false;
  }
  if (variant == "no_zeroise") {
    search.flags.no_zeroise = true;
  } else if (variant == "no_div") {
    search.lambda = 0;
  } else if (variant == "no_dilated") {
    search.flags.no_dilated = true;
  } else if (variant == "keep_sepconv") {
    search.flags.keep_sepconv = true;
  } else {
    throw UsageError("unknown ablation variant '" + variant +
                     "' (expected full, no_skip, no_zeroise, no_div, no_dilated or keep_sepconv)");
  }
  return true;
}

PipelineResult run_pipeline(const std::string& variant, const StudySpec& spec, const Dataset& data,
                            std::uint64_t seed) {
  SearchConfig sc = spec.search;
  sc.seed = seed;
  const bool skip = apply_variant(variant, sc);
  PipelineResult out;
  SearchResult sr = run_search(sc, data);
  out.search_log = std::move(sr.log);
  out.genotype = derive(sr.arch, spec.gamma, seed);

  const Dataset d = subset(data, spec.train_images, spec.test_images, seed);
  NetworkSpec ns;
  ns.genotype = out.genotype;
  ns.cells = spec.cells;
  ns.channels = spec.channels;
  ns.num_classes = d.num_classes;
  ns.in_channels = d.train.channels;
  ns.height = d.train.height;
  ns.width = d.train.width;
  ns.inter_cell_skip = skip;
  ns.precision = sc.precision;
  auto net = build_network(ns, seed);
  out.train = train(*net, d, train_config(spec, seed));
  out.eval = evaluate(*net, d, d.test, std::max(spec.batch, 64));
  return out;
}

std::vector<SkipProbeRow> skip_gradient_probe(const Genotype& g, const StudySpec& spec, const Dataset& data,
                                              bool with_skip, std::uint64_t seed) {
  const Dataset d = subset(data, spec.train_images, spec.test_images, seed);
  NetworkSpec ns;
  ns.genotype = g;
  ns.cells = spec.cells;
  ns.channels = spec.channels;
  ns.num_classes = d.num_classes;
  ns.in_channels = d.train.channels;
  ns.height = d.train.height;
  ns.width = d.train.width;
  ns.inter_cell_skip = with_skip;
  auto net = build_network(ns, seed);

  std::vector<std::size_t> probe_idx(std::min<std::size_t>(spec.batch, d.train.size()));
  for (std::size_t i = 0; i < probe_idx.size(); ++i) probe_idx[i] = i;
  const Batch probe = make_batch(d, d.train, probe_idx);

  std::vector<SkipProbeRow> rows;
  // The probe batch is scored after every epoch from the training observer.
  auto observer = [&](const TrainResult& r) {
    const MetricsRow* last = nullptr;
    for (const auto& m : r.metrics)
      if (m.split == "train") last = &m;
    if (!last) return;
    Var x = variable(probe.images);
    Var loss = softmax_cross_entropy(net->forward(x, Context{false}), probe.labels);
    StateList state = net->state();
    state.zero_grad();
    backward(loss);
    double in_grad = 0;
    if (x->grad.size() == x->value.size())
      for (real v : x->grad.span()) in_grad += std::fabs(static_cast<double>(v));
    state.zero_grad();
    rows.push_back({last->epoch, last->loss, last->grad_mag_sum, in_grad});
  };
  Dataset train_only = d;
  train_only.test = ImageSet{};
  train(*net, train_only, train_config(spec, seed), observer);
  return rows;
}

std::string skip_probe_csv(const std::vector<SkipProbeRow>& rows) {
  std::ostringstream os;
  os.precision(9);
  os << "epoch,train_loss,grad_mag_sum,input_grad_sum\n";
  for (const auto& r : rows) os << r.epoch << ',' << r.train_loss << ',' << r.grad_mag_sum << ',' << r.input_grad_sum << '\n';
  return os.str();
}

StudyOutput run_study(const StudySpec& spec, const Dataset& data) {
  spec.validate(data);
  StudyOutput out;
  switch (spec.kind) {
    case StudyKind::QuantError: {
      out.summary.header = {"layer", "precision", "seed", "top1", "top5", "loss"};
      for (LayerType layer : spec.layers)
        for (Precision p : spec.precisions)
          for (auto seed : spec.seeds) {
            const EvalResult r = quant_error_study(layer, p, spec, data, seed);
            out.summary.rows.push_back({layer_name(layer), p == Precision::Binary ? "binary" : "float",
                                        std::to_string(seed), fmt(r.top1, 2), fmt(r.top5, 2), fmt(r.loss)});
          }
      break;
    }
    case StudyKind::Ablation: {
      out.summary.header = {"variant", "seed", "top1", "top5", "final_train_top1", "zeroise_share", "param_op_fraction"};
      for (const auto& v : spec.variants)
        for (auto seed : spec.seeds) {
          const PipelineResult r = run_pipeline(v, spec, data, seed);
          double train_top1 = 0;
          for (const auto& m : r.train.metrics)
            if (m.split == "train") train_top1 = m.top1;
          const double pf = r.search_log.records.empty() ? 0 : r.search_log.records.back().param_op_fraction;
          out.summary.rows.push_back({v, std::to_string(seed), fmt(r.eval.top1, 2), fmt(r.eval.top5, 2),
                                      fmt(train_top1, 2), fmt(op_proportion(r.genotype, LayerType::Zeroise)),
                                      fmt(pf)});
          const std::string tag = v + "_seed" + std::to_string(seed);
          out.files.push_back({tag + "_genotype.json", serialize(r.genotype)});
          out.files.push_back({tag + "_search.csv", r.search_log.csv()});
          out.files.push_back({tag + "_metrics.csv", r.train.metrics_csv()});
        }
      break;
    }
    case StudyKind::SepConv: {
      out.summary.header = {"seed", "binary_sep_share", "float_sep_share"};
      for (auto seed : spec.seeds) {
        std::string cells[2];
        double share[2];
        for (int f = 0; f < 2; ++f) {
          SearchConfig sc = spec.search;
          sc.seed = seed;
          sc.flags.keep_sepconv = true;
          sc.precision = f ? Precision::Float : Precision::Binary;
          const Genotype g = derive(run_search(sc, data).arch, spec.gamma, seed);
          share[f] = sep_proportion(g);
          out.files.push_back({std::string(f ? "float" : "binary") + "_seed" + std::to_string(seed) + "_genotype.json",
                               serialize(g)});
        }
        out.summary.rows.push_back({std::to_string(seed), fmt(share[0]), fmt(share[1])});
      }
      break;
    }
    case StudyKind::SkipProbe: {
      out.summary.header = {"seed", "skip", "final_loss", "mean_grad_mag", "min_input_grad", "max_input_grad"};
      for (auto seed : spec.seeds)
        for (bool skip : {true, false}) {
          const auto rows = skip_gradient_probe(spec.genotype, spec, data, skip, seed);
          double mean = 0, lo = rows.empty() ? 0 : rows[0].input_grad_sum, hi = lo;
          for (const auto& r : rows) {
            mean += r.grad_mag_sum / static_cast<double>(rows.size());
            lo = std::min(lo, r.input_grad_sum);
            hi = std::max(hi, r.input_grad_sum);
          }
          out.summary.rows.push_back({std::to_string(seed), skip ? "on" : "off",
                                      fmt(rows.empty() ? 0 : rows.back().train_loss), fmt(mean), fmt(lo, 6),
                                      fmt(hi, 6)});
          out.files.push_back({std::string("skip_") + (skip ? "on" : "off") + "_seed" + std::to_string(seed) + ".csv",
                               skip_probe_csv(rows)});
        }
      break;
    }
  }
  out.files.push_back({"summary.csv", out.summary.csv()});
  out.files.push_back({"summary.txt", out.summary.text()});
  return out;
}

std::string timestamp_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y%m%dT%H%M%SZ", &tm);
  return buf;
}

std::string write_study(const StudyOutput& out, const std::string& root, StudyKind kind, const std::string& stamp) {
  const auto dir = std::filesystem::path(root) / study_name(kind) / stamp;
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create '" + dir.string() + "': " + ec.message());
  for (const auto& [name, text] : out.files) write_text((dir / name).string(), text);
  return dir.string();
}

BNAS_NS_END
