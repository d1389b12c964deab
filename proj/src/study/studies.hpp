#pragma once

#include <string>
#include <vector>

#include "genotype/genotype.hpp"
#include "net/network.hpp"
#include "search/search.hpp"
#include "train/trainer.hpp"

BNAS_NS_BEGIN

enum class StudyKind { QuantError, Ablation, SepConv, SkipProbe };

StudyKind parse_study(const std::string& name);
const char* study_name(StudyKind k);

/// Shared budget of the scripted studies. Defaults are the desk-scale preset.
struct StudySpec {
  StudyKind kind = StudyKind::QuantError;
  std::vector<std::uint64_t> seeds{0, 1, 2};
  std::size_t train_images = 10000;  // subset of the training split (0 = all)
  std::size_t test_images = 0;       // subset of the test split (0 = all)
  int epochs = 20;
  int batch = 64;
  double lr = 0.025;
  bool augment = true;

  // quant_error
  std::vector<LayerType> layers{LayerType::BinConv3x3, LayerType::BinConv5x5, LayerType::BinDilConv3x3,
                                LayerType::BinDilConv5x5, LayerType::SepConv3x3, LayerType::SepConv5x5};
  std::vector<Precision> precisions{Precision::Float, Precision::Binary};

  // ablation / sepconv: the search stage and the final network budget
  std::vector<std::string> variants{"full", "no_skip", "no_zeroise", "no_div"};
  SearchConfig search;
  int cells = 8;
  int channels = 16;
  double gamma = 1.0;

  // skip_probe
  Genotype genotype;

  void validate(const Dataset& data) const;
};

/// Rows of strings with a header; rendered as CSV or an aligned table.
struct StudyTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::string csv() const;
  std::string text() const;
};

/// Named output files of one study run.
struct StudyOutput {
  std::vector<std::pair<std::string, std::string>> files;
  StudyTable summary;
};

/// Trains and evaluates the probe net built from one layer type.
EvalResult quant_error_study(LayerType layer, Precision precision, const StudySpec& spec, const Dataset& data,
                             std::uint64_t seed);

/// Applies a named ablation ("full", "no_skip", "no_zeroise", "no_div",
/// "no_dilated", "keep_sepconv") to a search configuration; returns whether
/// the final network keeps the inter-cell skip.
bool apply_variant(const std::string& variant, SearchConfig& search);

struct PipelineResult {
  Genotype genotype;
  SearchLog search_log;
  TrainResult train;
  EvalResult eval;
};

/// search -> derive -> build -> train -> evaluate for one variant and seed.
PipelineResult run_pipeline(const std::string& variant, const StudySpec& spec, const Dataset& data,
                            std::uint64_t seed);

struct SkipProbeRow {
  int epoch = 0;
  double train_loss = 0;
  double grad_mag_sum = 0;   // mean per step over the epoch
  double input_grad_sum = 0; // sum |dL/dx| on a fixed probe batch after the epoch
};

/// Trains one network of the given genotype with or without the inter-cell
/// skips and records the gradient magnitudes per epoch.
std::vector<SkipProbeRow> skip_gradient_probe(const Genotype& g, const StudySpec& spec, const Dataset& data,
                                              bool with_skip, std::uint64_t seed);
std::string skip_probe_csv(const std::vector<SkipProbeRow>& rows);

StudyOutput run_study(const StudySpec& spec, const Dataset& data);

/// Writes the files under root/<study>/<stamp>/ and returns that directory.
std::string write_study(const StudyOutput& out, const std::string& root, StudyKind kind, const std::string& stamp);
std::string timestamp_now();

BNAS_NS_END
