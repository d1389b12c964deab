#pragma once

#include <functional>
#include <string>
#include <vector>

#include "data/dataset.hpp"
#include "autodiff/checkpoint.hpp"
#include "space/supernet.hpp"

BNAS_NS_BEGIN

struct SearchConfig {
  double lambda = 1.0;  // diversity weight; 0 disables the regulariser
  double tau = 7.7;     // annealing constant, in epochs
  int epochs = 50;
  int batch = 64;
  double lr = 0.025;  // cosine-annealed
  double momentum = 0.9;
  double weight_decay = 3e-4;
  /// Architecture optimiser: plain SGD on the same cosine schedule.
  double arch_lr = 0.025;
  double arch_momentum = 0.0;
  int cells = 8;
  int channels = 16;
  int nodes = 4;
  std::uint64_t seed = 0;
  SpaceFlags flags;
  Precision precision = Precision::Binary;
  bool augment = false;
  /// Caps the number of training records used (0 = all), after a seeded pick.
  std::size_t max_images = 0;

  void validate() const;
};

struct SearchRecord {
  int epoch = 0;
  double train_loss = 0;
  double val_loss = 0;
  double entropy = 0;
  double div_coeff = 0;
  double param_op_fraction = 0;
  double grad_mag_sum = 0;
  std::vector<int> argmax_ops;  // normal edges then reduction edges
};

struct SearchLog {
  std::vector<SearchRecord> records;

  std::string csv() const;
  void write_csv(const std::string& path) const;
};

/// Sum over every row of both tables of the entropy of softmax(alpha).
double arch_entropy(const ArchParams& arch);

/// lambda * exp(-t / tau).
double diversity_coefficient(double lambda, double tau, double t);

/// ce - coeff * H(p). The entropy term only reaches the architecture logits.
Var search_loss(const Var& ce, const ArchParams& arch, double lambda, double tau, double t);

/// Per-edge argmax op ids (ties -> lowest index), normal then reduction.
std::vector<int> argmax_ops(const ArchParams& arch);
/// Fraction of those argmaxes that are parameterised ops.
double param_op_fraction(const ArchParams& arch);

struct SearchResult {
  ArchParams arch;
  SearchLog log;
};

/// Called after every epoch; lets callers stream logs or checkpoints.
using SearchObserver = std::function<void(const SearchRecord&, const SuperNet&)>;

/// First-order alternating search on the training split of `data`:
/// an architecture step on a validation batch, then a weight step on a
/// training batch, for every batch pair.
SearchResult run_search(const SearchConfig& config, const Dataset& data, const SearchObserver& observer = {});

/// Architecture logits in the checkpoint container ("arch.normal", "arch.reduce")
/// plus the op list as an index tensor ("arch.ops").
void save_arch(const std::string& path, const ArchParams& arch, const Metadata& meta = {});
ArchParams load_arch(const std::string& path, Metadata* meta = nullptr);

BNAS_NS_END
