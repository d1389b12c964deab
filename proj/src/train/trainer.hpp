#pragma once

#include <functional>
#include <string>
#include <vector>

#include "autodiff/optim.hpp"
#include "data/dataset.hpp"

BNAS_NS_BEGIN

struct TrainConfig {
  int epochs = 600;
  int batch = 256;
  double lr = 0.025;  // peak of the one-cycle schedule
  double momentum = 0.9;
  double weight_decay = 3e-6;
  ScheduleKind schedule = ScheduleKind::OneCycle;
  bool augment = true;  // 4-pixel-padded random crop + horizontal flip
  std::uint64_t seed = 0;
  bool log_grads = true;
  /// Evaluate on the test split every this many epochs (0 = only after the last).
  int eval_every = 0;
  int eval_batch = 256;

  void validate() const;
};

struct EvalResult {
  double top1 = 0;  // percent
  double top5 = 0;  // percent
  double loss = 0;
  std::vector<double> per_class;  // percent; NaN-free, 0 for absent classes
  std::size_t count = 0;
};

/// Top-k bookkeeping over logit rows. The rank of the true label counts
/// the classes with a larger logit, plus equal logits at a lower index.
class TopKCounter {
 public:
  explicit TopKCounter(int num_classes);
  /// logits (N, classes, 1, 1)
  void add(const Tensor& logits, std::span<const int> labels);
  void add_loss(double batch_mean_loss, std::size_t batch_size);
  EvalResult result() const;

 private:
  int classes_;
  std::size_t count_ = 0, top1_ = 0, top5_ = 0;
  double loss_sum_ = 0;
  std::vector<std::size_t> class_total_, class_hit_;
};

struct MetricsRow {
  int epoch = 0;
  std::string split;
  double loss = 0, top1 = 0, top5 = 0, lr = 0, grad_mag_sum = 0;
};

struct GradRow {
  int epoch = 0;
  long step = 0;
  double grad_mag_sum = 0;
};

struct TrainResult {
  std::vector<MetricsRow> metrics;
  std::vector<GradRow> grads;

  std::string metrics_csv() const;
  std::string grads_csv() const;
};

/// Called after each epoch with the rows logged so far.
using TrainObserver = std::function<void(const TrainResult&)>;

/// SGD over shuffled training batches with the configured schedule.
TrainResult train(Classifier& model, const Dataset& data, const TrainConfig& config,
                  const TrainObserver& observer = {});

/// Eval-mode pass over a split; never mutates the model.
EvalResult evaluate(Classifier& model, const Dataset& data, const ImageSet& split, int batch = 256);

/// (epoch, sum of |grad| over conv weights) from the gradients currently held.
GradRow log_grad_magnitudes(const StateList& state, int epoch, long step = 0);

void write_text(const std::string& path, const std::string& text);

BNAS_NS_END
