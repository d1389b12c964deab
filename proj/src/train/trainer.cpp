#include "train/trainer.hpp"

#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "common/error.hpp"

BNAS_NS_BEGIN

void TrainConfig::validate() const {
  BNAS_EXPECT(epochs >= 0, ContractViolation, "train: epochs must be >= 0");
  BNAS_EXPECT(batch >= 1 && eval_batch >= 1, ContractViolation, "train: batch must be >= 1");
  BNAS_EXPECT(lr >= 0 && momentum >= 0 && weight_decay >= 0, ContractViolation, "train: negative optimiser setting");
}

TopKCounter::TopKCounter(int num_classes)
    : classes_(num_classes), class_total_(num_classes), class_hit_(num_classes) {}

void TopKCounter::add(const Tensor& logits, std::span<const int> labels) {
  const Shape s = logits.shape();
  BNAS_EXPECT(s.c == classes_ && s.h == 1 && s.w == 1 && static_cast<std::size_t>(s.n) == labels.size(),
              GeometryError, "evaluate: logits " + s.str() + " do not match " + std::to_string(labels.size()) +
                                 " labels over " + std::to_string(classes_) + " classes");
  for (int n = 0; n < s.n; ++n) {
    const int y = labels[n];
    BNAS_EXPECT(y >= 0 && y < classes_, GeometryError, "evaluate: label " + std::to_string(y) + " out of range");
    const real* row = logits.data() + static_cast<std::size_t>(n) * classes_;
    int rank = 0;
    for (int j = 0; j < classes_; ++j)
      if (row[j] > row[y] || (row[j] == row[y] && j < y)) ++rank;
    ++count_;
    ++class_total_[y];
    if (rank < 1) {
      ++top1_;
      ++class_hit_[y];
    }
    if (rank < 5) ++top5_;
  }
}

void TopKCounter::add_loss(double batch_mean_loss, std::size_t batch_size) {
  loss_sum_ += batch_mean_loss * static_cast<double>(batch_size);
}

EvalResult TopKCounter::result() const {
  EvalResult r;
  r.count = count_;
  if (count_ == 0) return r;
  r.top1 = 100.0 * static_cast<double>(top1_) / static_cast<double>(count_);
  r.top5 = 100.0 * static_cast<double>(top5_) / static_cast<double>(count_);
  r.loss = loss_sum_ / static_cast<double>(count_);
  for (int c = 0; c < classes_; ++c)
    r.per_class.push_back(class_total_[c] ? 100.0 * static_cast<double>(class_hit_[c]) / class_total_[c] : 0.0);
  return r;
}

std::string TrainResult::metrics_csv() const {
  std::ostringstream os;
  os.precision(9);
  os << "epoch,split,loss,top1,top5,lr,grad_mag_sum\n";
  for (const auto& r : metrics)
    os << r.epoch << ',' << r.split << ',' << r.loss << ',' << r.top1 << ',' << r.top5 << ',' << r.lr << ','
       << r.grad_mag_sum << '\n';
  return os.str();
}

std::string TrainResult::grads_csv() const {
  std::ostringstream os;
  os.precision(9);
  os << "epoch,step,grad_mag_sum\n";
  for (const auto& r : grads) os << r.epoch << ',' << r.step << ',' << r.grad_mag_sum << '\n';
  return os.str();
}

GradRow log_grad_magnitudes(const StateList& state, int epoch, long step) {
  return {epoch, step, conv_grad_magnitude(state)};
}

EvalResult evaluate(Classifier& model, const Dataset& data, const ImageSet& split, int batch) {
  BNAS_EXPECT(batch >= 1, ContractViolation, "evaluate: batch must be >= 1");
  NoGradGuard no_grad;
  const Context ctx{false};
  TopKCounter counter(data.num_classes);
  std::vector<std::size_t> idx(split.size());
  std::iota(idx.begin(), idx.end(), 0);
  for (std::size_t start = 0; start < idx.size(); start += batch) {
    const std::size_t n = std::min<std::size_t>(batch, idx.size() - start);
    Batch b = make_batch(data, split, std::span(idx).subspan(start, n));
    Var logits = model.forward(constant(std::move(b.images)), ctx);
    counter.add(logits->value, b.labels);
    counter.add_loss(softmax_cross_entropy(logits, b.labels)->value.item(), n);
  }
  return counter.result();
}

TrainResult train(Classifier& model, const Dataset& data, const TrainConfig& config, const TrainObserver& observer) {
  config.validate();
  const std::size_t n = data.train.size();
  BNAS_EXPECT(n >= 1, InvalidArgument, "train: training split is empty");
  const std::size_t batch = std::min<std::size_t>(config.batch, n);
  const long batches = static_cast<long>(n / batch);

  StateList state = model.state();
  const auto weights = state.select(ParamRole::Weight);
  LrSchedule sched{config.schedule, config.lr, std::max(1L, batches * config.epochs)};
  Rng order_rng(config.seed, "train-order");
  Rng aug_rng(config.seed, "train-augment");
  const Augment aug{config.augment};
  const Context ctx{true};

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  TrainResult result;
  long step = 0;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    order_rng.shuffle(order.begin(), order.end());
    TopKCounter counter(data.num_classes);
    double grad_mag = 0, lr = 0;
    for (long b = 0; b < batches; ++b, ++step) {
      Batch bt = make_batch(data, data.train, std::span(order).subspan(b * batch, batch), aug, &aug_rng);
      Var logits = model.forward(constant(std::move(bt.images)), ctx);
      Var loss = softmax_cross_entropy(logits, bt.labels);
      const double l = loss->value.item();
      if (!std::isfinite(l))
        throw NumericError("training diverged: non-finite loss at epoch " + std::to_string(epoch) + ", batch " +
                           std::to_string(b));
      counter.add(logits->value, bt.labels);
      counter.add_loss(l, batch);
      state.zero_grad();
      backward(loss);
      if (config.log_grads) {
        GradRow g = log_grad_magnitudes(state, epoch, step);
        grad_mag += g.grad_mag_sum;
        result.grads.push_back(g);
      }
      lr = sched.at(step);
      sgd_step(weights, static_cast<real>(lr), static_cast<real>(config.momentum),
               static_cast<real>(config.weight_decay));
    }
    const EvalResult tr = counter.result();
    result.metrics.push_back({epoch, "train", tr.loss, tr.top1, tr.top5, lr, grad_mag / static_cast<double>(batches)});
    const bool last = epoch + 1 == config.epochs;
    if ((config.eval_every > 0 && (epoch + 1) % config.eval_every == 0) || (last && data.test.size() > 0)) {
      const EvalResult te = evaluate(model, data, data.test, config.eval_batch);
      result.metrics.push_back({epoch, "test", te.loss, te.top1, te.top5, lr, 0});
    }
    if (observer) observer(result);
  }
  return result;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path);
  if (!f) throw IoError("cannot open '" + path + "' for writing");
  f << text;
  if (!f) throw IoError("write to '" + path + "' failed");
}

BNAS_NS_END
