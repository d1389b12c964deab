#include <gtest/gtest.h>

#include "autodiff/checkpoint.hpp"
#include "autodiff/optim.hpp"
#include "common/error.hpp"
#include "net/network.hpp"
#include "support.hpp"
#include "train/trainer.hpp"

using namespace bnas;
using namespace testing_support;

namespace {

Genotype conv_pool_genotype() {
  Genotype g;
  g.normal = {{2, {{0, LayerType::BinConv3x3}, {1, LayerType::MaxPool3x3}}},
              {3, {{1, LayerType::BinConv3x3}, {2, LayerType::AvgPool3x3}}}};
  g.reduce = {{2, {{0, LayerType::BinConv3x3}, {1, LayerType::MaxPool3x3}}},
              {3, {{1, LayerType::BinConv5x5}, {2, LayerType::BinConv3x3}}}};
  return g;
}

NetworkSpec tiny_spec(Precision p) {
  NetworkSpec s;
  s.genotype = conv_pool_genotype();
  s.cells = 3;
  s.channels = 4;
  s.height = s.width = 8;
  s.precision = p;
  return s;
}

TrainConfig tiny_train(int epochs) {
  TrainConfig c;
  c.epochs = epochs;
  c.batch = 16;
  c.lr = 0.05;
  c.augment = false;
  c.seed = 3;
  return c;
}

}  // namespace

TEST(TopK, HandBuiltLogits) {
  TopKCounter k(6);
  Tensor logits = Tensor::from({3, 6, 1, 1}, {
                                                 5, 1, 2, 3, 4, 0,  // label 0: rank 0
                                                 5, 1, 2, 3, 4, 0,  // label 5: rank 5
                                                 1, 1, 1, 1, 1, 1,  // label 3: ties to lower indices, rank 3
                                             });
  const std::vector<int> labels{0, 5, 3};
  k.add(logits, labels);
  k.add_loss(2.0, 3);
  const EvalResult r = k.result();
  EXPECT_EQ(r.count, 3u);
  EXPECT_NEAR(r.top1, 100.0 / 3, 1e-9);
  EXPECT_NEAR(r.top5, 200.0 / 3, 1e-9);
  EXPECT_DOUBLE_EQ(r.loss, 2.0);
  EXPECT_EQ(r.per_class[0], 100.0);
  EXPECT_EQ(r.per_class[5], 0.0);
  EXPECT_EQ(r.per_class[1], 0.0);  // absent class
}

TEST(TopK, RejectsBadLabels) {
  TopKCounter k(3);
  const std::vector<int> labels{3};
  EXPECT_THROW(k.add(Tensor({1, 3, 1, 1}), labels), GeometryError);
}

TEST(Schedule, CosineAndOneCycleEndpoints) {
  LrSchedule cos{ScheduleKind::Cosine, 0.1, 100};
  EXPECT_DOUBLE_EQ(cos.at(0), 0.1);
  EXPECT_NEAR(cos.at(50), 0.05, 1e-12);
  EXPECT_NEAR(cos.at(100), 0.0, 1e-12);
  LrSchedule one{ScheduleKind::OneCycle, 0.1, 100};
  EXPECT_NEAR(one.at(0), 0.1 / 25, 1e-12);
  EXPECT_NEAR(one.at(30), 0.1, 1e-12);
  EXPECT_NEAR(one.at(100), 0.1 / 100, 1e-12);
  EXPECT_THROW(one.at(101), ContractViolation);
  EXPECT_EQ(parse_schedule("cosine"), ScheduleKind::Cosine);
  EXPECT_THROW(parse_schedule("step"), Error);
}

TEST(Sgd, HandComputedMomentumStep) {
  Parameter p(Tensor::from({1, 2, 1, 1}, {1, -2}));
  p.grad() = Tensor::from({1, 2, 1, 1}, {0.5f, 0.5f});
  std::vector<Parameter*> ps{&p};
  sgd_step(ps, 0.1f, 0.9f, 0.01f);
  // buf = g + wd * v = (0.51, 0.48); v -= 0.1 * buf
  EXPECT_NEAR(p.value()[0], 1 - 0.051, 1e-6);
  EXPECT_NEAR(p.value()[1], -2 - 0.048, 1e-6);
  sgd_step(ps, 0.1f, 0.9f, 0.0f);
  // buf = 0.9 * 0.51 + 0.5
  EXPECT_NEAR(p.value()[0], 1 - 0.051 - 0.1 * (0.9 * 0.51 + 0.5), 1e-6);
}

TEST(Train, DeterministicAndLogsEveryStep) {
  const Dataset d = synthetic_dataset(40, 16, 2, 10, 8);
  auto a = build_network(tiny_spec(Precision::Binary), 1);
  auto b = build_network(tiny_spec(Precision::Binary), 1);
  const TrainResult ra = train(*a, d, tiny_train(2));
  const TrainResult rb = train(*b, d, tiny_train(2));
  EXPECT_EQ(ra.metrics_csv(), rb.metrics_csv());
  EXPECT_EQ(ra.grads_csv(), rb.grads_csv());
  // 40 images at batch 16: the partial batch is dropped, 2 steps per epoch.
  EXPECT_EQ(ra.grads.size(), 4u);
  EXPECT_EQ(ra.metrics.back().split, "test");
  for (const auto& g : ra.grads) EXPECT_GT(g.grad_mag_sum, 0);
  EXPECT_EQ(ra.metrics_csv().substr(0, 35), "epoch,split,loss,top1,top5,lr,grad_");
  EXPECT_EQ(ra.grads_csv().substr(0, 25), "epoch,step,grad_mag_sum\n0");
}

TEST(Train, FloatNetworkFitsASmallSet) {
  const Dataset d = synthetic_dataset(64, 16, 4, 4, 8);
  NetworkSpec s = tiny_spec(Precision::Float);
  s.num_classes = 4;
  auto net = build_network(s, 2);
  TrainConfig c = tiny_train(6);
  c.schedule = ScheduleKind::Constant;
  const TrainResult r = train(*net, d, c);
  double first = 0, last = 0;
  for (const auto& m : r.metrics)
    if (m.split == "train") {
      if (m.epoch == 0) first = m.loss;
      last = m.loss;
    }
  EXPECT_LT(last, first);
}

TEST(Evaluate, LeavesTheModelUntouched) {
  const Dataset d = synthetic_dataset(16, 24, 2, 10, 8);
  auto net = build_network(tiny_spec(Precision::Binary), 1);
  const auto before = snapshot(net->state());
  const EvalResult r = evaluate(*net, d, d.test, 7);
  const auto after = snapshot(net->state());
  for (std::size_t i = 0; i < before.size(); ++i) EXPECT_EQ(before[i].tensor.vec(), after[i].tensor.vec());
  EXPECT_EQ(r.count, 24u);
  EXPECT_EQ(r.per_class.size(), 10u);
  EXPECT_EQ(evaluate(*net, d, d.test, 24).top1, r.top1);
}

TEST(Train, RejectsBadConfig) {
  TrainConfig c = tiny_train(1);
  c.lr = -1;
  EXPECT_THROW(c.validate(), Error);
  c = tiny_train(0);
  c.validate();
  c.batch = 0;
  EXPECT_THROW(c.validate(), Error);
}
