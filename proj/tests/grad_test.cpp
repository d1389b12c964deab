#include <gtest/gtest.h>

#include <type_traits>

#include "grad_suite.hpp"

using namespace bnas;
using namespace testing_support;

static_assert(std::is_same_v<real, double>, "gradient checks need the binary64 build");

class Gradients : public ::testing::TestWithParam<std::size_t> {};

TEST_P(Gradients, CentralDifferencesAgree) {
  const GradCase gc = gradient_cases()[GetParam()];
  Rng rng(1000 + GetParam());
  for (int i = 0; i < 20; ++i) {
    const double err = gc.run(rng);
    ASSERT_LE(err, 1e-3) << gc.name << " instance " << i;
  }
}

INSTANTIATE_TEST_SUITE_P(AllOps, Gradients, ::testing::Range<std::size_t>(0, gradient_cases().size()),
                         [](const auto& info) { return gradient_cases()[info.param].name; });

TEST(GradientsWide, ZeroiseHasNoGradientPath) {
  Var x = variable(Tensor({1, 2, 4, 4}, 1.0));
  EXPECT_EQ(zeroise_forward(x, 2)->shape(), (Shape{1, 2, 2, 2}));
  Var y = zeroise_forward(x, 1);
  backward(sum(add(y, scale(x, 0))));
  EXPECT_EQ(abs_sum(x->grad), 0);
}

TEST(GradientsWide, CheckerFlagsAWrongBackward) {
  // d/dx sum(x^2) claimed as x instead of 2x.
  Rng rng(1);
  Var x = variable(random_tensor({1, 3, 1, 1}, rng));
  auto fn = [&] {
    Tensor v = x->value;
    double s = 0;
    for (real e : v.vec()) s += e * e;
    return make_node("bad_square", Tensor::scalar(static_cast<real>(s)), {x}, [](Node& self) {
      Tensor& g = self.inputs[0]->grad_ref();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[0] * self.inputs[0]->value[i];
    });
  };
  EXPECT_GT(fd_check(fn, x, rng), 0.4);
}
