#include "gradients.hpp"

#include <cmath>

#include "binary/kernels.hpp"
#include "grad_suite.hpp"

using namespace bnas;
using namespace testing_support;

static_assert(std::is_same_v<real, double>, "gradient checks need the binary64 build");

namespace {

bool ste_is_bitwise(Rng& rng) {
  for (int trial = 0; trial < 20; ++trial) {
    Tensor x = random_tensor({2, 3, 4, 4}, rng, 1.5);
    x[0] = 1;
    x[1] = -1;
    Tensor r = random_tensor(x.shape(), rng);
    Var v = variable(x);
    backward(project(sign_ste(v), r));
    const Tensor direct = ste_backward(r, x);
    for (std::size_t i = 0; i < x.size(); ++i) {
      const real want = std::fabs(x[i]) <= 1 ? r[i] : real(0);
      if (v->grad[i] != want || direct[i] != want) return false;
    }
  }
  return true;
}

}  // namespace

GradientVerdict run_gradient_criterion(int instances_per_case) {
  GradientVerdict out;
  const auto cases = gradient_cases();
  for (std::size_t c = 0; c < cases.size(); ++c) {
    Rng rng(5000 + c);
    for (int i = 0; i < instances_per_case; ++i) {
      const double err = cases[c].run(rng);
      ++out.instances;
      if (!(err <= out.worst)) {
        out.worst = err;
        out.worst_case = cases[c].name;
      }
    }
  }
  out.cases = static_cast<int>(cases.size());
  Rng rng(77);
  out.ste_bitwise = ste_is_bitwise(rng);
  return out;
}
