#include "binary/layers.hpp"

#include <cmath>

#include "common/error.hpp"

BNAS_NS_BEGIN

Var binary_conv(const Var& pre_sign, const Var& weight, const ConvGeometry& g, int groups) {
  BinaryConvKernel kernel = BinaryConvKernel::from_weights(weight->value, g, groups);
  Tensor kmap;
  Tensor out = binary_conv_forward(pre_sign->value, kernel, &kmap);
  return make_node("binary_conv", std::move(out), {pre_sign, weight},
                   [g, groups, beta = std::move(kernel.weights.beta), kmap = std::move(kmap)](Node& self) {
    const Var& a = self.inputs[0];
    const Var& w = self.inputs[1];
    const Shape as = a->shape(), ws = w->shape(), os = self.shape();
    const int p_count = static_cast<int>(os.plane());
    const int k_all = as.c * g.taps();
    const int k_group = k_all / groups;
    const int f_group = ws.n / groups;

    Tensor sign_w = w->value;
    for (real& v : sign_w.vec()) v = v >= 0 ? real(1) : real(-1);

    std::vector<real> rows(static_cast<std::size_t>(p_count) * k_all);
    std::vector<real> drows(rows.size());
    std::vector<real> scaled(static_cast<std::size_t>(ws.n) * p_count);
    Tensor dsign(as);
    Tensor dsign_w(ws);
    for (int n = 0; n < as.n; ++n) {
      const real* go = self.grad.data() + n * os.item();
      const real* km = kmap.data() + static_cast<std::size_t>(n) * p_count;
      for (int f = 0; f < ws.n; ++f)
        for (int p = 0; p < p_count; ++p)
          scaled[static_cast<std::size_t>(f) * p_count + p] = go[f * p_count + p] * beta[f] * km[p];
      // Sign patches; padding taps read 0 and therefore sign to +1.
      if (w->requires_grad) {
        im2row(a->value.data() + n * as.item(), as.c, as.h, as.w, g, 0, rows.data());
        for (real& v : rows) v = v >= 0 ? real(1) : real(-1);
      }
      for (int gi = 0; gi < groups; ++gi) {
        const real* sg = scaled.data() + static_cast<std::size_t>(gi) * f_group * p_count;
        if (w->requires_grad)
          gemm(false, false, f_group, k_group, p_count, 1, sg, p_count, rows.data() + gi * k_group, k_all, 1,
               dsign_w.data() + static_cast<std::size_t>(gi) * f_group * k_group, k_group);
        if (a->requires_grad)
          gemm(true, false, p_count, k_group, f_group, 1, sg, p_count,
               sign_w.data() + static_cast<std::size_t>(gi) * f_group * k_group, k_group, 0,
               drows.data() + gi * k_group, k_all);
      }
      if (a->requires_grad) row2im_add(drows.data(), as.c, as.h, as.w, g, dsign.data() + n * as.item());
    }
    if (a->requires_grad) {
      Tensor& da = a->grad_ref();
      for (std::size_t i = 0; i < da.size(); ++i)
        if (std::fabs(a->value[i]) <= real(1)) da[i] += dsign[i];
    }
    if (w->requires_grad) {
      Tensor& dw = w->grad_ref();
      for (std::size_t i = 0; i < dw.size(); ++i)
        if (std::fabs(w->value[i]) <= real(1)) dw[i] += dsign_w[i];
    }
  });
}

BinaryConvLayer::BinaryConvLayer(int in, int out, ConvGeometry g, Rng& rng, int groups)
    : geom_(g),
      groups_(groups),
      bn_(in),
      weight_(std::make_shared<Parameter>(he_normal({out, in / groups, g.kh, g.kw}, rng), ParamRole::Weight, true)) {
  BNAS_EXPECT(in % groups == 0 && out % groups == 0, GeometryError, "binary conv: channels not divisible by groups");
  weight_->binary = true;
}

Var BinaryConvLayer::forward(const Var& x, const Context& ctx) {
  return binary_conv(bn_.forward(x, ctx), weight_->var, geom_, groups_);
}

void BinaryConvLayer::collect(const std::string& prefix, StateList& out) {
  bn_.collect(prefix + "bn.", out);
  out.params.push_back({prefix + "weight", weight_.get()});
}

BinarySeparableLayer::BinarySeparableLayer(int in, int out, ConvGeometry g, Rng& rng)
    : geom_(g),
      bn_(in),
      depthwise_(std::make_shared<Parameter>(he_normal({in, 1, g.kh, g.kw}, rng), ParamRole::Weight, true)),
      pointwise_(std::make_shared<Parameter>(he_normal({out, in, 1, 1}, rng), ParamRole::Weight, true)) {
  depthwise_->binary = pointwise_->binary = true;
}

Var BinarySeparableLayer::forward(const Var& x, const Context& ctx) {
  const int channels = x->shape().c;
  Var a2 = binary_conv(bn_.forward(x, ctx), depthwise_->var, geom_, channels);
  return binary_conv(a2, pointwise_->var, ConvGeometry{1, 1, 1, 1, 0}, 1);
}

void BinarySeparableLayer::collect(const std::string& prefix, StateList& out) {
  bn_.collect(prefix + "bn.", out);
  out.params.push_back({prefix + "depthwise", depthwise_.get()});
  out.params.push_back({prefix + "pointwise", pointwise_.get()});
}

BNAS_NS_END
