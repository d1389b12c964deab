#include "autodiff/module.hpp"

#include <cmath>

BNAS_NS_BEGIN

Parameter::Parameter(Tensor init, ParamRole r, bool conv)
    : var(variable(std::move(init))), role(r), conv_weight(conv) {
  momentum = Tensor(var->value.shape());
}

void Parameter::zero_grad() {
  if (!var->grad.empty()) var->grad.fill(0);
}

std::vector<Parameter*> StateList::select(ParamRole role) const {
  std::vector<Parameter*> out;
  for (const auto& p : params)
    if (p.param->role == role) out.push_back(p.param);
  return out;
}

std::size_t StateList::count(ParamRole role) const {
  std::size_t n = 0;
  for (const auto& p : params)
    if (p.param->role == role) n += p.param->value().size();
  return n;
}

void StateList::zero_grad() const {
  for (const auto& p : params) p.param->zero_grad();
}

Tensor he_normal(Shape s, Rng& rng) {
  Tensor t(s);
  const double fan_in = static_cast<double>(s.item());
  const double stddev = std::sqrt(2.0 / fan_in);
  for (real& v : t.vec()) v = static_cast<real>(rng.normal() * stddev);
  return t;
}

Conv2dLayer::Conv2dLayer(int in, int out, ConvGeometry g, Rng& rng, int groups)
    : geom_(g),
      groups_(groups),
      weight_(std::make_shared<Parameter>(he_normal({out, in / groups, g.kh, g.kw}, rng), ParamRole::Weight, true)) {}

void Conv2dLayer::collect(const std::string& prefix, StateList& out) {
  out.params.push_back({prefix + "weight", weight_.get()});
}

BatchNormLayer::BatchNormLayer(int channels, bool affine) : state_(channels) {
  if (affine) {
    gamma_ = std::make_shared<Parameter>(Tensor({1, channels, 1, 1}, 1));
    beta_ = std::make_shared<Parameter>(Tensor({1, channels, 1, 1}, 0));
  }
}

Var BatchNormLayer::forward(const Var& x, const Context& ctx) {
  return batchnorm(x, gamma_ ? gamma_->var : nullptr, beta_ ? beta_->var : nullptr, state_, ctx.training);
}

void BatchNormLayer::collect(const std::string& prefix, StateList& out) {
  if (gamma_) {
    out.params.push_back({prefix + "gamma", gamma_.get()});
    out.params.push_back({prefix + "beta", beta_.get()});
  }
  out.buffers.push_back({prefix + "running_mean", &state_.running_mean});
  out.buffers.push_back({prefix + "running_var", &state_.running_var});
}

LinearLayer::LinearLayer(int in, int out, Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(in));
  Tensor w({out, in, 1, 1}), b({1, out, 1, 1});
  for (real& v : w.vec()) v = static_cast<real>(rng.uniform(-bound, bound));
  for (real& v : b.vec()) v = static_cast<real>(rng.uniform(-bound, bound));
  weight_ = std::make_shared<Parameter>(std::move(w));
  bias_ = std::make_shared<Parameter>(std::move(b));
}

void LinearLayer::collect(const std::string& prefix, StateList& out) {
  out.params.push_back({prefix + "weight", weight_.get()});
  out.params.push_back({prefix + "bias", bias_.get()});
}

double conv_grad_magnitude(const StateList& state) {
  double s = 0;
  for (const auto& p : state.params)
    if (p.param->conv_weight && p.param->var->grad.size() == p.param->var->value.size())
      for (real g : p.param->var->grad.span()) s += std::fabs(static_cast<double>(g));
  return s;
}

BNAS_NS_END
