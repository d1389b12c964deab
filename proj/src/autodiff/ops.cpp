#include "autodiff/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "common/error.hpp"

BNAS_NS_BEGIN

namespace {

void accumulate(const Var& in, const Tensor& g) {
  if (!in->requires_grad) return;
  Tensor& dst = in->grad_ref();
  axpy(real(1), g.span(), dst.span());
}

bool wants(const Node& self, std::size_t i) { return self.inputs[i]->requires_grad; }

}  // namespace

std::vector<double> softmax(std::span<const real> row) {
  double mx = -std::numeric_limits<double>::infinity();
  for (real v : row) mx = std::max(mx, static_cast<double>(v));
  std::vector<double> p(row.size());
  double z = 0;
  for (std::size_t i = 0; i < row.size(); ++i) z += (p[i] = std::exp(static_cast<double>(row[i]) - mx));
  for (double& v : p) v /= z;
  return p;
}

Var conv2d(const Var& x, const Var& weight, const ConvGeometry& g, int groups) {
  const Shape xs = x->shape(), ws = weight->shape();
  BNAS_EXPECT(groups >= 1 && xs.c % groups == 0 && ws.n % groups == 0 && ws.c * groups == xs.c &&
                  ws.h == g.kh && ws.w == g.kw,
              GeometryError, "conv2d: weight " + ws.str() + " does not fit input " + xs.str());
  g.check(xs.h, xs.w);
  const int oh = g.out_h(xs.h), ow = g.out_w(xs.w), p = oh * ow, k = xs.c * g.taps();
  const int kg = k / groups, fg = ws.n / groups;
  Tensor out({xs.n, ws.n, oh, ow});
  std::vector<real> rows(static_cast<std::size_t>(p) * k);
  for (int n = 0; n < xs.n; ++n) {
    im2row(x->value.data() + n * xs.item(), xs.c, xs.h, xs.w, g, 0, rows.data());
    for (int gi = 0; gi < groups; ++gi)
      gemm(false, true, fg, p, kg, 1, weight->value.data() + static_cast<std::size_t>(gi) * fg * kg, kg,
           rows.data() + gi * kg, k, 0, out.data() + n * out.shape().item() + static_cast<std::size_t>(gi) * fg * p, p);
  }
  return make_node("conv2d", std::move(out), {x, weight}, [g, groups](Node& self) {
    const Var& x = self.inputs[0];
    const Var& w = self.inputs[1];
    const Shape xs = x->shape(), ws = w->shape();
    const int p = self.shape().plane(), k = xs.c * g.taps();
    const int kg = k / groups, fg = ws.n / groups;
    std::vector<real> rows(static_cast<std::size_t>(p) * k);
    for (int n = 0; n < xs.n; ++n) {
      const real* go = self.grad.data() + n * self.shape().item();
      if (wants(self, 1)) {
        im2row(x->value.data() + n * xs.item(), xs.c, xs.h, xs.w, g, 0, rows.data());
        for (int gi = 0; gi < groups; ++gi)
          gemm(false, false, fg, kg, p, 1, go + static_cast<std::size_t>(gi) * fg * p, p, rows.data() + gi * kg, k, 1,
               w->grad_ref().data() + static_cast<std::size_t>(gi) * fg * kg, kg);
      }
      if (wants(self, 0)) {
        for (int gi = 0; gi < groups; ++gi)
          gemm(true, false, p, kg, fg, 1, go + static_cast<std::size_t>(gi) * fg * p, p,
               w->value.data() + static_cast<std::size_t>(gi) * fg * kg, kg, 0, rows.data() + gi * kg, k);
        row2im_add(rows.data(), xs.c, xs.h, xs.w, g, x->grad_ref().data() + n * xs.item());
      }
    }
  });
}

Var linear(const Var& x, const Var& weight, const Var& bias) {
  const Shape xs = x->shape(), ws = weight->shape();
  const int in = static_cast<int>(xs.item()), outf = ws.n;
  BNAS_EXPECT(ws.item() == static_cast<std::size_t>(in), GeometryError,
              "linear: weight " + ws.str() + " does not fit input " + xs.str());
  Tensor out({xs.n, outf, 1, 1});
  if (bias) {
    BNAS_EXPECT(bias->value.size() == static_cast<std::size_t>(outf), GeometryError, "linear: bias size");
    for (int n = 0; n < xs.n; ++n)
      std::copy(bias->value.data(), bias->value.data() + outf, out.data() + n * outf);
  }
  gemm(false, true, xs.n, outf, in, 1, x->value.data(), in, weight->value.data(), in, bias ? 1 : 0,
       out.data(), outf);
  std::vector<Var> inputs{x, weight};
  if (bias) inputs.push_back(bias);
  return make_node("linear", std::move(out), std::move(inputs), [in, outf](Node& self) {
    const Var& x = self.inputs[0];
    const Var& w = self.inputs[1];
    const int nb = x->shape().n;
    const real* go = self.grad.data();
    if (wants(self, 1)) gemm(true, false, outf, in, nb, 1, go, outf, x->value.data(), in, 1, w->grad_ref().data(), in);
    if (wants(self, 0)) gemm(false, false, nb, in, outf, 1, go, outf, w->value.data(), in, 1, x->grad_ref().data(), in);
    if (self.inputs.size() > 2 && wants(self, 2)) {
      real* db = self.inputs[2]->grad_ref().data();
      for (int n = 0; n < nb; ++n)
        for (int o = 0; o < outf; ++o) db[o] += go[n * outf + o];
    }
  });
}

Var batchnorm(const Var& x, const Var& gamma, const Var& beta, BatchNormState& state, bool training) {
  const Shape s = x->shape();
  BNAS_EXPECT(state.running_mean.size() == static_cast<std::size_t>(s.c), GeometryError,
              "batchnorm: state has " + std::to_string(state.running_mean.size()) + " channels, input " + s.str());
  const std::size_t plane = s.plane();
  const double m = static_cast<double>(s.n) * plane;
  std::vector<real> mean(s.c), invstd(s.c);
  if (training) {
    BNAS_EXPECT(m > 1, GeometryError, "batchnorm: training needs more than one value per channel");
    for (int c = 0; c < s.c; ++c) {
      double acc = 0, acc2 = 0;
      for (int n = 0; n < s.n; ++n) {
        const real* p = x->value.data() + x->value.index(n, c, 0, 0);
        for (std::size_t i = 0; i < plane; ++i) acc += p[i];
      }
      const double mu = acc / m;
      for (int n = 0; n < s.n; ++n) {
        const real* p = x->value.data() + x->value.index(n, c, 0, 0);
        for (std::size_t i = 0; i < plane; ++i) acc2 += (p[i] - mu) * (p[i] - mu);
      }
      const double var = acc2 / m;
      mean[c] = static_cast<real>(mu);
      invstd[c] = static_cast<real>(1.0 / std::sqrt(var + state.eps));
      state.running_mean[c] = (1 - state.momentum) * state.running_mean[c] + state.momentum * static_cast<real>(mu);
      state.running_var[c] =
          (1 - state.momentum) * state.running_var[c] + state.momentum * static_cast<real>(var * m / (m - 1));
    }
  } else {
    for (int c = 0; c < s.c; ++c) {
      mean[c] = state.running_mean[c];
      invstd[c] = static_cast<real>(1.0 / std::sqrt(static_cast<double>(state.running_var[c]) + state.eps));
    }
  }
  Tensor out(s);
  for (int n = 0; n < s.n; ++n)
    for (int c = 0; c < s.c; ++c) {
      const real gm = gamma ? gamma->value[c] : real(1);
      const real bt = beta ? beta->value[c] : real(0);
      const std::size_t off = x->value.index(n, c, 0, 0);
      for (std::size_t i = 0; i < plane; ++i) out[off + i] = gm * (x->value[off + i] - mean[c]) * invstd[c] + bt;
    }
  std::vector<Var> inputs{x, gamma ? gamma : constant(Tensor()), beta ? beta : constant(Tensor())};
  return make_node("batchnorm", std::move(out), std::move(inputs),
                   [mean, invstd, training, has_gamma = bool(gamma)](Node& self) {
    const Var& x = self.inputs[0];
    const Var& gamma = self.inputs[1];
    const Var& beta = self.inputs[2];
    const Shape s = x->shape();
    const std::size_t plane = s.plane();
    const double m = static_cast<double>(s.n) * plane;
    for (int c = 0; c < s.c; ++c) {
      const real gm = has_gamma ? gamma->value[c] : real(1);
      double sum_g = 0, sum_gx = 0;
      for (int n = 0; n < s.n; ++n) {
        const std::size_t off = x->value.index(n, c, 0, 0);
        for (std::size_t i = 0; i < plane; ++i) {
          const double xhat = (x->value[off + i] - mean[c]) * invstd[c];
          sum_g += self.grad[off + i];
          sum_gx += self.grad[off + i] * xhat;
        }
      }
      if (gamma->requires_grad) gamma->grad_ref()[c] += static_cast<real>(sum_gx);
      if (beta->requires_grad) beta->grad_ref()[c] += static_cast<real>(sum_g);
      if (!x->requires_grad) continue;
      Tensor& dx = x->grad_ref();
      for (int n = 0; n < s.n; ++n) {
        const std::size_t off = x->value.index(n, c, 0, 0);
        for (std::size_t i = 0; i < plane; ++i) {
          if (training) {
            const double xhat = (x->value[off + i] - mean[c]) * invstd[c];
            dx[off + i] += static_cast<real>(gm * invstd[c] * (self.grad[off + i] - sum_g / m - xhat * sum_gx / m));
          } else {
            dx[off + i] += gm * invstd[c] * self.grad[off + i];
          }
        }
      }
    }
  });
}

Var relu(const Var& x) {
  Tensor out = x->value;
  for (real& v : out.vec()) v = v > 0 ? v : real(0);
  return make_node("relu", std::move(out), {x}, [](Node& self) {
    const Var& x = self.inputs[0];
    Tensor& dx = x->grad_ref();
    for (std::size_t i = 0; i < dx.size(); ++i)
      if (x->value[i] > 0) dx[i] += self.grad[i];
  });
}

Var max_pool(const Var& x, int kernel, int stride, int padding) {
  const Shape s = x->shape();
  ConvGeometry g{kernel, kernel, stride, 1, padding};
  g.check(s.h, s.w);
  const int oh = g.out_h(s.h), ow = g.out_w(s.w);
  Tensor out({s.n, s.c, oh, ow});
  std::vector<std::size_t> arg(out.size());
  std::size_t o = 0;
  for (int n = 0; n < s.n; ++n)
    for (int c = 0; c < s.c; ++c)
      for (int y = 0; y < oh; ++y)
        for (int xo = 0; xo < ow; ++xo, ++o) {
          real best = -std::numeric_limits<real>::infinity();
          std::size_t bi = 0;
          for (int i = 0; i < kernel; ++i) {
            const int iy = y * stride - padding + i;
            if (iy < 0 || iy >= s.h) continue;
            for (int j = 0; j < kernel; ++j) {
              const int ix = xo * stride - padding + j;
              if (ix < 0 || ix >= s.w) continue;
              const std::size_t idx = x->value.index(n, c, iy, ix);
              if (x->value[idx] > best) {
                best = x->value[idx];
                bi = idx;
              }
            }
          }
          out[o] = best;
          arg[o] = bi;
        }
  return make_node("max_pool", std::move(out), {x}, [arg = std::move(arg)](Node& self) {
    Tensor& dx = self.inputs[0]->grad_ref();
    for (std::size_t i = 0; i < arg.size(); ++i) dx[arg[i]] += self.grad[i];
  });
}

Var avg_pool(const Var& x, int kernel, int stride, int padding) {
  const Shape s = x->shape();
  ConvGeometry g{kernel, kernel, stride, 1, padding};
  g.check(s.h, s.w);
  const int oh = g.out_h(s.h), ow = g.out_w(s.w);
  Tensor out({s.n, s.c, oh, ow});
  auto window = [=](int y, int xo, auto&& fn) {
    int count = 0;
    for (int i = 0; i < kernel; ++i) {
      const int iy = y * stride - padding + i;
      if (iy < 0 || iy >= s.h) continue;
      for (int j = 0; j < kernel; ++j) {
        const int ix = xo * stride - padding + j;
        if (ix < 0 || ix >= s.w) continue;
        fn(iy, ix);
        ++count;
      }
    }
    return count;
  };
  std::size_t o = 0;
  for (int n = 0; n < s.n; ++n)
    for (int c = 0; c < s.c; ++c)
      for (int y = 0; y < oh; ++y)
        for (int xo = 0; xo < ow; ++xo, ++o) {
          double acc = 0;
          const int cnt = window(y, xo, [&](int iy, int ix) { acc += x->value.at(n, c, iy, ix); });
          out[o] = static_cast<real>(acc / cnt);
        }
  return make_node("avg_pool", std::move(out), {x}, [window, oh, ow](Node& self) {
    const Var& x = self.inputs[0];
    const Shape s = x->shape();
    Tensor& dx = x->grad_ref();
    std::size_t o = 0;
    for (int n = 0; n < s.n; ++n)
      for (int c = 0; c < s.c; ++c)
        for (int y = 0; y < oh; ++y)
          for (int xo = 0; xo < ow; ++xo, ++o) {
            const int cnt = window(y, xo, [](int, int) {});
            const real gv = self.grad[o] / static_cast<real>(cnt);
            window(y, xo, [&](int iy, int ix) { dx.at(n, c, iy, ix) += gv; });
          }
  });
}

Var global_avg_pool(const Var& x) {
  const Shape s = x->shape();
  const std::size_t plane = s.plane();
  Tensor out({s.n, s.c, 1, 1});
  for (std::size_t i = 0; i < out.size(); ++i) {
    double acc = 0;
    for (std::size_t k = 0; k < plane; ++k) acc += x->value[i * plane + k];
    out[i] = static_cast<real>(acc / static_cast<double>(plane));
  }
  return make_node("global_avg_pool", std::move(out), {x}, [plane](Node& self) {
    Tensor& dx = self.inputs[0]->grad_ref();
    for (std::size_t i = 0; i < self.grad.size(); ++i) {
      const real gv = self.grad[i] / static_cast<real>(plane);
      for (std::size_t k = 0; k < plane; ++k) dx[i * plane + k] += gv;
    }
  });
}

Var flatten(const Var& x) {
  const Shape s = x->shape();
  Tensor out = x->value.reshaped({s.n, static_cast<int>(s.item()), 1, 1});
  return make_node("flatten", std::move(out), {x}, [](Node& self) {
    accumulate(self.inputs[0], self.grad.reshaped(self.inputs[0]->shape()));
  });
}

Var concat(const std::vector<Var>& xs) {
  BNAS_EXPECT(!xs.empty(), ContractViolation, "concat of nothing");
  Shape s = xs[0]->shape();
  int channels = 0;
  for (const auto& x : xs) {
    const Shape t = x->shape();
    BNAS_EXPECT(t.n == s.n && t.h == s.h && t.w == s.w, GeometryError,
                "concat: shape " + t.str() + " incompatible with " + s.str());
    channels += t.c;
  }
  Shape os{s.n, channels, s.h, s.w};
  Tensor out(os);
  for (int n = 0; n < s.n; ++n) {
    real* dst = out.data() + n * os.item();
    for (const auto& x : xs) {
      const std::size_t len = x->shape().item();
      std::copy_n(x->value.data() + n * len, len, dst);
      dst += len;
    }
  }
  return make_node("concat", std::move(out), xs, [](Node& self) {
    const Shape os = self.shape();
    std::size_t offset = 0;
    for (const auto& x : self.inputs) {
      const std::size_t len = x->shape().item();
      if (x->requires_grad) {
        Tensor& dx = x->grad_ref();
        for (int n = 0; n < os.n; ++n) {
          const real* src = self.grad.data() + n * os.item() + offset;
          real* dst = dx.data() + n * len;
          for (std::size_t i = 0; i < len; ++i) dst[i] += src[i];
        }
      }
      offset += len;
    }
  });
}

Var add(const Var& a, const Var& b) { return add_n({a, b}); }

Var add_n(const std::vector<Var>& xs) {
  BNAS_EXPECT(!xs.empty(), ContractViolation, "add of nothing");
  Tensor out = xs[0]->value;
  for (std::size_t i = 1; i < xs.size(); ++i) {
    BNAS_EXPECT(xs[i]->shape() == out.shape(), GeometryError,
                "add: shape " + xs[i]->shape().str() + " vs " + out.shape().str());
    axpy(real(1), xs[i]->value.span(), out.span());
  }
  return make_node("add", std::move(out), xs, [](Node& self) {
    for (const auto& x : self.inputs) accumulate(x, self.grad);
  });
}

Var scale(const Var& x, real s) {
  Tensor out = x->value;
  for (real& v : out.vec()) v *= s;
  return make_node("scale", std::move(out), {x}, [s](Node& self) {
    if (!self.inputs[0]->requires_grad) return;
    axpy(s, self.grad.span(), self.inputs[0]->grad_ref().span());
  });
}

Var sum(const Var& x) {
  return make_node("sum", Tensor::scalar(static_cast<real>(bnas::sum(x->value))), {x}, [](Node& self) {
    Tensor& dx = self.inputs[0]->grad_ref();
    for (real& v : dx.vec()) v += self.grad[0];
  });
}

Var dot(const Var& a, const Var& b) {
  BNAS_EXPECT(a->value.size() == b->value.size(), GeometryError, "dot: length mismatch");
  double acc = 0;
  for (std::size_t i = 0; i < a->value.size(); ++i) acc += static_cast<double>(a->value[i]) * b->value[i];
  return make_node("dot", Tensor::scalar(static_cast<real>(acc)), {a, b}, [](Node& self) {
    const Var& a = self.inputs[0];
    const Var& b = self.inputs[1];
    if (a->requires_grad) axpy(self.grad[0], b->value.span(), a->grad_ref().span());
    if (b->requires_grad) axpy(self.grad[0], a->value.span(), b->grad_ref().span());
  });
}

Var channel_pad(const Var& x, int channels) {
  const Shape s = x->shape();
  BNAS_EXPECT(channels >= s.c, GeometryError,
              "channel_pad: cannot shrink " + std::to_string(s.c) + " channels to " + std::to_string(channels));
  if (channels == s.c) return x;
  Shape os{s.n, channels, s.h, s.w};
  Tensor out(os);
  for (int n = 0; n < s.n; ++n) std::copy_n(x->value.data() + n * s.item(), s.item(), out.data() + n * os.item());
  return make_node("channel_pad", std::move(out), {x}, [](Node& self) {
    const Var& x = self.inputs[0];
    const Shape s = x->shape();
    Tensor& dx = x->grad_ref();
    for (int n = 0; n < s.n; ++n) {
      const real* src = self.grad.data() + n * self.shape().item();
      for (std::size_t i = 0; i < s.item(); ++i) dx[n * s.item() + i] += src[i];
    }
  });
}

Var channel_fold(const Var& x, int channels) {
  const Shape s = x->shape();
  BNAS_EXPECT(channels >= 1 && channels <= s.c, GeometryError,
              "channel_fold: cannot fold " + std::to_string(s.c) + " channels to " + std::to_string(channels));
  if (channels == s.c) return x;
  Shape os{s.n, channels, s.h, s.w};
  const std::size_t plane = static_cast<std::size_t>(s.h) * s.w;
  Tensor out(os);
  for (int n = 0; n < s.n; ++n)
    for (int c = 0; c < s.c; ++c) {
      const real* src = x->value.data() + (n * s.c + c) * plane;
      real* dst = out.data() + (n * channels + c % channels) * plane;
      for (std::size_t i = 0; i < plane; ++i) dst[i] += src[i];
    }
  return make_node("channel_fold", std::move(out), {x}, [channels, plane](Node& self) {
    const Var& x = self.inputs[0];
    const Shape s = x->shape();
    Tensor& dx = x->grad_ref();
    for (int n = 0; n < s.n; ++n)
      for (int c = 0; c < s.c; ++c) {
        const real* g = self.grad.data() + (n * channels + c % channels) * plane;
        real* d = dx.data() + (n * s.c + c) * plane;
        for (std::size_t i = 0; i < plane; ++i) d[i] += g[i];
      }
  });
}

Var zeros(Shape s) { return constant(Tensor(s)); }

Var softmax_cross_entropy(const Var& logits, const std::vector<int>& labels) {
  const Shape s = logits->shape();
  const int k = static_cast<int>(s.item());
  BNAS_EXPECT(labels.size() == static_cast<std::size_t>(s.n), GeometryError,
              "softmax_cross_entropy: " + std::to_string(labels.size()) + " labels for batch " + std::to_string(s.n));
  std::vector<real> probs(static_cast<std::size_t>(s.n) * k);
  double loss = 0;
  for (int n = 0; n < s.n; ++n) {
    BNAS_EXPECT(labels[n] >= 0 && labels[n] < k, ContractViolation, "label out of range");
    auto p = softmax(logits->value.span().subspan(static_cast<std::size_t>(n) * k, k));
    for (int j = 0; j < k; ++j) probs[n * k + j] = static_cast<real>(p[j]);
    loss -= std::log(std::max(p[labels[n]], 1e-300));
  }
  return make_node("softmax_cross_entropy", Tensor::scalar(static_cast<real>(loss / s.n)), {logits},
                   [probs = std::move(probs), labels, k](Node& self) {
    Tensor& dx = self.inputs[0]->grad_ref();
    const int nb = static_cast<int>(labels.size());
    const real gs = self.grad[0] / static_cast<real>(nb);
    for (int n = 0; n < nb; ++n)
      for (int j = 0; j < k; ++j)
        dx[n * k + j] += gs * (probs[n * k + j] - (j == labels[n] ? real(1) : real(0)));
  });
}

Var row_softmax(const Var& table) {
  const Shape s = table->shape();
  const int k = static_cast<int>(s.item());
  Tensor out(s);
  for (int r = 0; r < s.n; ++r) {
    auto p = softmax(table->value.span().subspan(static_cast<std::size_t>(r) * k, k));
    for (int j = 0; j < k; ++j) out[r * k + j] = static_cast<real>(p[j]);
  }
  return make_node("row_softmax", std::move(out), {table}, [k](Node& self) {
    Tensor& dx = self.inputs[0]->grad_ref();
    for (int r = 0; r < self.shape().n; ++r) {
      const real* p = self.value.data() + r * k;
      const real* g = self.grad.data() + r * k;
      double pg = 0;
      for (int j = 0; j < k; ++j) pg += static_cast<double>(p[j]) * g[j];
      for (int j = 0; j < k; ++j) dx[r * k + j] += static_cast<real>(p[j] * (g[j] - pg));
    }
  });
}

Var weighted_sum(const std::vector<Var>& xs, const Var& probs, int row) {
  const int k = static_cast<int>(probs->shape().item());
  BNAS_EXPECT(static_cast<int>(xs.size()) == k, GeometryError,
              "weighted_sum: " + std::to_string(xs.size()) + " branches for " + std::to_string(k) + " weights");
  BNAS_EXPECT(row >= 0 && row < probs->shape().n, ContractViolation, "weighted_sum: row out of range");
  Tensor out(xs[0]->shape());
  for (int o = 0; o < k; ++o) {
    BNAS_EXPECT(xs[o]->shape() == out.shape(), GeometryError,
                "mixed edge: op output " + xs[o]->shape().str() + " differs from " + out.shape().str());
    axpy(probs->value[row * k + o], xs[o]->value.span(), out.span());
  }
  std::vector<Var> inputs(xs);
  inputs.push_back(probs);
  return make_node("weighted_sum", std::move(out), std::move(inputs), [k, row](Node& self) {
    const Var& probs = self.inputs[k];
    for (int o = 0; o < k; ++o) {
      const Var& x = self.inputs[o];
      if (x->requires_grad) axpy(probs->value[row * k + o], self.grad.span(), x->grad_ref().span());
      if (probs->requires_grad) {
        double acc = 0;
        for (std::size_t i = 0; i < self.grad.size(); ++i) acc += static_cast<double>(self.grad[i]) * x->value[i];
        probs->grad_ref()[row * k + o] += static_cast<real>(acc);
      }
    }
  });
}

Var softmax_entropy_sum(const Var& table) {
  const Shape s = table->shape();
  const int k = static_cast<int>(s.item());
  std::vector<double> probs, row_h(s.n);
  double total = 0;
  for (int r = 0; r < s.n; ++r) {
    auto p = softmax(table->value.span().subspan(static_cast<std::size_t>(r) * k, k));
    double h = 0;
    for (double v : p)
      if (v > 0) h -= v * std::log(v);
    row_h[r] = h;
    total += h;
    probs.insert(probs.end(), p.begin(), p.end());
  }
  return make_node("softmax_entropy_sum", Tensor::scalar(static_cast<real>(total)), {table},
                   [probs = std::move(probs), row_h = std::move(row_h), k](Node& self) {
    // dH/da_j = -p_j (ln p_j + H)
    Tensor& dx = self.inputs[0]->grad_ref();
    for (std::size_t r = 0; r < row_h.size(); ++r)
      for (int j = 0; j < k; ++j) {
        const double p = probs[r * k + j];
        const double lp = p > 0 ? std::log(p) : 0.0;
        dx[r * k + j] += static_cast<real>(-self.grad[0] * p * (lp + row_h[r]));
      }
  });
}

Var sign_ste(const Var& x) {
  Tensor out = x->value;
  for (real& v : out.vec()) v = v >= 0 ? real(1) : real(-1);
  return make_node("sign_ste", std::move(out), {x}, [](Node& self) {
    const Var& x = self.inputs[0];
    Tensor& dx = x->grad_ref();
    for (std::size_t i = 0; i < dx.size(); ++i)
      if (std::fabs(x->value[i]) <= real(1)) dx[i] += self.grad[i];
  });
}

BNAS_NS_END
