#pragma once

#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "autodiff/graph.hpp"
#include "autodiff/ops.hpp"
#include "common/rng.hpp"
#include "tensor/patches.hpp"
#include "tensor/tensor.hpp"

namespace testing_support {

using namespace bnas;

inline Tensor random_tensor(Shape s, Rng& rng, double scale = 1.0) {
  Tensor t(s);
  for (real& v : t.vec()) v = static_cast<real>(rng.normal() * scale);
  return t;
}

inline double sgn(double v) { return v >= 0 ? 1.0 : -1.0; }

// Zero outside the image.
inline double padded(const Tensor& t, int n, int c, int y, int x) {
  const Shape& s = t.shape();
  if (y < 0 || x < 0 || y >= s.h || x >= s.w) return 0.0;
  return t.at(n, c, y, x);
}

// Direct-loop convolution in double.
inline std::vector<double> naive_conv(const Tensor& x, const Tensor& w, const ConvGeometry& g, int groups = 1) {
  const Shape xs = x.shape(), ws = w.shape();
  const int oh = g.out_h(xs.h), ow = g.out_w(xs.w);
  const int cin_g = xs.c / groups, f_g = ws.n / groups;
  std::vector<double> out(static_cast<std::size_t>(xs.n) * ws.n * oh * ow, 0.0);
  for (int n = 0; n < xs.n; ++n)
    for (int f = 0; f < ws.n; ++f)
      for (int y = 0; y < oh; ++y)
        for (int z = 0; z < ow; ++z) {
          double acc = 0;
          const int grp = f / f_g;
          for (int c = 0; c < cin_g; ++c)
            for (int i = 0; i < g.kh; ++i)
              for (int j = 0; j < g.kw; ++j)
                acc += w.at(f, c, i, j) * padded(x, n, grp * cin_g + c, y * g.stride - g.padding + i * g.dilation,
                                                 z * g.stride - g.padding + j * g.dilation);
          out[((static_cast<std::size_t>(n) * ws.n + f) * oh + y) * ow + z] = acc;
        }
  return out;
}

// beta K (.) (sign(W) * sign(A)) written out loop by loop: padding taps
// count as sign(0) = +1 in the sign product and as 0 in K.
inline std::vector<double> naive_binary_conv(const Tensor& a, const Tensor& w, const ConvGeometry& g,
                                             int groups = 1) {
  const Shape as = a.shape(), ws = w.shape();
  const int oh = g.out_h(as.h), ow = g.out_w(as.w);
  const int cin_g = as.c / groups, f_g = ws.n / groups;
  std::vector<double> beta(ws.n, 0.0);
  for (int f = 0; f < ws.n; ++f) {
    for (int c = 0; c < cin_g; ++c)
      for (int i = 0; i < g.kh; ++i)
        for (int j = 0; j < g.kw; ++j) beta[f] += std::fabs(w.at(f, c, i, j));
    beta[f] /= cin_g * g.kh * g.kw;
  }
  std::vector<double> out(static_cast<std::size_t>(as.n) * ws.n * oh * ow, 0.0);
  for (int n = 0; n < as.n; ++n) {
    for (int y = 0; y < oh; ++y)
      for (int z = 0; z < ow; ++z) {
        double kval = 0;
        for (int i = 0; i < g.kh; ++i)
          for (int j = 0; j < g.kw; ++j) {
            const int yy = y * g.stride - g.padding + i * g.dilation;
            const int xx = z * g.stride - g.padding + j * g.dilation;
            double d = 0;
            for (int c = 0; c < as.c; ++c) d += std::fabs(padded(a, n, c, yy, xx));
            kval += d / as.c;
          }
        kval /= g.kh * g.kw;
        for (int f = 0; f < ws.n; ++f) {
          const int grp = f / f_g;
          double acc = 0;
          for (int c = 0; c < cin_g; ++c)
            for (int i = 0; i < g.kh; ++i)
              for (int j = 0; j < g.kw; ++j)
                acc += sgn(w.at(f, c, i, j)) * sgn(padded(a, n, grp * cin_g + c, y * g.stride - g.padding + i * g.dilation,
                                                          z * g.stride - g.padding + j * g.dilation));
          out[((static_cast<std::size_t>(n) * ws.n + f) * oh + y) * ow + z] = beta[f] * kval * acc;
        }
      }
  }
  return out;
}

inline double rel_err(double a, double b, double floor = 1e-6) {
  return std::fabs(a - b) / std::max({std::fabs(a), std::fabs(b), floor});
}

// Max relative error between reverse-mode and central-difference gradients
// of f() with respect to `leaf`, over `probes` randomly picked coordinates
// (all of them when probes <= 0). f must rebuild the graph from leaf->value.
inline double fd_check(const std::function<Var()>& f, const Var& leaf, Rng& rng, int probes = 0,
                       double eps = 1e-6) {
  leaf->grad = Tensor();
  Var loss = f();
  backward(loss);
  const Tensor analytic = leaf->grad.empty() ? Tensor(leaf->shape()) : leaf->grad;
  std::vector<std::size_t> coords;
  const std::size_t n = leaf->value.size();
  if (probes <= 0 || static_cast<std::size_t>(probes) >= n) {
    for (std::size_t i = 0; i < n; ++i) coords.push_back(i);
  } else {
    for (int i = 0; i < probes; ++i) coords.push_back(rng.below(n));
  }
  double worst = 0;
  NoGradGuard guard;
  for (std::size_t i : coords) {
    const real keep = leaf->value[i];
    leaf->value[i] = keep + static_cast<real>(eps);
    const double up = f()->value.item();
    leaf->value[i] = keep - static_cast<real>(eps);
    const double down = f()->value.item();
    leaf->value[i] = keep;
    const double numeric = (up - down) / (2 * eps);
    worst = std::max(worst, rel_err(analytic[i], numeric, 1e-4));
  }
  return worst;
}

// Scalar projection sum(y * r) with a fixed random r, so every output
// coordinate reaches the gradient with a distinct weight.
inline Var project(const Var& y, const Tensor& r) { return dot(y, constant(r)); }

class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("bnas_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  std::string file(const std::string& name) const { return (path_ / name).string(); }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace testing_support
