#pragma once

#include <vector>

#include "autodiff/graph.hpp"
#include "tensor/patches.hpp"

BNAS_NS_BEGIN

/// Running statistics owned by a batchnorm layer.
struct BatchNormState {
  Tensor running_mean;
  Tensor running_var;
  real momentum = real(0.1);
  real eps = real(1e-5);

  explicit BatchNormState(int channels = 0)
      : running_mean({1, channels, 1, 1}, 0), running_var({1, channels, 1, 1}, 1) {}
};

/// Weight (out, in/groups, kh, kw); groups split the channels into contiguous ranges.
Var conv2d(const Var& x, const Var& weight, const ConvGeometry& g, int groups = 1);
/// x is flattened per batch item; weight is (out, in, 1, 1), bias (1, out, 1, 1) or null.
Var linear(const Var& x, const Var& weight, const Var& bias);
/// gamma/beta may be null (non-affine). Training mode normalizes with batch
/// statistics and updates `state`; eval mode uses the running statistics.
Var batchnorm(const Var& x, const Var& gamma, const Var& beta, BatchNormState& state, bool training);
Var relu(const Var& x);
Var max_pool(const Var& x, int kernel, int stride, int padding);
/// Padding taps are excluded from the average.
Var avg_pool(const Var& x, int kernel, int stride, int padding);
Var global_avg_pool(const Var& x);
Var flatten(const Var& x);
Var concat(const std::vector<Var>& xs);
Var add(const Var& a, const Var& b);
Var add_n(const std::vector<Var>& xs);
Var scale(const Var& x, real s);
Var sum(const Var& x);
Var dot(const Var& a, const Var& b);
/// Zero-pads (or passes through) the channel axis up to `channels`.
Var channel_pad(const Var& x, int channels);
/// Sums channel k into channel k % channels (parameter-free narrowing).
Var channel_fold(const Var& x, int channels);
/// Output of fixed shape that does not depend on any input; gradient-free.
Var zeros(Shape s);
/// Mean softmax cross-entropy of logits (N, K, 1, 1) against integer labels.
Var softmax_cross_entropy(const Var& logits, const std::vector<int>& labels);
/// Row-wise softmax of a (rows, K, 1, 1) table.
Var row_softmax(const Var& table);
/// sum_o probs[row, o] * xs[o]; gradients reach both the branches and probs.
Var weighted_sum(const std::vector<Var>& xs, const Var& probs, int row);
/// Sum over rows of the Shannon entropy of softmax(row), natural log.
Var softmax_entropy_sum(const Var& table);
/// sign with sign(0) = +1; backward is the clipped straight-through
/// estimator grad * 1[|x| <= 1].
Var sign_ste(const Var& x);

/// Softmax of one row of values, computed stably.
std::vector<double> softmax(std::span<const real> row);

BNAS_NS_END
