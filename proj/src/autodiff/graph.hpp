#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "tensor/tensor.hpp"

BNAS_NS_BEGIN

struct Node;
using Var = std::shared_ptr<Node>;

/// One tape entry. `backward_fn` reads this node's grad and accumulates into
/// the grads of `inputs`.
struct Node {
  Tensor value;
  Tensor grad;
  std::vector<Var> inputs;
  std::function<void(Node&)> backward_fn;
  const char* op = "leaf";
  bool requires_grad = false;
  bool leaf = true;

  /// Gradient buffer, allocated as zeros on first use.
  Tensor& grad_ref();
  const Shape& shape() const { return value.shape(); }
};

Var constant(Tensor value);
Var variable(Tensor value);  // leaf with requires_grad

/// Creates an interior node. The backward closure and input references are
/// kept only when some input requires grad and recording is enabled.
Var make_node(const char* op, Tensor value, std::vector<Var> inputs,
              std::function<void(Node&)> backward_fn);

/// Reverse-mode sweep from a scalar. Leaf gradients accumulate (+=);
/// interior gradients are reset at the start of every sweep.
void backward(const Var& loss);

bool grad_enabled();

class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool prev_;
};

BNAS_NS_END
