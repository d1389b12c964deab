#include "autodiff/graph.hpp"

#include <unordered_set>

#include "common/error.hpp"

BNAS_NS_BEGIN

namespace {
thread_local bool g_grad_enabled = true;
}

bool grad_enabled() { return g_grad_enabled; }

NoGradGuard::NoGradGuard() : prev_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = prev_; }

Tensor& Node::grad_ref() {
  if (grad.shape() != value.shape()) grad = Tensor(value.shape());
  return grad;
}

Var constant(Tensor value) {
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  return n;
}

Var variable(Tensor value) {
  auto n = constant(std::move(value));
  n->requires_grad = true;
  return n;
}

Var make_node(const char* op, Tensor value, std::vector<Var> inputs,
              std::function<void(Node&)> backward_fn) {
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  n->op = op;
  n->leaf = false;
  if (!g_grad_enabled) return n;
  for (const auto& in : inputs) {
    if (in && in->requires_grad) {
      n->requires_grad = true;
      break;
    }
  }
  if (n->requires_grad) {
    n->inputs = std::move(inputs);
    n->backward_fn = std::move(backward_fn);
  }
  return n;
}

void backward(const Var& loss) {
  BNAS_EXPECT(loss != nullptr, ContractViolation, "backward on null node");
  BNAS_EXPECT(loss->value.size() == 1, ContractViolation,
              "backward requires a scalar loss, got shape " + loss->value.shape().str());
  if (!loss->requires_grad) return;

  // Iterative post-order DFS gives a topological order.
  std::vector<Node*> order;
  std::unordered_set<Node*> seen;
  std::vector<std::pair<Node*, std::size_t>> stack{{loss.get(), 0}};
  seen.insert(loss.get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->inputs.size()) {
      Node* child = node->inputs[next++].get();
      if (child && child->requires_grad && seen.insert(child).second) stack.push_back({child, 0});
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  for (Node* n : order)
    if (!n->leaf) n->grad = Tensor(n->value.shape());
  loss->grad_ref()[0] += real(1);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* n = *it;
    if (!n->leaf && n->backward_fn) n->backward_fn(*n);
  }
}

BNAS_NS_END
