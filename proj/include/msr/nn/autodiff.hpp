#pragma once

// Minimal reverse-mode differentiation over Tensor values.
//
// A Var is a shared handle to a graph node. Ops create result nodes holding
// their parents and a closure that, given the node's accumulated gradient,
// adds contributions into each parent's gradient. Parents never reference
// their children, so graphs free themselves when the last handle is dropped.

#include <functional>
#include <memory>
#include <string>
#include <unordered_set>
#include <vector>

#include "msr/tensor.hpp"

namespace msr::nn {

template <typename T>
struct Node {
    Tensor<T> value;
    Tensor<T> grad;  // empty until first accumulation
    bool requires_grad = false;
    const char* op = "leaf";
    std::vector<std::shared_ptr<Node>> parents;
    std::function<void(Node&)> backward_fn;

    Tensor<T>& ensure_grad() {
        if (grad.size() != value.size()) grad = Tensor<T>(value.shape());
        return grad;
    }
    [[nodiscard]] const Shape& shape() const noexcept { return value.shape(); }
};

template <typename T>
using Var = std::shared_ptr<Node<T>>;

// Thread-local switch; while disabled, ops record no graph.
bool grad_enabled() noexcept;
void set_grad_enabled(bool on) noexcept;

class NoGradGuard {
public:
    NoGradGuard() noexcept : prev_(grad_enabled()) { set_grad_enabled(false); }
    ~NoGradGuard() { set_grad_enabled(prev_); }
    NoGradGuard(const NoGradGuard&) = delete;
    NoGradGuard& operator=(const NoGradGuard&) = delete;

private:
    bool prev_;
};

// When enabled, every op verifies its output is finite and throws
// NumericError otherwise. Defaults to on in debug builds.
bool numeric_checks_enabled() noexcept;
void set_numeric_checks(bool on) noexcept;

template <typename T>
Var<T> constant(Tensor<T> value) {
    auto n = std::make_shared<Node<T>>();
    n->value = std::move(value);
    return n;
}

template <typename T>
Var<T> leaf(Tensor<T> value, bool requires_grad = true) {
    auto n = std::make_shared<Node<T>>();
    n->value = std::move(value);
    n->requires_grad = requires_grad;
    return n;
}

// Builds a result node, dropping the closure when no parent needs gradients.
template <typename T>
Var<T> make_result(Tensor<T> value, std::vector<Var<T>> parents, const char* op,
                   std::function<void(Node<T>&)> fn) {
    if (numeric_checks_enabled() && !value.all_finite()) {
        throw NumericError(std::string("non-finite output from op ") + op);
    }
    auto n = std::make_shared<Node<T>>();
    n->value = std::move(value);
    n->op = op;
    bool needs = false;
    if (grad_enabled()) {
        for (const auto& p : parents) needs = needs || (p && p->requires_grad);
    }
    if (needs) {
        n->requires_grad = true;
        n->parents = std::move(parents);
        n->backward_fn = std::move(fn);
    }
    return n;
}

// Reverse sweep from `root` seeded with `seed` (same shape as root).
template <typename T>
void backward(const Var<T>& root, const Tensor<T>& seed) {
    require_same_shape(root->value, seed, "backward seed");
    if (!root->requires_grad) return;

    // Iterative post-order DFS gives a topological order.
    std::vector<Node<T>*> order;
    std::unordered_set<Node<T>*> seen;
    std::vector<std::pair<Node<T>*, std::size_t>> stack{{root.get(), 0}};
    seen.insert(root.get());
    while (!stack.empty()) {
        auto& [node, next] = stack.back();
        if (next < node->parents.size()) {
            Node<T>* p = node->parents[next++].get();
            if (p && p->requires_grad && seen.insert(p).second) stack.emplace_back(p, 0);
        } else {
            order.push_back(node);
            stack.pop_back();
        }
    }

    Tensor<T>& g = root->ensure_grad();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += seed[i];
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        Node<T>* n = *it;
        if (n->backward_fn && n->grad.size() == n->value.size()) n->backward_fn(*n);
    }
}

// Scalar root (one element): seeds with 1.
template <typename T>
void backward(const Var<T>& root) {
    if (root->value.size() != 1) throw ShapeError("backward() without seed needs a scalar root");
    backward(root, Tensor<T>(root->value.shape(), T{1}));
}

}  // namespace msr::nn
