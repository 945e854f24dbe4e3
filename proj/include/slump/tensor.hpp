#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "slump/error.hpp"

namespace slump {

using Shape = std::vector<std::int64_t>;

// Product of extents; rank-0 shapes hold one element.
std::size_t numel_of(const Shape& shape);
std::string shape_str(const Shape& shape);
// Throws invalid-shape on any extent < 1.
void validate_shape(const Shape& shape);

enum class DType : std::uint8_t { kF32 = 0, kF64 = 1 };

template <typename T>
struct dtype_of;
template <>
struct dtype_of<float> {
  static constexpr DType value = DType::kF32;
};
template <>
struct dtype_of<double> {
  static constexpr DType value = DType::kF64;
};

template <typename T>
class Tensor;

// One recorded operation. backward maps the output gradient to one gradient
// buffer per input, each sized like that input; an empty buffer means the
// input receives no contribution.
template <typename T>
struct TapeNode {
  using Grads = std::vector<std::vector<T>>;
  std::string op;
  std::vector<Tensor<T>> inputs;
  std::function<Grads(std::span<const T>)> backward;

  TapeNode() = default;
  TapeNode(const TapeNode&) = delete;
  TapeNode& operator=(const TapeNode&) = delete;
  // Tears the graph down iteratively so deep tapes cannot overflow the stack.
  ~TapeNode();
};

// Thread-local switch; ops record graph nodes only while it is on.
bool grad_enabled();

class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

// Shared-handle dense row-major tensor. Copies alias the same storage.
template <typename T>
class Tensor {
 public:
  using value_type = T;

  Tensor() = default;
  explicit Tensor(Shape shape) : Tensor(shape, std::vector<T>(checked_numel(shape), T(0))) {}
  Tensor(Shape shape, std::vector<T> data) : impl_(std::make_shared<Impl>()) {
    validate_shape(shape);
    if (numel_of(shape) != data.size())
      throw Error(ErrorCode::kShapeMismatch,
                  "data length " + std::to_string(data.size()) + " does not match shape " + shape_str(shape));
    impl_->shape = std::move(shape);
    impl_->data = std::move(data);
  }

  static Tensor scalar(T value) { return Tensor(Shape{}, std::vector<T>{value}); }

  bool defined() const { return impl_ != nullptr; }
  const Shape& shape() const { return impl_->shape; }
  std::size_t rank() const { return impl_->shape.size(); }
  std::int64_t extent(std::size_t axis) const { return impl_->shape.at(axis); }
  std::size_t numel() const { return impl_->data.size(); }
  DType dtype() const { return dtype_of<T>::value; }

  std::span<const T> data() const { return impl_->data; }
  // In-place writes are reserved for parameter updates and freshly built outputs.
  std::span<T> mutable_data() { return impl_->data; }
  T operator[](std::size_t i) const { return impl_->data[i]; }
  T item() const {
    if (numel() != 1) throw Error(ErrorCode::kInvalidShape, "item() on tensor of shape " + shape_str(shape()));
    return impl_->data[0];
  }

  bool requires_grad() const { return impl_->requires_grad; }
  Tensor& set_requires_grad(bool on) {
    impl_->requires_grad = on;
    return *this;
  }
  // Participates in autograd: a tracked leaf or the output of a recorded op.
  bool traced() const { return impl_ && (impl_->requires_grad || impl_->node); }
  bool is_leaf() const { return !impl_->node; }
  const std::shared_ptr<TapeNode<T>>& node() const { return impl_->node; }

  bool has_grad() const { return !impl_->grad.empty(); }
  std::span<const T> grad() const { return impl_->grad; }
  std::span<T> mutable_grad() { return impl_->grad; }
  void zero_grad() { impl_->grad.clear(); }

  // Copy of the values with no graph attachment.
  Tensor detach() const { return Tensor(shape(), impl_->data); }

  bool same(const Tensor& other) const { return impl_ == other.impl_; }
  const void* id() const { return impl_.get(); }

  // Records `node` as the producer of this tensor; used by op implementations.
  void attach(std::shared_ptr<TapeNode<T>> node) { impl_->node = std::move(node); }
  void accumulate_grad(std::span<const T> g) {
    if (g.size() != numel())
      throw Error(ErrorCode::kShapeMismatch, "gradient length " + std::to_string(g.size()) +
                                                 " does not match tensor of shape " + shape_str(shape()));
    if (impl_->grad.empty()) {
      impl_->grad.assign(g.begin(), g.end());
      return;
    }
    for (std::size_t i = 0; i < g.size(); ++i) impl_->grad[i] += g[i];
  }
  void release_grad() { std::vector<T>().swap(impl_->grad); }
  // Detaches and returns the producer node when this handle is the last owner.
  std::shared_ptr<TapeNode<T>> release_node_if_last() {
    if (!impl_ || impl_.use_count() != 1 || !impl_->node) return nullptr;
    return std::move(impl_->node);
  }

 private:
  struct Impl {
    Shape shape;
    std::vector<T> data;
    std::vector<T> grad;
    std::shared_ptr<TapeNode<T>> node;
    bool requires_grad = false;
  };

  static std::size_t checked_numel(const Shape& shape) {
    validate_shape(shape);
    return numel_of(shape);
  }

  std::shared_ptr<Impl> impl_;
};

template <typename T>
TapeNode<T>::~TapeNode() {
  std::vector<std::shared_ptr<TapeNode<T>>> pending;
  auto harvest = [&pending](TapeNode<T>& n) {
    n.backward = nullptr;
    for (auto& in : n.inputs)
      if (auto child = in.release_node_if_last()) pending.push_back(std::move(child));
    n.inputs.clear();
  };
  harvest(*this);
  while (!pending.empty()) {
    auto n = std::move(pending.back());
    pending.pop_back();
    if (n.use_count() == 1) harvest(*n);
  }
}

// Attaches a node to `out` when grad mode is on and any input is traced.
template <typename T>
void record(Tensor<T>& out, std::string op, std::vector<Tensor<T>> inputs,
            std::function<typename TapeNode<T>::Grads(std::span<const T>)> backward) {
  if (!grad_enabled()) return;
  bool any = false;
  for (const auto& in : inputs) any = any || in.traced();
  if (!any) return;
  auto node = std::make_shared<TapeNode<T>>();
  node->op = std::move(op);
  node->inputs = std::move(inputs);
  node->backward = std::move(backward);
  out.attach(std::move(node));
}

}  // namespace slump
