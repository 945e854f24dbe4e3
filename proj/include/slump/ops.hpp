#pragma once

#include <optional>
#include <vector>

#include "slump/rng.hpp"
#include "slump/tensor.hpp"

namespace slump {

struct Init {
  enum class Kind { kZeros, kOnes, kUniform, kHeUniform, kGlorotUniform };
  Kind kind = Kind::kZeros;
  double lo = 0.0;
  double hi = 1.0;
  std::int64_t fan_in = 1;
  std::int64_t fan_out = 1;

  static Init zeros() { return {}; }
  static Init ones() { return {Kind::kOnes}; }
  static Init uniform(double a, double b) { return {Kind::kUniform, a, b}; }
  // U(-sqrt(6/fan_in), +sqrt(6/fan_in))
  static Init he_uniform(std::int64_t fan_in) { return {Kind::kHeUniform, 0, 0, fan_in}; }
  // U(-sqrt(6/(fan_in+fan_out)), +sqrt(6/(fan_in+fan_out)))
  static Init glorot_uniform(std::int64_t fan_in, std::int64_t fan_out) {
    return {Kind::kGlorotUniform, 0, 0, fan_in, fan_out};
  }
  // Symmetric bound for the he/glorot kinds.
  double bound() const;
};

// Samples are drawn in f64 and rounded, so f32 and f64 tensors created from
// the same stream agree to f32 precision.
template <typename T>
Tensor<T> create(const Shape& shape, const Init& init, RngStream& rng);

template <typename T>
Tensor<T> zeros(const Shape& shape) {
  return Tensor<T>(shape);
}

enum class Elementwise { kAdd, kSub, kMul, kMax0 };

// Trailing-dimension broadcast; throws shape-mismatch when incompatible.
Shape broadcast_shape(const Shape& a, const Shape& b);

template <typename T>
Tensor<T> elementwise(Elementwise op, const Tensor<T>& a, const std::optional<Tensor<T>>& b = std::nullopt);

template <typename T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b) {
  return elementwise(Elementwise::kAdd, a, std::optional<Tensor<T>>(b));
}
template <typename T>
Tensor<T> sub(const Tensor<T>& a, const Tensor<T>& b) {
  return elementwise(Elementwise::kSub, a, std::optional<Tensor<T>>(b));
}
template <typename T>
Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b) {
  return elementwise(Elementwise::kMul, a, std::optional<Tensor<T>>(b));
}
// ReLU; the subgradient at exactly 0 is 0.
template <typename T>
Tensor<T> relu(const Tensor<T>& a) {
  return elementwise(Elementwise::kMax0, a);
}

enum class Reduce { kSum, kMean };

// Reduced axes are removed from the result; reducing every axis gives rank 0.
// Duplicate or out-of-range axes throw invalid-axis.
template <typename T>
Tensor<T> reduce(Reduce op, const Tensor<T>& a, const std::vector<std::size_t>& axes);

template <typename T>
Tensor<T> sum(const Tensor<T>& a, const std::vector<std::size_t>& axes) {
  return reduce(Reduce::kSum, a, axes);
}
template <typename T>
Tensor<T> mean(const Tensor<T>& a, const std::vector<std::size_t>& axes) {
  return reduce(Reduce::kMean, a, axes);
}
template <typename T>
Tensor<T> sum_all(const Tensor<T>& a);

template <typename T>
Tensor<T> reshape(const Tensor<T>& a, const Shape& shape);

// [M,K] x [K,N] -> [M,N]
template <typename T>
Tensor<T> matmul(const Tensor<T>& a, const Tensor<T>& b);

}  // namespace slump
