#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "slump/tensor.hpp"

namespace slump {

// Reverse-mode sweep from a scalar loss. Each reachable node runs once, in
// reverse topological order; leaf gradients accumulate across calls until
// zero_grad(). Intermediate gradients are released as soon as they are used.
template <typename T>
void backward(const Tensor<T>& loss);

struct GradCheckOptions {
  double eps = 1e-5;
  // 0 checks every coordinate; otherwise a seeded sample of this many
  // coordinates per input tensor.
  std::size_t max_coords_per_input = 0;
  std::uint64_t seed = 0;
  // When the two one-sided slopes disagree, the step straddles a kink (ReLU,
  // max-pool switch, |.|); retry with eps/10 up to this many times.
  int kink_refinements = 0;
};

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::size_t worst_input = 0;
  std::size_t worst_coord = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  std::size_t coords_checked = 0;
  std::size_t coords_refined = 0;
};

using ScalarFn = std::function<Tensor<double>(const std::vector<Tensor<double>>&)>;

// Compares analytic gradients of f against central differences:
// max |analytic - numeric| / max(1, |analytic|). Inputs are perturbed in
// place and restored afterwards.
GradCheckResult grad_check(const ScalarFn& f, std::vector<Tensor<double>>& inputs, const GradCheckOptions& opts = {});

}  // namespace slump
