#include "slump/tensor.hpp"

#include "slump/autograd.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "slump/rng.hpp"

namespace slump {

namespace {
thread_local bool g_grad_enabled = true;
}

std::size_t numel_of(const Shape& shape) {
  std::size_t n = 1;
  for (auto e : shape) n *= static_cast<std::size_t>(e);
  return n;
}

std::string shape_str(const Shape& shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

void validate_shape(const Shape& shape) {
  for (auto e : shape)
    if (e < 1) throw Error(ErrorCode::kInvalidShape, "extent < 1 in shape " + shape_str(shape));
}

bool grad_enabled() { return g_grad_enabled; }

NoGradGuard::NoGradGuard() : previous_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = previous_; }

template <typename T>
void backward(const Tensor<T>& loss) {
  if (!loss.defined() || loss.numel() != 1)
    throw Error(ErrorCode::kInvalidLoss, "backward needs a scalar loss");
  if (!loss.traced()) throw Error(ErrorCode::kNoGraph, "loss is not connected to any traced tensor");

  // Iterative post-order DFS gives a topological order (inputs before outputs).
  std::vector<Tensor<T>> order;
  std::unordered_set<const void*> seen;
  struct Frame {
    Tensor<T> t;
    std::size_t next;
  };
  std::vector<Frame> stack;
  stack.push_back({loss, 0});
  seen.insert(loss.id());
  while (!stack.empty()) {
    Frame& top = stack.back();
    const auto& node = top.t.node();
    if (node && top.next < node->inputs.size()) {
      const Tensor<T>& in = node->inputs[top.next++];
      if (in.traced() && seen.insert(in.id()).second) stack.push_back({in, 0});
      continue;
    }
    order.push_back(top.t);
    stack.pop_back();
  }

  Tensor<T> root = loss;
  const std::vector<T> one{T(1)};
  root.accumulate_grad(one);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Tensor<T>& t = *it;
    const auto& node = t.node();
    if (!node) continue;
    if (!t.has_grad()) continue;
    auto grads = node->backward(t.grad());
    if (grads.size() != node->inputs.size())
      throw Error(ErrorCode::kShapeMismatch, "op " + node->op + " returned wrong number of gradients");
    for (std::size_t i = 0; i < grads.size(); ++i) {
      Tensor<T> in = node->inputs[i];
      if (!in.traced() || grads[i].empty()) continue;
      in.accumulate_grad(grads[i]);
    }
    t.release_grad();
  }
}

template void backward<float>(const Tensor<float>&);
template void backward<double>(const Tensor<double>&);

GradCheckResult grad_check(const ScalarFn& f, std::vector<Tensor<double>>& inputs, const GradCheckOptions& opts) {
  for (auto& in : inputs) {
    in.set_requires_grad(true);
    in.zero_grad();
  }
  const Tensor<double> loss = f(inputs);
  const double f0 = loss.item();
  if (!std::isfinite(f0)) throw Error(ErrorCode::kNumericFailure, "non-finite value at unperturbed point");
  backward(loss);

  GradCheckResult result;
  RngStream rng(opts.seed, 0x6772616443ULL);
  for (std::size_t idx = 0; idx < inputs.size(); ++idx) {
    Tensor<double>& in = inputs[idx];
    const std::size_t n = in.numel();
    std::vector<double> analytic(n, 0.0);
    if (in.has_grad()) std::copy(in.grad().begin(), in.grad().end(), analytic.begin());

    std::vector<std::size_t> coords;
    if (opts.max_coords_per_input == 0 || opts.max_coords_per_input >= n) {
      coords.resize(n);
      for (std::size_t i = 0; i < n; ++i) coords[i] = i;
    } else {
      auto perm = permutation(n, rng);
      coords.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(opts.max_coords_per_input));
      std::sort(coords.begin(), coords.end());
    }

    NoGradGuard guard;
    auto values = in.mutable_data();
    for (std::size_t c : coords) {
      const double saved = values[c];
      double eps = opts.eps, numeric = 0.0;
      for (int attempt = 0;; ++attempt) {
        values[c] = saved + eps;
        const double up = f(inputs).item();
        values[c] = saved - eps;
        const double down = f(inputs).item();
        values[c] = saved;
        if (!std::isfinite(up) || !std::isfinite(down))
          throw Error(ErrorCode::kNumericFailure, "non-finite value while perturbing input " + std::to_string(idx));
        numeric = (up - down) / (2.0 * eps);
        const double slope_up = (up - f0) / eps, slope_down = (f0 - down) / eps;
        const bool kink = std::abs(slope_up - slope_down) > 1e-4 * std::max(1.0, std::abs(numeric));
        if (!kink || attempt == opts.kink_refinements) break;
        if (attempt == 0) ++result.coords_refined;
        eps /= 10.0;
      }
      const double err = std::abs(analytic[c] - numeric) / std::max(1.0, std::abs(analytic[c]));
      ++result.coords_checked;
      if (err >= result.max_rel_error) {
        result.max_rel_error = err;
        result.worst_input = idx;
        result.worst_coord = c;
        result.analytic = analytic[c];
        result.numeric = numeric;
      }
    }
  }
  return result;
}

}  // namespace slump
