#pragma once

#include <cstdint>
#include <vector>

#include "slump/models.hpp"
#include "slump/tensor.hpp"

namespace slump {

// Mean over the batch of |pred - target|; subgradient 0 where they are equal.
template <typename T>
Tensor<T> mae_loss(const Tensor<T>& pred, const Tensor<T>& target);

struct AdamWConfig {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double weight_decay = 1e-4;
};

// Adam with decoupled weight decay: each step first scales a decayed
// parameter by (1 - lr*wd), then applies the bias-corrected adaptive step.
// Decay never enters the moment estimates.
template <typename T>
class AdamW {
 public:
  AdamW(std::vector<NamedParam<T>> params, AdamWConfig config);

  // Updates every trainable parameter from its accumulated gradient.
  // Parameters without a gradient are treated as g = 0. Throws
  // numeric-failure naming the parameter on a non-finite gradient.
  void step();
  void zero_grad();

  std::uint64_t step_count() const { return step_; }
  const AdamWConfig& config() const { return config_; }
  const std::vector<T>& first_moment(std::size_t i) const { return m_[i]; }
  const std::vector<T>& second_moment(std::size_t i) const { return v_[i]; }
  const std::vector<NamedParam<T>>& params() const { return params_; }

 private:
  std::vector<NamedParam<T>> params_;
  AdamWConfig config_;
  std::vector<std::vector<T>> m_;
  std::vector<std::vector<T>> v_;
  std::uint64_t step_ = 0;
};

}  // namespace slump
