#include "slump/optim.hpp"

#include <cmath>

namespace slump {

template <typename T>
Tensor<T> mae_loss(const Tensor<T>& pred, const Tensor<T>& target) {
  if (pred.shape() != target.shape())
    throw Error(ErrorCode::kShapeMismatch,
                "mae_loss " + shape_str(pred.shape()) + " vs " + shape_str(target.shape()));
  const auto p = pred.data();
  const auto y = target.data();
  double acc = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) acc += std::abs(static_cast<double>(p[i]) - y[i]);
  const double n = static_cast<double>(p.size());
  Tensor<T> out = Tensor<T>::scalar(static_cast<T>(acc / n));
  record<T>(out, "mae", {pred, target}, [pred, target, n](std::span<const T> g) {
    const auto p = pred.data();
    const auto y = target.data();
    const T scale = static_cast<T>(g[0] / n);
    std::vector<T> gp(p.size()), gy;
    for (std::size_t i = 0; i < p.size(); ++i) gp[i] = p[i] > y[i] ? scale : (p[i] < y[i] ? -scale : T(0));
    if (target.traced()) {
      gy.resize(p.size());
      for (std::size_t i = 0; i < p.size(); ++i) gy[i] = -gp[i];
    }
    if (!pred.traced()) gp.clear();
    return typename TapeNode<T>::Grads{std::move(gp), std::move(gy)};
  });
  return out;
}

template Tensor<float> mae_loss<float>(const Tensor<float>&, const Tensor<float>&);
template Tensor<double> mae_loss<double>(const Tensor<double>&, const Tensor<double>&);

template <typename T>
AdamW<T>::AdamW(std::vector<NamedParam<T>> params, AdamWConfig config) : config_(config) {
  for (auto& p : params) {
    if (!p.trainable) continue;
    m_.emplace_back(p.tensor.numel(), T(0));
    v_.emplace_back(p.tensor.numel(), T(0));
    params_.push_back(std::move(p));
  }
}

template <typename T>
void AdamW<T>::step() {
  for (const auto& p : params_) {
    if (!p.tensor.has_grad()) continue;
    for (T g : p.tensor.grad())
      if (!std::isfinite(static_cast<double>(g)))
        throw Error(ErrorCode::kNumericFailure, "non-finite gradient in parameter " + p.name);
  }
  ++step_;
  const double b1 = config_.beta1;
  const double b2 = config_.beta2;
  const double bc1 = 1.0 - std::pow(b1, static_cast<double>(step_));
  const double bc2 = 1.0 - std::pow(b2, static_cast<double>(step_));
  for (std::size_t i = 0; i < params_.size(); ++i) {
    auto& p = params_[i];
    auto w = p.tensor.mutable_data();
    const auto g = p.tensor.grad();
    const bool has_g = p.tensor.has_grad();
    const double decay = p.decay ? 1.0 - config_.lr * config_.weight_decay : 1.0;
    auto& m = m_[i];
    auto& v = v_[i];
    for (std::size_t j = 0; j < w.size(); ++j) {
      const double gj = has_g ? static_cast<double>(g[j]) : 0.0;
      const double mj = b1 * m[j] + (1.0 - b1) * gj;
      const double vj = b2 * v[j] + (1.0 - b2) * gj * gj;
      m[j] = static_cast<T>(mj);
      v[j] = static_cast<T>(vj);
      double pj = static_cast<double>(w[j]);
      if (p.decay) pj = pj * decay;
      pj -= config_.lr * ((mj / bc1) / (std::sqrt(vj / bc2) + config_.epsilon));
      w[j] = static_cast<T>(pj);
    }
  }
}

template <typename T>
void AdamW<T>::zero_grad() {
  for (auto& p : params_) p.tensor.zero_grad();
}

template class AdamW<float>;
template class AdamW<double>;

}  // namespace slump
