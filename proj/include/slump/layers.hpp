#pragma once

#include <array>
#include <cstdint>
#include <functional>

#include "slump/ops.hpp"
#include "slump/tensor.hpp"

namespace slump {

enum class Mode { kTrain, kInfer };

template <typename T>
struct Conv2DLayer {
  Tensor<T> kernel;  // [k, k, cin, cout]
  Tensor<T> bias;    // [cout]
  std::int64_t stride = 1;

  static Conv2DLayer make(std::int64_t k, std::int64_t cin, std::int64_t cout, RngStream& rng,
                          std::int64_t stride = 1);
};

template <typename T>
struct Conv3DLayer {
  Tensor<T> kernel;  // [kt, k, k, cin, cout]
  Tensor<T> bias;    // [cout]
  std::array<std::int64_t, 3> stride{1, 1, 1};

  static Conv3DLayer make(std::int64_t kt, std::int64_t k, std::int64_t cin, std::int64_t cout, RngStream& rng);
};

// Gate blocks along the last kernel axis are ordered (i, f, g, o).
template <typename T>
struct ConvLSTM2DLayer {
  Tensor<T> input_kernel;      // [k, k, cin, 4*ch]
  Tensor<T> recurrent_kernel;  // [k, k, ch, 4*ch]
  Tensor<T> bias;              // [4*ch]

  std::int64_t hidden() const { return bias.extent(0) / 4; }
  static ConvLSTM2DLayer make(std::int64_t k, std::int64_t cin, std::int64_t ch, RngStream& rng);
};

template <typename T>
struct BatchNormLayer {
  Tensor<T> gamma;
  Tensor<T> beta;
  Tensor<T> moving_mean;
  Tensor<T> moving_var;
  Tensor<T> update_count;  // [1], train-mode updates applied so far
  double momentum = 0.99;
  double epsilon = 1e-3;
  // Zero-debiased moving averages: update t blends the batch in with weight
  // (1 - momentum) / (1 - momentum^t), so the first update adopts the batch
  // statistics and the weight settles to (1 - momentum). Off gives the plain
  // moving <- momentum * moving + (1 - momentum) * batch rule.
  bool debias = true;

  static BatchNormLayer make(std::int64_t channels);
};

template <typename T>
struct DenseLayer {
  Tensor<T> weights;  // [in, out]
  Tensor<T> bias;     // [out]

  static DenseLayer make(std::int64_t in, std::int64_t out, RngStream& rng);
};

// [N,H,W,Cin] -> [N,ceil(H/s),ceil(W/s),Cout]
template <typename T>
Tensor<T> conv2d_forward(const Tensor<T>& x, const Conv2DLayer<T>& layer);

// Folds [N,T,...] into [N*T,...], applies inner, and unfolds.
template <typename T>
Tensor<T> time_distributed(const Tensor<T>& x, const std::function<Tensor<T>(const Tensor<T>&)>& inner);

// [N,T,H,W,Cin] -> [N,T',H',W',Cout]
template <typename T>
Tensor<T> conv3d_forward(const Tensor<T>& x, const Conv3DLayer<T>& layer);

// [N,T,H,W,Cin] -> [N,T,H,W,Ch] (return_sequences) or [N,H,W,Ch]. Zero
// initial state, no peepholes.
template <typename T>
Tensor<T> conv_lstm2d_forward(const Tensor<T>& x, const ConvLSTM2DLayer<T>& layer, bool return_sequences);

// Normalizes over every axis but the last. Train mode updates the moving
// statistics in place.
template <typename T>
Tensor<T> batchnorm_forward(const Tensor<T>& x, BatchNormLayer<T>& layer, Mode mode);

// Non-overlapping max pooling over (T,H,W) of [N,T,H,W,C]; the window is also
// the stride and trailing partial windows are dropped. Gradient goes to the
// first maximum in scan order.
template <typename T>
Tensor<T> maxpool3d(const Tensor<T>& x, std::array<std::int64_t, 3> window);

// [N,H,W,C] -> [N,H/2,W/2,C]
template <typename T>
Tensor<T> maxpool2d(const Tensor<T>& x);

// Mean over every axis except the first and last: [N,...,C] -> [N,C].
template <typename T>
Tensor<T> global_avg_pool(const Tensor<T>& x);

// [N,F] x [F,O] + [O]
template <typename T>
Tensor<T> dense(const Tensor<T>& x, const DenseLayer<T>& layer);

template <typename T>
std::size_t param_count(const Conv2DLayer<T>& l) {
  return l.kernel.numel() + l.bias.numel();
}
template <typename T>
std::size_t param_count(const Conv3DLayer<T>& l) {
  return l.kernel.numel() + l.bias.numel();
}
template <typename T>
std::size_t param_count(const ConvLSTM2DLayer<T>& l) {
  return l.input_kernel.numel() + l.recurrent_kernel.numel() + l.bias.numel();
}
// Moving statistics are state, not trainable parameters.
template <typename T>
std::size_t param_count(const BatchNormLayer<T>& l) {
  return l.gamma.numel() + l.beta.numel();
}
template <typename T>
std::size_t param_count(const DenseLayer<T>& l) {
  return l.weights.numel() + l.bias.numel();
}

}  // namespace slump
