#include "slump/models.hpp"

#include <cmath>

#include <algorithm>

namespace slump {

ModelId parse_model_id(std::string_view text) {
  if (text == "A" || text == "a") return ModelId::kA;
  if (text == "B" || text == "b") return ModelId::kB;
  if (text == "C" || text == "c") return ModelId::kC;
  throw Error(ErrorCode::kInvalidModel, "unknown model id '" + std::string(text) + "'");
}

char model_letter(ModelId id) { return static_cast<char>(id); }

ModelSpec model_spec(ModelId id, InputShape input) {
  using K = BlockKind;
  switch (id) {
    case ModelId::kA:
      return {id, input,
              {BlockSpec{K::kTimeDistributedConv2D, 11, 1, 16, true, false},
               BlockSpec{K::kTimeDistributedConv2D, 11, 1, 32, true, false},
               BlockSpec{K::kTimeDistributedConv2D, 11, 1, 64, true, false}}};
    case ModelId::kB:
      return {id, input,
              {BlockSpec{K::kConv3D, 3, 3, 16, true, true}, BlockSpec{K::kConv3D, 3, 3, 32, true, true},
               BlockSpec{K::kConv3D, 3, 3, 64, true, true}}};
    case ModelId::kC:
      return {id, input,
              {BlockSpec{K::kTimeDistributedConv2D, 3, 1, 16, true, false},
               BlockSpec{K::kConvLSTM2D, 3, 1, 32, false, false},
               BlockSpec{K::kConvLSTM2D, 3, 1, 64, false, false}}};
  }
  throw Error(ErrorCode::kInvalidModel, "unknown model id");
}

std::size_t analytic_param_count(const ModelSpec& spec) {
  std::size_t total = 0;
  std::int64_t cin = spec.input.channels;
  for (const auto& b : spec.blocks) {
    const std::int64_t k2 = b.kernel * b.kernel;
    switch (b.kind) {
      case BlockKind::kTimeDistributedConv2D: total += k2 * cin * b.channels + b.channels; break;
      case BlockKind::kConv3D: total += b.kernel_time * k2 * cin * b.channels + b.channels; break;
      case BlockKind::kConvLSTM2D:
        total += 4 * (k2 * cin * b.channels + k2 * b.channels * b.channels + b.channels);
        break;
    }
    total += 2 * b.channels;  // gamma, beta
    cin = b.channels;
  }
  return total + cin * spec.head_out + spec.head_out;
}

std::size_t expected_param_count(ModelId id) {
  switch (id) {
    case ModelId::kA: return 315'969;
    case ModelId::kB: return 70'817;
    case ModelId::kC: return 277'601;
  }
  return 0;
}

template <typename T>
Model<T> Model<T>::build(const ModelSpec& spec, const RngStream& rng) {
  Model m;
  m.spec_ = spec;
  std::uint64_t stream = 0;
  auto next = [&] { return RngStream(rng.derive_seed(stream++), 0); };
  std::int64_t cin = spec.input.channels;
  for (const auto& b : spec.blocks) {
    auto r = next();
    Block blk{b, Conv2DLayer<T>{}, BatchNormLayer<T>::make(b.channels)};
    switch (b.kind) {
      case BlockKind::kTimeDistributedConv2D: blk.core = Conv2DLayer<T>::make(b.kernel, cin, b.channels, r); break;
      case BlockKind::kConv3D: blk.core = Conv3DLayer<T>::make(b.kernel_time, b.kernel, cin, b.channels, r); break;
      case BlockKind::kConvLSTM2D: blk.core = ConvLSTM2DLayer<T>::make(b.kernel, cin, b.channels, r); break;
    }
    m.blocks_.push_back(std::move(blk));
    cin = b.channels;
  }
  auto r = next();
  m.head_ = DenseLayer<T>::make(cin, spec.head_out, r);
  m.output_shift_ = Tensor<T>({1}, {T(0)});
  m.output_scale_ = Tensor<T>({1}, {T(1)});
  for (auto& p : m.parameters())
    if (p.trainable) p.tensor.set_requires_grad(true);
  return m;
}

template <typename T>
Tensor<T> Model<T>::forward(const Tensor<T>& batch, Mode mode) {
  const auto& in = spec_.input;
  if (batch.rank() != 5 || batch.extent(1) != in.frames || batch.extent(2) != in.height ||
      batch.extent(3) != in.width || batch.extent(4) != in.channels)
    throw Error(ErrorCode::kShapeMismatch, "model " + std::string(1, model_letter(spec_.id)) + " expects [N," +
                                               std::to_string(in.frames) + "," + std::to_string(in.height) + "," +
                                               std::to_string(in.width) + "," + std::to_string(in.channels) +
                                               "], got " + shape_str(batch.shape()));
  Tensor<T> x = batch;
  for (auto& blk : blocks_) {
    if (auto* conv = std::get_if<Conv2DLayer<T>>(&blk.core)) {
      x = time_distributed<T>(x, [conv](const Tensor<T>& f) { return conv2d_forward(f, *conv); });
    } else if (auto* c3 = std::get_if<Conv3DLayer<T>>(&blk.core)) {
      x = conv3d_forward(x, *c3);
    } else {
      x = conv_lstm2d_forward(x, std::get<ConvLSTM2DLayer<T>>(blk.core), true);
    }
    x = batchnorm_forward(x, blk.bn, mode);
    if (blk.spec.relu) x = relu(x);
    if (blk.spec.pool_time) {
      // Temporal window shrinks to 1 once the sequence is a single frame.
      x = maxpool3d(x, {std::min<std::int64_t>(2, x.extent(1)), 2, 2});
    } else {
      x = time_distributed<T>(x, [](const Tensor<T>& f) { return maxpool2d(f); });
    }
  }
  Tensor<T> y = dense(global_avg_pool(x), head_);
  if (output_shift_[0] != T(0) || output_scale_[0] != T(1)) y = add(mul(y, output_scale_), output_shift_);
  return y;
}

template <typename T>
void Model<T>::set_output_affine(double shift, double scale) {
  if (!std::isfinite(shift) || !std::isfinite(scale) || scale == 0.0)
    throw Error(ErrorCode::kInvalidParams, "output affine needs a finite shift and a finite non-zero scale");
  output_shift_.mutable_data()[0] = static_cast<T>(shift);
  output_scale_.mutable_data()[0] = static_cast<T>(scale);
}

template <typename T>
std::vector<NamedParam<T>> Model<T>::parameters() const {
  std::vector<NamedParam<T>> out;
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    const auto& blk = blocks_[i];
    const std::string p = "block" + std::to_string(i + 1) + ".";
    if (const auto* c = std::get_if<Conv2DLayer<T>>(&blk.core)) {
      out.push_back({p + "conv2d.kernel", c->kernel, true, true});
      out.push_back({p + "conv2d.bias", c->bias, true, false});
    } else if (const auto* c3 = std::get_if<Conv3DLayer<T>>(&blk.core)) {
      out.push_back({p + "conv3d.kernel", c3->kernel, true, true});
      out.push_back({p + "conv3d.bias", c3->bias, true, false});
    } else {
      const auto& l = std::get<ConvLSTM2DLayer<T>>(blk.core);
      out.push_back({p + "convlstm2d.input_kernel", l.input_kernel, true, true});
      out.push_back({p + "convlstm2d.recurrent_kernel", l.recurrent_kernel, true, true});
      out.push_back({p + "convlstm2d.bias", l.bias, true, false});
    }
    out.push_back({p + "bn.gamma", blk.bn.gamma, true, false});
    out.push_back({p + "bn.beta", blk.bn.beta, true, false});
  }
  out.push_back({"head.dense.weights", head_.weights, true, true});
  out.push_back({"head.dense.bias", head_.bias, true, false});
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    const std::string p = "block" + std::to_string(i + 1) + ".";
    out.push_back({p + "bn.moving_mean", blocks_[i].bn.moving_mean, false, false});
    out.push_back({p + "bn.moving_var", blocks_[i].bn.moving_var, false, false});
    out.push_back({p + "bn.update_count", blocks_[i].bn.update_count, false, false});
  }
  out.push_back({"head.output_shift", output_shift_, false, false});
  out.push_back({"head.output_scale", output_scale_, false, false});
  return out;
}

template <typename T>
std::size_t Model<T>::param_count() const {
  std::size_t n = 0;
  for (const auto& [name, count] : layer_param_counts()) n += count;
  return n;
}

template <typename T>
std::vector<std::pair<std::string, std::size_t>> Model<T>::layer_param_counts() const {
  std::vector<std::pair<std::string, std::size_t>> rows;
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    const auto& blk = blocks_[i];
    const std::string p = "block" + std::to_string(i + 1) + ".";
    std::visit(
        [&](const auto& layer) {
          using L = std::decay_t<decltype(layer)>;
          const char* kind = std::is_same_v<L, Conv2DLayer<T>>   ? "td_conv2d"
                             : std::is_same_v<L, Conv3DLayer<T>> ? "conv3d"
                                                                 : "convlstm2d";
          rows.emplace_back(p + kind, slump::param_count(layer));
        },
        blk.core);
    rows.emplace_back(p + "batchnorm", slump::param_count(blk.bn));
  }
  rows.emplace_back("head.dense", slump::param_count(head_));
  return rows;
}

template class Model<float>;
template class Model<double>;

}  // namespace slump
