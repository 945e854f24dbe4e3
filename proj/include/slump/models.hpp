#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "slump/layers.hpp"
#include "slump/rng.hpp"

namespace slump {

// The byte value doubles as the checkpoint model-id.
enum class ModelId : std::uint8_t { kA = 'A', kB = 'B', kC = 'C' };

ModelId parse_model_id(std::string_view text);
char model_letter(ModelId id);

struct InputShape {
  std::int64_t frames = 30;
  std::int64_t height = 224;
  std::int64_t width = 224;
  std::int64_t channels = 3;

  static InputShape full_scale() { return {}; }
  static InputShape desk() { return {8, 56, 56, 3}; }
  static InputShape reduced() { return {4, 16, 16, 3}; }
};

enum class BlockKind { kTimeDistributedConv2D, kConv3D, kConvLSTM2D };

struct BlockSpec {
  BlockKind kind;
  std::int64_t kernel;           // spatial extent
  std::int64_t kernel_time = 1;  // Conv3D only
  std::int64_t channels;
  bool relu;
  bool pool_time;  // 2x2x2 pooling instead of per-frame 2x2
};

struct ModelSpec {
  ModelId id;
  InputShape input;
  std::array<BlockSpec, 3> blocks;
  std::int64_t head_out = 1;
};

ModelSpec model_spec(ModelId id, InputShape input = InputShape::full_scale());

// Closed-form trainable-parameter count of a spec.
std::size_t analytic_param_count(const ModelSpec& spec);
// Published reconstruction targets: 315,969 / 70,817 / 277,601.
std::size_t expected_param_count(ModelId id);

template <typename T>
struct NamedParam {
  std::string name;
  Tensor<T> tensor;
  bool trainable;
  bool decay;  // receives decoupled weight decay
};

template <typename T>
class Model {
 public:
  using Core = std::variant<Conv2DLayer<T>, Conv3DLayer<T>, ConvLSTM2DLayer<T>>;
  struct Block {
    BlockSpec spec;
    Core core;
    BatchNormLayer<T> bn;
  };

  // Every parameter tensor draws from its own sub-stream of rng's seed.
  static Model build(const ModelSpec& spec, const RngStream& rng);

  // [N,T,H,W,C] in [0,1] -> [N,1] slump estimates in cm.
  Tensor<T> forward(const Tensor<T>& batch, Mode mode);

  const ModelSpec& spec() const { return spec_; }
  ModelId id() const { return spec_.id; }
  // Trainable first (in layer order), then BatchNorm moving statistics and the
  // output affine.
  std::vector<NamedParam<T>> parameters() const;
  std::size_t param_count() const;
  // (layer name, trainable count) rows for reporting.
  std::vector<std::pair<std::string, std::size_t>> layer_param_counts() const;

  std::vector<Block>& blocks() { return blocks_; }
  DenseLayer<T>& head() { return head_; }

  // Fixed (non-trainable) map applied to the head output: y = shift + scale * z.
  // Identity by default.
  void set_output_affine(double shift, double scale);
  std::pair<double, double> output_affine() const { return {output_shift_[0], output_scale_[0]}; }

 private:
  ModelSpec spec_;
  std::vector<Block> blocks_;
  DenseLayer<T> head_;
  Tensor<T> output_shift_;
  Tensor<T> output_scale_;
};

template <typename T>
Model<T> build_model(ModelId id, const RngStream& rng, InputShape input = InputShape::full_scale()) {
  return Model<T>::build(model_spec(id, input), rng);
}

// Copies every parameter/state tensor from src into dst by name order.
template <typename Dst, typename Src>
void copy_parameters(Model<Dst>& dst, const Model<Src>& src) {
  auto d = dst.parameters();
  const auto s = src.parameters();
  if (d.size() != s.size()) throw Error(ErrorCode::kShapeMismatch, "parameter lists differ");
  for (std::size_t i = 0; i < d.size(); ++i) {
    auto out = d[i].tensor.mutable_data();
    const auto in = s[i].tensor.data();
    if (out.size() != in.size()) throw Error(ErrorCode::kShapeMismatch, "parameter " + d[i].name + " differs");
    for (std::size_t j = 0; j < out.size(); ++j) out[j] = static_cast<Dst>(in[j]);
  }
}

}  // namespace slump
