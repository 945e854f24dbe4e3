#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "slump/models.hpp"
#include "slump/tensor.hpp"

namespace slump {

enum class Split : std::uint8_t { kTrain, kVal, kTest };

std::string_view to_string(Split s);
Split parse_split(std::string_view text);

// One model-ready window: [T,H,W,3] in [0,1] plus its clip's label.
struct Sample {
  Tensor<float> input;
  double label = 0.0;
  std::size_t clip = 0;
  std::int64_t window = 0;
};

struct Dataset {
  std::vector<Sample> samples;

  bool empty() const { return samples.empty(); }
  std::size_t size() const { return samples.size(); }
  // Throws shape-mismatch unless every sample matches `shape`.
  void check_shape(const InputShape& shape) const;
  double label_mean() const;
};

// Stacks samples[indices[begin..end)] into [B,T,H,W,3] and labels [B,1].
template <typename T>
std::pair<Tensor<T>, Tensor<T>> make_batch(const Dataset& data, const std::vector<std::size_t>& indices,
                                           std::size_t begin, std::size_t end);

}  // namespace slump
