#include "slump/dataset.hpp"

#include <algorithm>

namespace slump {

std::string_view to_string(Split s) {
  switch (s) {
    case Split::kTrain: return "train";
    case Split::kVal: return "val";
    case Split::kTest: return "test";
  }
  return "?";
}

Split parse_split(std::string_view text) {
  if (text == "train") return Split::kTrain;
  if (text == "val") return Split::kVal;
  if (text == "test") return Split::kTest;
  throw Error(ErrorCode::kFormat, "unknown split '" + std::string(text) + "'");
}

void Dataset::check_shape(const InputShape& s) const {
  const Shape want{s.frames, s.height, s.width, s.channels};
  for (const auto& smp : samples)
    if (smp.input.shape() != want)
      throw Error(ErrorCode::kShapeMismatch,
                  "sample shape " + shape_str(smp.input.shape()) + " does not match model input " + shape_str(want));
}

double Dataset::label_mean() const {
  if (samples.empty()) return 0.0;
  double acc = 0.0;
  for (const auto& s : samples) acc += s.label;
  return acc / static_cast<double>(samples.size());
}

template <typename T>
std::pair<Tensor<T>, Tensor<T>> make_batch(const Dataset& data, const std::vector<std::size_t>& indices,
                                           std::size_t begin, std::size_t end) {
  const std::size_t b = end - begin;
  const auto& first = data.samples.at(indices.at(begin)).input;
  Shape shape{static_cast<std::int64_t>(b)};
  shape.insert(shape.end(), first.shape().begin(), first.shape().end());
  const std::size_t per = first.numel();
  std::vector<T> x(b * per);
  std::vector<T> y(b);
  for (std::size_t i = 0; i < b; ++i) {
    const Sample& s = data.samples.at(indices.at(begin + i));
    if (s.input.numel() != per) throw Error(ErrorCode::kShapeMismatch, "ragged batch");
    std::copy(s.input.data().begin(), s.input.data().end(), x.begin() + static_cast<std::ptrdiff_t>(i * per));
    y[i] = static_cast<T>(s.label);
  }
  return {Tensor<T>(std::move(shape), std::move(x)), Tensor<T>(Shape{static_cast<std::int64_t>(b), 1}, std::move(y))};
}

template std::pair<Tensor<float>, Tensor<float>> make_batch<float>(const Dataset&, const std::vector<std::size_t>&,
                                                                   std::size_t, std::size_t);
template std::pair<Tensor<double>, Tensor<double>> make_batch<double>(const Dataset&, const std::vector<std::size_t>&,
                                                                      std::size_t, std::size_t);

}  // namespace slump
