#include "slump/verify.hpp"

#include <algorithm>
#include <map>

#include "slump/layers.hpp"
#include "slump/optim.hpp"

namespace slump {

namespace {

using TD = Tensor<double>;

TD rand_t(const Shape& s, std::uint64_t seed, double lo = -1.0, double hi = 1.0) {
  RngStream r(seed, 0x7665726966ULL);
  return create<double>(s, Init::uniform(lo, hi), r);
}

// Random weighting makes every output coordinate matter individually.
TD weighted(const TD& y, std::uint64_t seed) { return sum_all(mul(y, rand_t(y.shape(), seed ^ 0x5eed))); }

GradCheckRow run(const std::string& name, const ScalarFn& f, std::vector<TD> inputs) {
  const auto r = grad_check(f, inputs);
  return {name, r.max_rel_error, r.coords_checked};
}

void merge(std::vector<GradCheckRow>& rows, const GradCheckRow& r) {
  for (auto& row : rows)
    if (row.name == r.name) {
      row.max_rel_error = std::max(row.max_rel_error, r.max_rel_error);
      row.coords += r.coords;
      return;
    }
  rows.push_back(r);
}

}  // namespace

std::vector<GradCheckRow> primitive_grad_checks(std::uint64_t seeds) {
  std::vector<GradCheckRow> rows;
  for (std::uint64_t s = 0; s < seeds; ++s) {
    const std::uint64_t k = s * 16;
    merge(rows, run("elementwise", [s](const std::vector<TD>& p) {
      return weighted(mul(relu(add(p[0], p[1])), sub(p[0], p[1])), s); },
                    {rand_t({2, 3}, k), rand_t({3}, k + 1)}));
    merge(rows, run("reduce", [s](const std::vector<TD>& p) {
      const TD m = mean(p[0], {1});
      return add(weighted(m, s), sum_all(mul(sum(p[0], {0, 2}), sum(p[0], {0, 2})))); },
                    {rand_t({2, 3, 2}, k + 2)}));
    merge(rows, run("matmul", [s](const std::vector<TD>& p) { return weighted(matmul(p[0], p[1]), s); },
                    {rand_t({3, 4}, k + 3), rand_t({4, 2}, k + 4)}));
    const std::int64_t stride = 1 + static_cast<std::int64_t>(s % 2);
    merge(rows, run("conv2d", [s, stride](const std::vector<TD>& p) {
      return weighted(conv2d_forward(p[0], Conv2DLayer<double>{p[1], p[2], stride}), s); },
                    {rand_t({2, 4, 5, 2}, k + 5), rand_t({3, 3, 2, 3}, k + 6), rand_t({3}, k + 7)}));
    merge(rows, run("time_distributed_conv2d", [s](const std::vector<TD>& p) {
      Conv2DLayer<double> l{p[1], p[2]};
      return weighted(time_distributed<double>(p[0], [&](const TD& f) { return conv2d_forward(f, l); }), s); },
                    {rand_t({1, 3, 4, 4, 2}, k + 8), rand_t({3, 3, 2, 2}, k + 9), rand_t({2}, k + 10)}));
    const std::array<std::int64_t, 3> st3{stride, 1, 1};
    merge(rows, run("conv3d", [s, st3](const std::vector<TD>& p) {
      return weighted(conv3d_forward(p[0], Conv3DLayer<double>{p[1], p[2], st3}), s); },
                    {rand_t({1, 4, 4, 3, 2}, k + 11), rand_t({3, 3, 3, 2, 2}, k + 12), rand_t({2}, k + 13)}));
    const bool seq = s % 2 == 0;
    merge(rows, run("conv_lstm2d", [s, seq](const std::vector<TD>& p) {
      return weighted(conv_lstm2d_forward(p[0], ConvLSTM2DLayer<double>{p[1], p[2], p[3]}, seq), s); },
                    {rand_t({1, 3, 4, 4, 2}, k + 14), rand_t({3, 3, 2, 8}, k + 15, -0.5, 0.5),
                     rand_t({3, 3, 2, 8}, k + 16, -0.5, 0.5), rand_t({8}, k + 17)}));
    const Mode mode = s % 2 == 0 ? Mode::kTrain : Mode::kInfer;
    merge(rows, run("batchnorm", [s, mode](const std::vector<TD>& p) {
      auto l = BatchNormLayer<double>::make(3);
      l.gamma = p[1];
      l.beta = p[2];
      l.moving_mean = TD({3}, {0.1, -0.2, 0.3});
      l.moving_var = TD({3}, {0.5, 1.0, 2.0});
      return weighted(batchnorm_forward(p[0], l, mode), s); },
                    {rand_t({3, 2, 2, 3}, k + 18), rand_t({3}, k + 19, 0.5, 1.5), rand_t({3}, k + 20)}));
    merge(rows, run("maxpool", [s](const std::vector<TD>& p) {
      return add(weighted(maxpool2d(p[0]), s), weighted(maxpool3d(p[1], {2, 2, 2}), s + 1)); },
                    {rand_t({1, 4, 5, 2}, k + 21), rand_t({1, 3, 4, 4, 2}, k + 22)}));
    merge(rows, run("global_avg_pool", [s](const std::vector<TD>& p) { return weighted(global_avg_pool(p[0]), s); },
                    {rand_t({2, 2, 3, 3, 2}, k + 23)}));
    merge(rows, run("dense", [s](const std::vector<TD>& p) {
      return weighted(dense(p[0], DenseLayer<double>{p[1], p[2]}), s); },
                    {rand_t({3, 4}, k + 24), rand_t({4, 2}, k + 25), rand_t({2}, k + 26)}));
    merge(rows, run("mae_loss", [](const std::vector<TD>& p) { return mae_loss(p[0], p[1]); },
                    {rand_t({4, 1}, k + 27), rand_t({4, 1}, k + 28, 2.0, 3.0)}));
  }
  return rows;
}

std::vector<GradCheckRow> model_grad_check(ModelId id, InputShape input, std::int64_t batch, std::uint64_t seed,
                                           std::size_t coords) {
  Model<double> model = build_model<double>(id, RngStream(seed), input);
  // Non-zero biases and BatchNorm affine so no gradient path is trivially zero.
  for (auto& p : model.parameters())
    if (p.trainable && !p.decay) {
      const TD r = rand_t(p.tensor.shape(), seed + p.name.size(), -0.5, 0.5);
      auto d = p.tensor.mutable_data();
      for (std::size_t i = 0; i < d.size(); ++i) d[i] += r[i];
    }
  TD x = rand_t({batch, input.frames, input.height, input.width, input.channels}, seed + 1, 0.0, 1.0);
  // Labels far from the outputs keep the MAE kink out of reach of eps.
  TD y = rand_t({batch, 1}, seed + 2, 50.0, 60.0);
  const ScalarFn f = [&](const std::vector<TD>&) { return mae_loss(model.forward(x, Mode::kTrain), y); };
  const GradCheckOptions opts{1e-5, coords, seed, 2};

  std::map<std::string, std::vector<TD>> groups;
  std::vector<std::string> order;
  for (auto& p : model.parameters()) {
    if (!p.trainable) continue;
    const std::string layer = p.name.substr(0, p.name.rfind('.'));
    if (!groups.count(layer)) order.push_back(layer);
    groups[layer].push_back(p.tensor);
  }
  std::vector<GradCheckRow> rows;
  double worst = 0.0;
  std::size_t total = 0;
  auto check = [&](const std::string& name, std::vector<TD> tensors) {
    const auto r = grad_check(f, tensors, opts);
    rows.push_back({name, r.max_rel_error, r.coords_checked});
    worst = std::max(worst, r.max_rel_error);
    total += r.coords_checked;
  };
  for (const auto& layer : order) check(layer, groups[layer]);
  check("input", {x});
  rows.push_back({"end-to-end", worst, total});
  return rows;
}

}  // namespace slump
