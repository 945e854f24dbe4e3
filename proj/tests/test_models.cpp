#include <gtest/gtest.h>

#include <cmath>

#include "slump/models.hpp"
#include "slump/verify.hpp"

using namespace slump;

namespace {

Tensor<float> rand_batch(std::int64_t n, const InputShape& s, std::uint64_t seed) {
  RngStream r(seed, 5);
  return create<float>({n, s.frames, s.height, s.width, s.channels}, Init::uniform(0, 1), r);
}

// Reverses the frame order of every sample.
Tensor<float> reverse_frames(const Tensor<float>& x) {
  const auto n = x.extent(0), t = x.extent(1);
  const std::size_t frame = x.numel() / static_cast<std::size_t>(n * t);
  std::vector<float> out(x.numel());
  for (std::int64_t i = 0; i < n; ++i)
    for (std::int64_t f = 0; f < t; ++f)
      std::copy_n(x.data().begin() + static_cast<std::ptrdiff_t>((i * t + f) * frame), frame,
                  out.begin() + static_cast<std::ptrdiff_t>((i * t + (t - 1 - f)) * frame));
  return {x.shape(), out};
}

}  // namespace

TEST(ParamCount, MatchesClosedForms) {
  struct Want {
    ModelId id;
    std::size_t total;
  };
  for (const auto& w : {Want{ModelId::kA, 315'969}, Want{ModelId::kB, 70'817}, Want{ModelId::kC, 277'601}}) {
    EXPECT_EQ(analytic_param_count(model_spec(w.id)), w.total);
    EXPECT_EQ(expected_param_count(w.id), w.total);
    for (const auto& shape : {InputShape::full_scale(), InputShape::desk(), InputShape::reduced()}) {
      const auto m = build_model<float>(w.id, RngStream(1), shape);
      EXPECT_EQ(m.param_count(), w.total) << model_letter(w.id);
      std::size_t trainable = 0;
      for (const auto& p : m.parameters())
        if (p.trainable) trainable += p.tensor.numel();
      EXPECT_EQ(trainable, w.total);
    }
  }
  EXPECT_EQ((277'601 + 500) / 1000, 278u);
}

TEST(ParamCount, ModelCPerLayer) {
  const auto m = build_model<float>(ModelId::kC, RngStream(0), InputShape::reduced());
  std::vector<std::size_t> got;
  for (const auto& row : m.layer_param_counts()) got.push_back(row.second);
  EXPECT_EQ(got, (std::vector<std::size_t>{448, 32, 55'424, 64, 221'440, 128, 65}));
}

TEST(Models, UnknownId) {
  try {
    parse_model_id("D");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidModel);
  }
  EXPECT_EQ(parse_model_id("c"), ModelId::kC);
}

TEST(Models, OutputShapeAndInputContract) {
  const auto s = InputShape::reduced();
  for (auto id : {ModelId::kA, ModelId::kB, ModelId::kC}) {
    auto m = build_model<float>(id, RngStream(2), s);
    for (std::int64_t n : {1, 3}) {
      const auto y = m.forward(rand_batch(n, s, 1), Mode::kInfer);
      EXPECT_EQ(y.shape(), (Shape{n, 1}));
      for (float v : y.data()) EXPECT_TRUE(std::isfinite(v));
    }
    try {
      m.forward(rand_batch(1, InputShape{5, 16, 16, 3}, 1), Mode::kInfer);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kShapeMismatch);
    }
  }
}

TEST(Models, ZeroHeadGivesExactlyTheBias) {
  const auto s = InputShape::reduced();
  for (auto id : {ModelId::kA, ModelId::kB, ModelId::kC}) {
    auto m = build_model<float>(id, RngStream(3), s);
    auto w = m.head().weights.mutable_data();
    std::fill(w.begin(), w.end(), 0.0f);
    const Tensor<float> zero({2, s.frames, s.height, s.width, s.channels});
    const auto y = m.forward(zero, Mode::kInfer);
    for (float v : y.data()) EXPECT_EQ(v, 0.0f);
  }
}

TEST(Models, IdenticalSamplesIdenticalOutputsInInfer) {
  const auto s = InputShape::reduced();
  const auto one = rand_batch(1, s, 4);
  std::vector<float> two(one.data().begin(), one.data().end());
  two.insert(two.end(), one.data().begin(), one.data().end());
  for (auto id : {ModelId::kA, ModelId::kB, ModelId::kC}) {
    auto m = build_model<float>(id, RngStream(4), s);
    const auto y = m.forward(Tensor<float>({2, s.frames, s.height, s.width, 3}, two), Mode::kInfer);
    EXPECT_EQ(y[0], y[1]);
  }
}

TEST(Models, OutputAffineIsAppliedAndValidated) {
  const auto s = InputShape::reduced();
  auto m = build_model<double>(ModelId::kB, RngStream(5), s);
  Tensor<double> x({1, s.frames, s.height, s.width, 3});
  const double base = m.forward(x, Mode::kInfer).item();
  m.set_output_affine(100.0, 40.0);
  EXPECT_NEAR(m.forward(x, Mode::kInfer).item(), 100.0 + 40.0 * base, 1e-12);
  EXPECT_THROW(m.set_output_affine(0.0, 0.0), Error);
  EXPECT_EQ(m.param_count(), 70'817u);
}

TEST(Models, OnlyModelAIsFramePermutationInvariant) {
  const auto s = InputShape::reduced();
  const auto x = rand_batch(2, s, 6);
  const auto xr = reverse_frames(x);
  for (auto id : {ModelId::kA, ModelId::kB, ModelId::kC}) {
    auto m = build_model<float>(id, RngStream(6), s);
    const auto y = m.forward(x, Mode::kInfer), yr = m.forward(xr, Mode::kInfer);
    double diff = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < y.numel(); ++i) {
      diff = std::max(diff, std::abs(static_cast<double>(y[i]) - yr[i]));
      scale = std::max(scale, std::abs(static_cast<double>(y[i])));
    }
    if (id == ModelId::kA)
      EXPECT_LE(diff, 1e-5 * std::max(1.0, scale));
    else
      EXPECT_GT(diff, 1e-4) << "model " << model_letter(id) << " should see frame order";
  }
}

TEST(Models, SameSeedSameWeightsAcrossPrecisions) {
  const auto a = build_model<float>(ModelId::kC, RngStream(9), InputShape::reduced());
  const auto b = build_model<float>(ModelId::kC, RngStream(9), InputShape::reduced());
  const auto d = build_model<double>(ModelId::kC, RngStream(9), InputShape::reduced());
  const auto pa = a.parameters(), pb = b.parameters();
  const auto pd = d.parameters();
  ASSERT_EQ(pa.size(), pd.size());
  for (std::size_t i = 0; i < pa.size(); ++i) {
    EXPECT_EQ(pa[i].name, pd[i].name);
    for (std::size_t j = 0; j < pa[i].tensor.numel(); ++j) {
      ASSERT_EQ(pa[i].tensor[j], pb[i].tensor[j]);
      ASSERT_EQ(pa[i].tensor[j], static_cast<float>(pd[i].tensor[j]));
    }
  }
  const auto c = build_model<float>(ModelId::kC, RngStream(10), InputShape::reduced());
  EXPECT_NE(c.parameters()[0].tensor[0], pa[0].tensor[0]);
}

TEST(Models, CopyParametersAcrossPrecisions) {
  auto f = build_model<float>(ModelId::kA, RngStream(1), InputShape::reduced());
  auto d = build_model<double>(ModelId::kA, RngStream(2), InputShape::reduced());
  copy_parameters(d, f);
  EXPECT_EQ(static_cast<float>(d.parameters()[0].tensor[0]), f.parameters()[0].tensor[0]);
}

// End-to-end finite-difference checks at reduced scale.
class ModelGradCheck : public ::testing::TestWithParam<char> {};

TEST_P(ModelGradCheck, ReducedScale) {
  const ModelId id = parse_model_id(std::string(1, GetParam()));
  for (const auto& [shape, batch] : {std::pair{InputShape::reduced(), std::int64_t{2}},
                                     std::pair{InputShape{4, 8, 8, 3}, std::int64_t{2}}}) {
    const auto rows = model_grad_check(id, shape, batch, 11, 8);
    ASSERT_EQ(rows.back().name, "end-to-end");
    for (const auto& r : rows) {
      EXPECT_GT(r.coords, 0u) << r.name;
      EXPECT_LT(r.max_rel_error, kGradCheckTolerance) << GetParam() << " " << r.name;
    }
  }
}

INSTANTIATE_TEST_SUITE_P(AllModels, ModelGradCheck, ::testing::Values('A', 'B', 'C'));

TEST(PrimitiveGradCheck, AllBelowTolerance) {
  for (const auto& r : primitive_grad_checks(10)) EXPECT_LT(r.max_rel_error, kGradCheckTolerance) << r.name;
}

TEST(Models, FullShapeInferForward) {
  NoGradGuard no_grad;
  const auto x = rand_batch(1, InputShape::full_scale(), 3);
  for (ModelId id : {ModelId::kA, ModelId::kB, ModelId::kC}) {
    auto m = build_model<float>(id, RngStream(0));
    const auto y = m.forward(x, Mode::kInfer);
    ASSERT_EQ(y.shape(), (Shape{1, 1}));
    EXPECT_TRUE(std::isfinite(y[0])) << model_letter(id);
  }
}
