#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>

#include "slump/pipeline.hpp"
#include "slump/synthgen.hpp"

using namespace slump;
namespace fs = std::filesystem;

namespace {

SynthParams small_params(double slump, std::uint64_t seed, std::int64_t frames = 6) {
  SynthParams p;
  p.slump_cm = slump;
  p.seed = seed;
  p.frames = frames;
  p.height = 40;
  p.width = 48;
  p.roi = RoiCircle::centered(40, 48);
  return p;
}

// Frame t is filled with the byte t (mod 256) so frame identity survives slicing.
VideoClip indexed_clip(std::int64_t frames, std::uint16_t fps, std::int64_t h = 4, std::int64_t w = 4) {
  auto c = VideoClip::blank(frames, h, w, fps);
  for (std::int64_t t = 0; t < frames; ++t)
    std::fill_n(c.pixels.begin() + static_cast<std::ptrdiff_t>(t * c.frame_size()), c.frame_size(),
                static_cast<std::uint8_t>(t % 256));
  return c;
}

template <typename F>
ErrorCode code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::kConfig;
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST(Synth, PixelsOutsideRoiAreZero) {
  for (double slump : {40.0, 115.0, 190.0}) {
    const auto p = small_params(slump, 3);
    const auto clip = generate_clip(p);
    ASSERT_EQ(clip.frames, p.frames);
    std::size_t inside_nonzero = 0;
    for (std::int64_t t = 0; t < clip.frames; ++t)
      for (std::int64_t y = 0; y < clip.height; ++y)
        for (std::int64_t x = 0; x < clip.width; ++x)
          for (std::int64_t c = 0; c < 3; ++c) {
            if (!p.roi.contains(y, x)) ASSERT_EQ(clip.at(t, y, x, c), 0) << t << "," << y << "," << x;
            else inside_nonzero += clip.at(t, y, x, c) != 0;
          }
    EXPECT_GT(inside_nonzero, 0u);
  }
}

TEST(Synth, DeterministicAndFramewise) {
  const auto a = generate_clip(small_params(90, 11, 8));
  EXPECT_EQ(a, generate_clip(small_params(90, 11, 8)));
  EXPECT_NE(a, generate_clip(small_params(90, 12, 8)));
  EXPECT_NE(a, generate_clip(small_params(91, 11, 8)));
  // Frame t does not depend on how many frames are rendered.
  EXPECT_EQ(generate_clip(small_params(90, 11, 5)), a.slice(0, 5));
}

TEST(Synth, LowSlumpHasHigherLocalVariance) {
  for (std::uint64_t seed : {1u, 2u, 3u, 4u}) {
    const auto p40 = small_params(40, seed), p190 = small_params(190, seed);
    const auto w40 = prepare(generate_clip(p40), 40), w190 = prepare(generate_clip(p190), 40);
    const auto roi = RoiCircle::centered(40, 40);
    EXPECT_GT(mean_local_variance(w40, roi), mean_local_variance(w190, roi)) << "seed " << seed;
  }
}

TEST(Synth, CuesAreMonotoneInSlump) {
  SynthCues prev = cues_for(kSlumpMinCm);
  for (double s = kSlumpMinCm + 5; s <= kSlumpMaxCm; s += 5) {
    const auto c = cues_for(s);
    EXPECT_GT(c.smooth_weight, prev.smooth_weight);
    EXPECT_LT(c.omega_rad_s, prev.omega_rad_s);
    EXPECT_GT(c.glint_fraction, prev.glint_fraction);
    prev = c;
  }
}

TEST(Synth, InvalidParams) {
  auto p = small_params(39.9, 1);
  EXPECT_EQ(code_of([&] { generate_clip(p); }), ErrorCode::kInvalidParams);
  p = small_params(190.1, 1);
  EXPECT_EQ(code_of([&] { generate_clip(p); }), ErrorCode::kInvalidParams);
  p = small_params(100, 1);
  p.roi.radius = 30;  // taller than the 40-pixel frame
  EXPECT_EQ(code_of([&] { generate_clip(p); }), ErrorCode::kInvalidRoi);
  p = small_params(100, 1);
  p.roi.cx = 45;
  EXPECT_EQ(code_of([&] { generate_clip(p); }), ErrorCode::kInvalidRoi);
}

TEST(Synth, SplitCounts) {
  EXPECT_EQ(split_counts(255, {}), (std::array<std::size_t, 3>{185, 35, 35}));
  EXPECT_EQ(split_counts(3, {1.0 / 3, 1.0 / 3, 1.0 / 3}), (std::array<std::size_t, 3>{1, 1, 1}));
  EXPECT_EQ(split_counts(3, {}), (std::array<std::size_t, 3>{1, 1, 1}));
  EXPECT_EQ(split_counts(4, {1.0, 0.0, 0.0}), (std::array<std::size_t, 3>{4, 0, 0}));
  EXPECT_EQ(split_counts(96, SynthPreset::desk().ratios), (std::array<std::size_t, 3>{64, 16, 16}));
  for (std::size_t n = 3; n < 300; ++n) {
    const auto c = split_counts(n, {});
    ASSERT_EQ(c[0] + c[1] + c[2], n);
    ASSERT_TRUE(c[0] > 0 && c[1] > 0 && c[2] > 0) << n;
  }
  EXPECT_THROW(split_counts(10, {0.5, 0.5, 0.5}), Error);
  EXPECT_THROW(split_counts(10, {1.2, -0.1, -0.1}), Error);
}

TEST(Synth, GenerateDataset) {
  const auto a = generate_dataset(255, 40, 190, 1);
  std::array<std::size_t, 3> counts{};
  for (const auto& r : a) {
    ++counts[static_cast<std::size_t>(r.split)];
    EXPECT_GE(r.slump_cm, 40.0);
    EXPECT_LE(r.slump_cm, 190.0);
  }
  EXPECT_EQ(counts, (std::array<std::size_t, 3>{185, 35, 35}));
  const auto b = generate_dataset(255, 40, 190, 1);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].slump_cm, b[i].slump_cm);
    EXPECT_EQ(a[i].split, b[i].split);
    EXPECT_EQ(a[i].seed, b[i].seed);
  }
  std::vector<std::uint64_t> seeds;
  for (const auto& r : a) seeds.push_back(r.seed);
  std::sort(seeds.begin(), seeds.end());
  EXPECT_EQ(std::adjacent_find(seeds.begin(), seeds.end()), seeds.end());
  EXPECT_NE(generate_dataset(255, 40, 190, 2)[0].slump_cm, a[0].slump_cm);
  EXPECT_THROW(generate_dataset(2, 40, 190, 1), Error);
  EXPECT_THROW(generate_dataset(10, 30, 190, 1), Error);
}

TEST(Synth, LinearBaselineRecoversSlump) {
  const auto preset = SynthPreset::desk();
  const auto cfg = PipelineConfig::desk();
  const auto recs = generate_dataset(preset.clips, kSlumpMinCm, kSlumpMaxCm, 7, preset.ratios);
  const auto roi = RoiCircle::centered(cfg.size, cfg.size, cfg.roi_fraction);
  std::vector<std::array<double, 2>> fx;
  std::vector<double> fy;
  std::vector<std::pair<std::array<double, 2>, double>> test;
  for (const auto& r : recs) {
    for (const auto& w : process_clip(generate_clip(preset.params_for(r)), cfg)) {
      const auto f = LinearBaseline::features(w, roi);
      if (r.split == Split::kTrain) {
        fx.push_back(f);
        fy.push_back(r.slump_cm);
      } else if (r.split == Split::kTest) {
        test.emplace_back(f, r.slump_cm);
      }
    }
  }
  const auto model = LinearBaseline::fit(fx, fy);
  double mae = 0.0;
  for (const auto& [f, y] : test) mae += std::abs(model.predict(f) - y);
  mae /= static_cast<double>(test.size());
  EXPECT_LT(mae, 25.0);
}

TEST(LinearBaseline, FitsExactPlane) {
  std::vector<std::array<double, 2>> x;
  std::vector<double> y;
  for (int i = 0; i < 20; ++i) {
    const double a = 0.01 * i, b = std::sin(i);
    x.push_back({a, b});
    y.push_back(3.0 - 40.0 * a + 7.0 * b);
  }
  const auto m = LinearBaseline::fit(x, y);
  EXPECT_NEAR(m.coef[0], 3.0, 1e-9);
  EXPECT_NEAR(m.coef[1], -40.0, 1e-8);
  EXPECT_NEAR(m.coef[2], 7.0, 1e-9);
}

TEST(Mask, WholeFrameZeroRadiusAndIdempotence) {
  const auto clip = generate_clip(small_params(100, 2));
  const RoiCircle all{20, 24, 100};
  const auto raw = indexed_clip(3, 15, 40, 48);
  EXPECT_EQ(mask_roi(raw, all), raw);
  const auto black = mask_roi(raw, RoiCircle{20, 24, 0});
  EXPECT_TRUE(std::all_of(black.pixels.begin(), black.pixels.end(), [](auto v) { return v == 0; }));
  const RoiCircle inner{18, 20, 9.5};
  const auto once = mask_roi(clip, inner);
  EXPECT_EQ(mask_roi(once, inner), once);
  for (std::int64_t y = 0; y < clip.height; ++y)
    for (std::int64_t x = 0; x < clip.width; ++x)
      EXPECT_EQ(once.at(1, y, x, 0), inner.contains(y, x) ? clip.at(1, y, x, 0) : 0);
}

TEST(Mask, InvalidCircle) {
  const auto raw = indexed_clip(1, 15);
  EXPECT_EQ(code_of([&] { mask_roi(raw, {2, 2, -1}); }), ErrorCode::kInvalidRoi);
  EXPECT_EQ(code_of([&] { mask_roi(raw, {2, 9, 1}); }), ErrorCode::kInvalidRoi);
  EXPECT_EQ(code_of([&] { mask_roi(raw, {2, 2, std::nan("")}); }), ErrorCode::kInvalidRoi);
}

TEST(Tail, Arithmetic) {
  const auto c30 = indexed_clip(450, 15);
  const auto tail = select_tail(c30, 10);
  ASSERT_EQ(tail.frames, 150);
  EXPECT_EQ(tail, c30.slice(300, 450));
  const auto c10 = indexed_clip(150, 15);
  EXPECT_EQ(select_tail(c10, 10), c10);
  EXPECT_EQ(code_of([&] { select_tail(indexed_clip(135, 15), 10); }), ErrorCode::kTooShort);
}

TEST(Resample, ThirtyToFifteen) {
  const auto src = indexed_clip(60, 30);
  const auto out = resample_fps(src, 15);
  ASSERT_EQ(out.frames, 30);
  EXPECT_EQ(out.fps, 15);
  for (std::int64_t j = 0; j < 30; ++j) EXPECT_EQ(out.at(j, 0, 0, 0), 2 * j);
  EXPECT_EQ(resample_fps(src, 30), src);
  EXPECT_EQ(code_of([&] { resample_fps(src, 60); }), ErrorCode::kInvalidParams);
  // Non-integer ratio keeps indices in range and non-decreasing.
  const auto odd = resample_fps(indexed_clip(25, 25), 15);
  ASSERT_EQ(odd.frames, 15);
  for (std::int64_t j = 1; j < odd.frames; ++j) EXPECT_GE(odd.at(j, 0, 0, 0), odd.at(j - 1, 0, 0, 0));
  EXPECT_LE(odd.at(14, 0, 0, 0), 24);
}

TEST(Windows, Arithmetic) {
  EXPECT_EQ(split_windows(indexed_clip(150, 15), 2).size(), 5u);
  const auto w59 = split_windows(indexed_clip(59, 15), 2);
  ASSERT_EQ(w59.size(), 1u);
  EXPECT_EQ(w59[0], indexed_clip(59, 15).slice(0, 30));
  const auto c30 = indexed_clip(30, 15);
  ASSERT_EQ(split_windows(c30, 2).size(), 1u);
  EXPECT_EQ(split_windows(c30, 2)[0], c30);
  EXPECT_EQ(code_of([&] { split_windows(indexed_clip(29, 15), 2); }), ErrorCode::kNoWindow);
}

TEST(Windows, ConserveFrames) {
  for (std::int64_t n = 30; n <= 200; ++n) {
    const auto clip = indexed_clip(n, 15, 1, 1);
    const auto w = split_windows(clip, 2);
    const auto used = static_cast<std::int64_t>(w.size()) * 30;
    ASSERT_LE(used, n);
    ASSERT_LT(n - used, 30);
    for (std::size_t k = 0; k < w.size(); ++k) ASSERT_EQ(w[k].at(0, 0, 0, 0), (k * 30) % 256);
  }
}

TEST(Prepare, IdentityAndRange) {
  const auto clip = generate_clip(small_params(120, 5, 2));
  const auto sq = mask_roi(clip, RoiCircle{20, 24, 18}).slice(0, 2);
  auto c = VideoClip::blank(2, 40, 40, 15);
  for (std::int64_t t = 0; t < 2; ++t)
    for (std::int64_t y = 0; y < 40; ++y)
      for (std::int64_t x = 0; x < 40; ++x)
        for (std::int64_t k = 0; k < 3; ++k) c.at(t, y, x, k) = sq.at(t, y, x + 4, k);
  const auto out = prepare(c, 40);
  ASSERT_EQ(out.shape(), (Shape{2, 40, 40, 3}));
  for (std::size_t i = 0; i < out.numel(); ++i) EXPECT_EQ(out[i], static_cast<float>(c.pixels[i] / 255.0));
  auto white = VideoClip::blank(1, 7, 5, 15);
  std::fill(white.pixels.begin(), white.pixels.end(), 255);
  const auto ones = prepare(white, 9);
  for (float v : ones.data()) EXPECT_EQ(v, 1.0f);
}

TEST(Prepare, CheckerboardBilinearOracle) {
  auto c = VideoClip::blank(1, 2, 2, 15, 1);
  c.at(0, 0, 1, 0) = 255;
  c.at(0, 1, 0, 0) = 255;
  // Half-pixel centers map output 0..3 to source -0.25, 0.25, 0.75, 1.25,
  // clamped to [0, 1]; value = fx + fy - 2 fx fy.
  const float want[4][4] = {{0.0f, 0.25f, 0.75f, 1.0f},
                            {0.25f, 0.375f, 0.625f, 0.75f},
                            {0.75f, 0.625f, 0.375f, 0.25f},
                            {1.0f, 0.75f, 0.25f, 0.0f}};
  const auto out = prepare(c, 4);
  for (int y = 0; y < 4; ++y)
    for (int x = 0; x < 4; ++x) EXPECT_NEAR(out[static_cast<std::size_t>(y * 4 + x)], want[y][x], 1e-7) << y << x;
}

TEST(Pipeline, ThirtySecondClipGivesFiveWindows) {
  auto p = small_params(100, 1, 450);
  p.height = p.width = 32;
  p.roi = RoiCircle::centered(32, 32);
  PipelineConfig cfg;
  cfg.size = 24;
  const auto windows = process_clip(generate_clip(p), cfg);
  ASSERT_EQ(windows.size(), 5u);
  for (const auto& w : windows) {
    EXPECT_EQ(w.shape(), (Shape{30, 24, 24, 3}));
    for (float v : w.data()) ASSERT_TRUE(v >= 0.0f && v <= 1.0f);
  }
  EXPECT_EQ(cfg.input_shape().frames, 30);
  EXPECT_EQ(PipelineConfig::desk().input_shape().frames, 8);
}

TEST(Pipeline, WindowCapKeepsTheLastWindows) {
  auto p = small_params(100, 1, 180);
  p.height = p.width = 16;
  p.roi = RoiCircle::centered(16, 16);
  const auto clip = generate_clip(p);
  PipelineConfig cfg;
  cfg.size = 16;
  const auto all = process_clip(clip, cfg);
  ASSERT_EQ(all.size(), 5u);
  cfg.windows_per_clip = 2;
  const auto last = process_clip(clip, cfg);
  ASSERT_EQ(last.size(), 2u);
  for (std::size_t k = 0; k < 2; ++k) {
    const auto a = all[3 + k].data();
    const auto b = last[k].data();
    EXPECT_TRUE(std::equal(a.begin(), a.end(), b.begin()));
  }
}

TEST(Manifest, RoundTripAndFormatErrors) {
  TempDir dir("slump_manifest_test");
  const std::vector<ManifestRow> rows{{"a.cwv", 40.125, Split::kTrain, 7},
                                      {"sub/b.cwv", 0.1 + 0.2, Split::kTest, 18446744073709551615ull}};
  write_manifest(dir.path / "m.csv", rows);
  const auto back = read_manifest(dir.path / "m.csv");
  ASSERT_EQ(back.size(), 2u);
  for (std::size_t i = 0; i < 2; ++i) {
    EXPECT_EQ(back[i].path, rows[i].path);
    EXPECT_EQ(back[i].slump_cm, rows[i].slump_cm);
    EXPECT_EQ(back[i].split, rows[i].split);
    EXPECT_EQ(back[i].seed, rows[i].seed);
  }
  for (const std::string bad : {"path,slump\n", "path,slump_cm,split,seed\na.cwv,x,train,1\n",
                                "path,slump_cm,split,seed\na.cwv,50,holdout,1\n",
                                "path,slump_cm,split,seed\na.cwv,50,train\n"}) {
    std::ofstream(dir.path / "bad.csv") << bad;
    EXPECT_EQ(code_of([&] { read_manifest(dir.path / "bad.csv"); }), ErrorCode::kFormat) << bad;
  }
  EXPECT_EQ(code_of([&] { read_manifest(dir.path / "absent.csv"); }), ErrorCode::kIo);
}

namespace {

// Three desk-sized clips, one written as garbage.
fs::path write_three_clips(const fs::path& dir, bool corrupt_one) {
  const auto preset = SynthPreset::desk();
  std::vector<ManifestRow> rows;
  const Split splits[3] = {Split::kTrain, Split::kVal, Split::kTest};
  for (int i = 0; i < 3; ++i) {
    ClipRecord rec{static_cast<std::size_t>(i), 50.0 + 40.0 * i, splits[i], 100u + i};
    const std::string name = "clip" + std::to_string(i) + ".cwv";
    if (corrupt_one && i == 1) std::ofstream(dir / name) << "not a clip";
    else cwv::write(dir / name, generate_clip(preset.params_for(rec)));
    rows.push_back({name, rec.slump_cm, rec.split, rec.seed});
  }
  write_manifest(dir / "manifest.csv", rows);
  return dir / "manifest.csv";
}

}  // namespace

TEST(BuildDataset, LabelsAndShapesPassThrough) {
  TempDir dir("slump_build_test");
  const auto manifest = write_three_clips(dir.path, false);
  const auto cfg = PipelineConfig::desk();
  const auto data = build_dataset(manifest, cfg);
  EXPECT_EQ(data.clips, 3u);
  EXPECT_TRUE(data.skipped.empty());
  const double labels[3] = {50.0, 90.0, 130.0};
  for (int s = 0; s < 3; ++s) {
    const auto& d = data.split(static_cast<Split>(s));
    ASSERT_EQ(d.size(), 1u);
    d.check_shape(cfg.input_shape());
    for (const auto& smp : d.samples) EXPECT_EQ(smp.label, labels[s]);
  }
  // Processing twice, and through the cache, yields identical windows.
  const auto again = build_dataset(manifest, cfg, dir.path / "cache");
  const auto cached = build_dataset(manifest, cfg, dir.path / "cache");
  for (std::size_t i = 0; i < data.train.size(); ++i) {
    const auto a = data.train.samples[i].input.data();
    const auto b = again.train.samples[i].input.data();
    const auto c = cached.train.samples[i].input.data();
    ASSERT_TRUE(std::equal(a.begin(), a.end(), b.begin()));
    ASSERT_TRUE(std::equal(a.begin(), a.end(), c.begin()));
  }
}

TEST(BuildDataset, UnreadableClipIsSkippedAndLogged) {
  TempDir dir("slump_skip_test");
  const auto manifest = write_three_clips(dir.path, true);
  auto cfg = PipelineConfig::desk();
  cfg.max_skip_fraction = 0.5;
  const auto data = build_dataset(manifest, cfg);
  ASSERT_EQ(data.skipped.size(), 1u);
  EXPECT_EQ(data.skipped[0].path, "clip1.cwv");
  EXPECT_FALSE(data.skipped[0].reason.empty());
  EXPECT_EQ(data.train.size(), 1u);
  EXPECT_EQ(data.val.size(), 0u);
  EXPECT_EQ(data.test.size(), 1u);
  // One of three is above the default 10% budget.
  EXPECT_EQ(code_of([&] { build_dataset(manifest, PipelineConfig::desk()); }), ErrorCode::kIo);
}

TEST(BuildDataset, EmptyManifestIsAnError) {
  TempDir dir("slump_empty_test");
  write_manifest(dir.path / "m.csv", {});
  EXPECT_EQ(code_of([&] { build_dataset(dir.path / "m.csv", PipelineConfig::desk()); }), ErrorCode::kInvalidParams);
}

TEST(Clip, ContainerRoundTrip) {
  const auto clip = generate_clip(small_params(70, 4, 3));
  const auto bytes = cwv::encode(clip);
  EXPECT_TRUE(std::equal(bytes.begin(), bytes.begin() + 4, "CWV1"));
  EXPECT_EQ(cwv::decode(bytes), clip);
  auto truncated = bytes;
  truncated.resize(bytes.size() - 1);
  EXPECT_EQ(code_of([&] { cwv::decode(truncated); }), ErrorCode::kFormat);
}
