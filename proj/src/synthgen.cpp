#include "slump/synthgen.hpp"

#include <algorithm>
#include <cmath>

#include "slump/rng.hpp"

namespace slump {

namespace {

constexpr double kBase = 118.0;
constexpr double kGrainAmp = 45.0;
constexpr double kFlickerAmp = 12.0;
constexpr double kBladeAmp = 20.0;
constexpr int kBlades = 3;

constexpr std::uint64_t kTextureStream = 1;
constexpr std::uint64_t kFlickerStream = 1'000;
constexpr std::uint64_t kGlintStream = 1'000'000;

// Two passes of a separable box blur with clamped borders.
std::vector<double> box_blur(const std::vector<double>& in, std::int64_t h, std::int64_t w, std::int64_t r) {
  std::vector<double> a = in, b(in.size());
  for (int pass = 0; pass < 2; ++pass) {
    for (std::int64_t y = 0; y < h; ++y)
      for (std::int64_t x = 0; x < w; ++x) {
        double s = 0.0;
        for (std::int64_t d = -r; d <= r; ++d) s += a[y * w + std::clamp<std::int64_t>(x + d, 0, w - 1)];
        b[y * w + x] = s / static_cast<double>(2 * r + 1);
      }
    for (std::int64_t y = 0; y < h; ++y)
      for (std::int64_t x = 0; x < w; ++x) {
        double s = 0.0;
        for (std::int64_t d = -r; d <= r; ++d) s += b[std::clamp<std::int64_t>(y + d, 0, h - 1) * w + x];
        a[y * w + x] = s / static_cast<double>(2 * r + 1);
      }
  }
  return a;
}

double bilinear(const std::vector<double>& f, std::int64_t h, std::int64_t w, double y, double x) {
  y = std::clamp(y, 0.0, static_cast<double>(h - 1));
  x = std::clamp(x, 0.0, static_cast<double>(w - 1));
  const auto y0 = static_cast<std::int64_t>(y);
  const auto x0 = static_cast<std::int64_t>(x);
  const std::int64_t y1 = std::min(y0 + 1, h - 1);
  const std::int64_t x1 = std::min(x0 + 1, w - 1);
  const double fy = y - static_cast<double>(y0);
  const double fx = x - static_cast<double>(x0);
  const double top = f[y0 * w + x0] * (1 - fx) + f[y0 * w + x1] * fx;
  const double bot = f[y1 * w + x0] * (1 - fx) + f[y1 * w + x1] * fx;
  return top * (1 - fy) + bot * fy;
}

std::uint8_t to_byte(double v) { return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 255.0))); }

}  // namespace

void SynthParams::validate() const {
  if (!(slump_cm >= kSlumpMinCm && slump_cm <= kSlumpMaxCm))
    throw Error(ErrorCode::kInvalidParams, "slump must be within [40, 190] cm");
  if (frames < 1 || height < 1 || width < 1 || fps < 1)
    throw Error(ErrorCode::kInvalidParams, "frames, extents and fps must be >= 1");
  if (!(roi.radius > 0.0) || roi.cy - roi.radius < 0.0 || roi.cx - roi.radius < 0.0 ||
      roi.cy + roi.radius > static_cast<double>(height) || roi.cx + roi.radius > static_cast<double>(width))
    throw Error(ErrorCode::kInvalidRoi, "ROI circle must fit inside the frame");
}

SynthCues cues_for(double slump_cm) {
  const double u = (slump_cm - kSlumpMinCm) / (kSlumpMaxCm - kSlumpMinCm);
  return {0.05 + 0.9 * u, 2.2 - 1.6 * u, 0.002 + 0.02 * u};
}

VideoClip generate_clip(const SynthParams& p) {
  p.validate();
  const std::int64_t h = p.height, w = p.width;
  const SynthCues cue = cues_for(p.slump_cm);
  const double rough = 1.0 - cue.smooth_weight;

  RngStream tex_rng(p.seed, kTextureStream);
  std::vector<double> grain(static_cast<std::size_t>(h * w));
  for (auto& g : grain) g = (2.0 * tex_rng.uniform() - 1.0) * std::sqrt(3.0);
  const auto blur_r = std::max<std::int64_t>(1, std::lround(p.roi.radius / 5.0));
  std::vector<double> smooth = box_blur(grain, h, w, blur_r);
  {
    double mu = 0.0, sq = 0.0;
    for (double v : smooth) mu += v;
    mu /= static_cast<double>(smooth.size());
    for (double v : smooth) sq += (v - mu) * (v - mu);
    const double sd = std::sqrt(sq / static_cast<double>(smooth.size()));
    for (auto& v : smooth) v = sd > 0 ? (v - mu) / sd : 0.0;
  }

  // Polar geometry of every ROI pixel.
  struct Px {
    std::int64_t y, x;
    double dy, dx, angle, rnorm;
  };
  std::vector<Px> roi_px;
  for (std::int64_t y = 0; y < h; ++y)
    for (std::int64_t x = 0; x < w; ++x)
      if (p.roi.contains(y, x)) {
        const double dy = static_cast<double>(y) + 0.5 - p.roi.cy;
        const double dx = static_cast<double>(x) + 0.5 - p.roi.cx;
        roi_px.push_back({y, x, dy, dx, std::atan2(dy, dx), std::sqrt(dy * dy + dx * dx) / p.roi.radius});
      }
  const auto glints = static_cast<std::int64_t>(std::lround(cue.glint_fraction * static_cast<double>(roi_px.size())));

  VideoClip clip = VideoClip::blank(p.frames, h, w, p.fps);
  std::vector<double> luma(static_cast<std::size_t>(h * w));
  for (std::int64_t t = 0; t < p.frames; ++t) {
    const double theta = cue.omega_rad_s * static_cast<double>(t) / p.fps;
    const double ct = std::cos(theta), st = std::sin(theta);
    RngStream flicker(p.seed, kFlickerStream + static_cast<std::uint64_t>(t));
    for (const Px& q : roi_px) {
      // Rotate back into the texture frame.
      const double ry = ct * q.dy - st * q.dx;
      const double rx = st * q.dy + ct * q.dx;
      const double sy = p.roi.cy + ry - 0.5;
      const double sx = p.roi.cx + rx - 0.5;
      const auto gy = std::clamp<std::int64_t>(std::lround(sy), 0, h - 1);
      const auto gx = std::clamp<std::int64_t>(std::lround(sx), 0, w - 1);
      const double g = grain[gy * w + gx];
      const double s = bilinear(smooth, h, w, sy, sx);
      const double n = 2.0 * flicker.uniform() - 1.0;
      const double blade = std::cos(kBlades * (q.angle - theta)) * q.rnorm;
      luma[q.y * w + q.x] = kBase + kGrainAmp * (rough * g + cue.smooth_weight * s) + kFlickerAmp * rough * n + kBladeAmp * blade;
    }
    RngStream glint(p.seed, kGlintStream + static_cast<std::uint64_t>(t));
    for (std::int64_t k = 0; k < glints; ++k) {
      const Px& q = roi_px[glint.below(roi_px.size())];
      const double value = 235.0 + 20.0 * glint.uniform();
      // Short streak along the direction of rotation.
      const double ty = q.dx / std::max(1e-9, q.rnorm * p.roi.radius);
      const double tx = -q.dy / std::max(1e-9, q.rnorm * p.roi.radius);
      for (int d = -1; d <= 1; ++d) {
        const std::int64_t y = q.y + std::lround(d * ty);
        const std::int64_t x = q.x + std::lround(d * tx);
        if (y >= 0 && y < h && x >= 0 && x < w && p.roi.contains(y, x)) luma[y * w + x] = value;
      }
    }
    for (const Px& q : roi_px) {
      const double v = luma[q.y * w + q.x];
      clip.at(t, q.y, q.x, 0) = to_byte(v);
      clip.at(t, q.y, q.x, 1) = to_byte(v * 0.96);
      clip.at(t, q.y, q.x, 2) = to_byte(v * 0.90);
    }
  }
  return clip;
}

std::array<std::size_t, 3> split_counts(std::size_t n, const SplitRatios& r) {
  const double parts[3] = {r.train, r.val, r.test};
  double total = 0.0;
  for (double v : parts) {
    if (!(v >= 0.0)) throw Error(ErrorCode::kInvalidParams, "split ratios must be non-negative");
    total += v;
  }
  if (std::abs(total - 1.0) > 1e-9) throw Error(ErrorCode::kInvalidParams, "split ratios must sum to 1");
  std::array<std::size_t, 3> counts{};
  std::array<double, 3> rem{};
  std::size_t assigned = 0;
  for (int i = 0; i < 3; ++i) {
    const double exact = parts[i] * static_cast<double>(n);
    counts[i] = static_cast<std::size_t>(std::floor(exact + 1e-9));
    rem[i] = exact - static_cast<double>(counts[i]);
    assigned += counts[i];
  }
  while (assigned < n) {
    const auto i = static_cast<std::size_t>(std::max_element(rem.begin(), rem.end()) - rem.begin());
    ++counts[i];
    rem[i] = -1.0;
    ++assigned;
  }
  // Every split with a positive ratio gets at least one clip when n allows,
  // taken from the currently largest split.
  for (int i = 0; i < 3; ++i) {
    if (parts[i] <= 0.0 || counts[i] > 0) continue;
    const auto big = static_cast<std::size_t>(std::max_element(counts.begin(), counts.end()) - counts.begin());
    if (counts[big] < 2) break;
    --counts[big];
    ++counts[i];
  }
  return counts;
}

std::vector<ClipRecord> generate_dataset(std::size_t n, double lo, double hi, std::uint64_t master_seed,
                                         const SplitRatios& ratios) {
  if (n < 3) throw Error(ErrorCode::kInvalidParams, "need at least 3 clips");
  if (!(lo >= kSlumpMinCm && hi <= kSlumpMaxCm && lo <= hi))
    throw Error(ErrorCode::kInvalidParams, "slump range must lie within [40, 190] cm");
  const auto counts = split_counts(n, ratios);
  RngStream master(master_seed, 0);
  std::vector<ClipRecord> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i].index = i;
    out[i].slump_cm = master.uniform(lo, hi);
    out[i].seed = master.derive_seed(i);
  }
  RngStream split_rng(master_seed, 1);
  const auto perm = permutation(n, split_rng);
  for (std::size_t k = 0; k < n; ++k) {
    const Split s = k < counts[0] ? Split::kTrain : (k < counts[0] + counts[1] ? Split::kVal : Split::kTest);
    out[perm[k]].split = s;
  }
  return out;
}

SynthPreset SynthPreset::full_scale() { return {"paper-shape", 224, 224, 30.0, 15, 255, SplitRatios{}}; }

SynthPreset SynthPreset::desk() {
  return {"desk", 56, 56, 12.0, 15, 96, SplitRatios{64.0 / 96.0, 16.0 / 96.0, 16.0 / 96.0}};
}

SynthPreset SynthPreset::by_name(const std::string& name) {
  if (name == "desk") return desk();
  if (name == "paper-shape") return full_scale();
  throw Error(ErrorCode::kConfig, "unknown preset '" + name + "' (expected desk or paper-shape)");
}

SynthParams SynthPreset::params_for(const ClipRecord& rec) const {
  SynthParams p;
  p.slump_cm = rec.slump_cm;
  p.seed = rec.seed;
  p.frames = static_cast<std::int64_t>(std::lround(seconds * fps));
  p.height = height;
  p.width = width;
  p.fps = fps;
  p.roi = RoiCircle::centered(height, width);
  return p;
}

namespace {

std::vector<double> luma_of(const Tensor<float>& window) {
  if (window.rank() != 4 || window.extent(3) != 3)
    throw Error(ErrorCode::kInvalidShape, "statistics expect a [T,H,W,3] window");
  const auto d = window.data();
  std::vector<double> y(d.size() / 3);
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = (d[3 * i] + d[3 * i + 1] + d[3 * i + 2]) / 3.0;
  return y;
}

}  // namespace

double mean_local_variance(const Tensor<float>& window, const RoiCircle& roi) {
  const auto y = luma_of(window);
  const std::int64_t t = window.extent(0), h = window.extent(1), w = window.extent(2);
  std::vector<char> inside(static_cast<std::size_t>(h * w));
  for (std::int64_t r = 0; r < h; ++r)
    for (std::int64_t c = 0; c < w; ++c) inside[r * w + c] = roi.contains(r, c);
  double acc = 0.0;
  std::size_t count = 0;
  for (std::int64_t f = 0; f < t; ++f) {
    const double* fr = y.data() + f * h * w;
    for (std::int64_t r = 1; r + 1 < h; ++r)
      for (std::int64_t c = 1; c + 1 < w; ++c) {
        bool ok = true;
        double s = 0.0, sq = 0.0;
        for (std::int64_t dr = -1; dr <= 1 && ok; ++dr)
          for (std::int64_t dc = -1; dc <= 1; ++dc) {
            const std::int64_t q = (r + dr) * w + c + dc;
            if (!inside[q]) {
              ok = false;
              break;
            }
            s += fr[q];
            sq += fr[q] * fr[q];
          }
        if (!ok) continue;
        const double m = s / 9.0;
        acc += sq / 9.0 - m * m;
        ++count;
      }
  }
  return count ? acc / static_cast<double>(count) : 0.0;
}

double mean_interframe_difference(const Tensor<float>& window, const RoiCircle& roi) {
  const auto y = luma_of(window);
  const std::int64_t t = window.extent(0), h = window.extent(1), w = window.extent(2);
  double acc = 0.0;
  std::size_t count = 0;
  for (std::int64_t f = 1; f < t; ++f)
    for (std::int64_t r = 0; r < h; ++r)
      for (std::int64_t c = 0; c < w; ++c) {
        if (!roi.contains(r, c)) continue;
        const std::size_t q = static_cast<std::size_t>(r * w + c);
        acc += std::abs(y[f * h * w + q] - y[(f - 1) * h * w + q]);
        ++count;
      }
  return count ? acc / static_cast<double>(count) : 0.0;
}

std::array<double, 2> LinearBaseline::features(const Tensor<float>& window, const RoiCircle& roi) {
  return {mean_local_variance(window, roi), mean_interframe_difference(window, roi)};
}

LinearBaseline LinearBaseline::fit(const std::vector<std::array<double, 2>>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 3) throw Error(ErrorCode::kInvalidParams, "baseline fit needs >= 3 rows");
  // Normal equations for [1, f0, f1]; features are standardized first for
  // conditioning, then the solution is mapped back.
  double mu[2] = {0, 0}, sd[2] = {0, 0};
  for (const auto& r : x)
    for (int j = 0; j < 2; ++j) mu[j] += r[j];
  for (double& m : mu) m /= static_cast<double>(x.size());
  for (const auto& r : x)
    for (int j = 0; j < 2; ++j) sd[j] += (r[j] - mu[j]) * (r[j] - mu[j]);
  for (double& s : sd) s = std::sqrt(s / static_cast<double>(x.size()));
  for (double& s : sd)
    if (s == 0.0) s = 1.0;
  double a[3][4] = {};
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double row[3] = {1.0, (x[i][0] - mu[0]) / sd[0], (x[i][1] - mu[1]) / sd[1]};
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) a[r][c] += row[r] * row[c];
      a[r][3] += row[r] * y[i];
    }
  }
  for (int col = 0; col < 3; ++col) {
    int piv = col;
    for (int r = col + 1; r < 3; ++r)
      if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
    std::swap(a[col], a[piv]);
    if (std::abs(a[col][col]) < 1e-12) throw Error(ErrorCode::kNumericFailure, "singular baseline fit");
    for (int r = 0; r < 3; ++r) {
      if (r == col) continue;
      const double f = a[r][col] / a[col][col];
      for (int c = col; c < 4; ++c) a[r][c] -= f * a[col][c];
    }
  }
  const double z[3] = {a[0][3] / a[0][0], a[1][3] / a[1][1], a[2][3] / a[2][2]};
  LinearBaseline b;
  b.coef[1] = z[1] / sd[0];
  b.coef[2] = z[2] / sd[1];
  b.coef[0] = z[0] - b.coef[1] * mu[0] - b.coef[2] * mu[1];
  return b;
}

}  // namespace slump
