#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "slump/dataset.hpp"
#include "slump/video.hpp"

namespace slump {

inline constexpr double kSlumpMinCm = 40.0;
inline constexpr double kSlumpMaxCm = 190.0;

struct SynthParams {
  double slump_cm = 115.0;
  std::uint64_t seed = 0;
  std::int64_t frames = 450;
  std::int64_t height = 224;
  std::int64_t width = 224;
  std::uint16_t fps = 15;
  RoiCircle roi = RoiCircle::centered(224, 224);

  // invalid-params on a bad slump or extent, invalid-roi when the circle
  // does not fit inside the frame.
  void validate() const;
};

// Top-down view of a rotating granular mix. Slump drives three monotone cues:
//   grain:  texture = (1 - a) * grain + a * lowpass(grain), a linear in slump
//   motion: angular velocity of the rotating pattern falls linearly with slump
//   glints: specular streak density rises linearly with slump
// Pixels outside the ROI are exactly 0. Frame t depends only on
// (seed, slump, t) and the geometry.
VideoClip generate_clip(const SynthParams& p);

// The three cue parameters for a slump value.
struct SynthCues {
  double smooth_weight;
  double omega_rad_s;
  double glint_fraction;  // fraction of ROI pixels lit per frame
};
SynthCues cues_for(double slump_cm);

struct SplitRatios {
  double train = 185.0 / 255.0;
  double val = 35.0 / 255.0;
  double test = 35.0 / 255.0;
};

// Largest-remainder apportionment of n clips, then any empty split with a
// positive ratio borrows one clip from the largest; throws unless ratios are
// non-negative and sum to 1.
std::array<std::size_t, 3> split_counts(std::size_t n, const SplitRatios& ratios);

struct ClipRecord {
  std::size_t index = 0;
  double slump_cm = 0.0;
  Split split = Split::kTrain;
  std::uint64_t seed = 0;
};

// Slumps are uniform over [lo, hi] from the master stream, per-clip seeds
// are derived sub-streams, and splits come from a seeded shuffle.
std::vector<ClipRecord> generate_dataset(std::size_t n, double lo, double hi, std::uint64_t master_seed,
                                         const SplitRatios& ratios = {});

struct SynthPreset {
  std::string name;
  std::int64_t height;
  std::int64_t width;
  double seconds;
  std::uint16_t fps;
  std::size_t clips;
  SplitRatios ratios;

  static SynthPreset full_scale();
  static SynthPreset desk();
  static SynthPreset by_name(const std::string& name);

  SynthParams params_for(const ClipRecord& rec) const;
};

// Handcrafted ROI statistics on a [T,H,W,3] window in [0,1], computed on
// luma. Local variance uses 3x3 neighbourhoods fully inside the ROI.
double mean_local_variance(const Tensor<float>& window, const RoiCircle& roi);
double mean_interframe_difference(const Tensor<float>& window, const RoiCircle& roi);

// Least-squares slump ~ c0 + c1 * local_variance + c2 * interframe_difference.
struct LinearBaseline {
  std::array<double, 3> coef{};

  static std::array<double, 2> features(const Tensor<float>& window, const RoiCircle& roi);
  static LinearBaseline fit(const std::vector<std::array<double, 2>>& x, const std::vector<double>& y);
  double predict(const std::array<double, 2>& f) const { return coef[0] + coef[1] * f[0] + coef[2] * f[1]; }
};

}  // namespace slump
