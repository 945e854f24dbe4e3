#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "slump/dataset.hpp"
#include "slump/video.hpp"

namespace slump {

// One manifest line: path,slump_cm,split,seed. Paths are relative to the
// manifest's directory unless absolute.
struct ManifestRow {
  std::string path;
  double slump_cm = 0.0;
  Split split = Split::kTrain;
  std::uint64_t seed = 0;
};

void write_manifest(const std::filesystem::path& path, const std::vector<ManifestRow>& rows);
// Throws format on a malformed line or header.
std::vector<ManifestRow> read_manifest(const std::filesystem::path& path);

// Zeroes every pixel outside the circle. Radius 0 blanks the clip and a
// circle reaching past the corners leaves it unchanged; invalid-roi on a
// negative or non-finite radius or a center outside the frame.
VideoClip mask_roi(const VideoClip& clip, const RoiCircle& roi);

// Last ceil(seconds * fps) frames; too-short when the clip has fewer.
VideoClip select_tail(const VideoClip& clip, double seconds);

// Nearest-frame resampling: output frame j takes source frame
// round(j * src / dst), and floor(frames * dst / src) frames are produced.
// Upsampling is rejected.
VideoClip resample_fps(const VideoClip& clip, std::uint16_t target_fps);

// Non-overlapping windows of round(seconds * fps) frames; a trailing partial
// window is dropped and no-window is thrown when none fits.
std::vector<VideoClip> split_windows(const VideoClip& clip, double seconds);

// Half-pixel bilinear resize to size x size, scaled to [0,1].
Tensor<float> prepare(const VideoClip& clip, std::int64_t size);

struct PipelineConfig {
  double tail_seconds = 10.0;
  std::uint16_t target_fps = 15;
  double window_seconds = 2.0;
  std::int64_t size = 224;
  double roi_fraction = 0.45;
  // Keep only the last N windows of each clip; 0 keeps all.
  std::size_t windows_per_clip = 0;
  // build_dataset aborts once more than this fraction of clips is skipped.
  double max_skip_fraction = 0.1;

  static PipelineConfig full_scale();
  static PipelineConfig desk();
  static PipelineConfig by_name(const std::string& name);
  InputShape input_shape() const;
};

// mask -> tail -> resample -> windows -> prepare for one decoded clip.
std::vector<Tensor<float>> process_clip(const VideoClip& clip, const PipelineConfig& cfg);

struct SkippedClip {
  std::string path;
  std::string reason;
};

struct PreparedData {
  Dataset train;
  Dataset val;
  Dataset test;
  std::vector<SkippedClip> skipped;
  std::size_t clips = 0;

  const Dataset& split(Split s) const;
};

// Loads every manifest clip and runs process_clip. Clips that are too short,
// yield no window or fail to decode are skipped and listed; skipping more
// than cfg.max_skip_fraction of the clips aborts. When cache_dir is set, prepared windows are read from and
// written to it.
PreparedData build_dataset(const std::filesystem::path& manifest, const PipelineConfig& cfg,
                           const std::optional<std::filesystem::path>& cache_dir = std::nullopt);

}  // namespace slump
