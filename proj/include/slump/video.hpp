#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "slump/tensor.hpp"

namespace slump {

// T x H x W x C unsigned-byte frame stack, row-major (T, H, W, C).
struct VideoClip {
  std::int64_t frames = 0;
  std::int64_t height = 0;
  std::int64_t width = 0;
  std::int64_t channels = 3;
  std::uint16_t fps = 15;
  std::vector<std::uint8_t> pixels;

  static VideoClip blank(std::int64_t frames, std::int64_t height, std::int64_t width, std::uint16_t fps,
                         std::int64_t channels = 3);
  std::size_t frame_size() const { return static_cast<std::size_t>(height * width * channels); }
  double duration_seconds() const { return static_cast<double>(frames) / fps; }
  std::uint8_t& at(std::int64_t t, std::int64_t y, std::int64_t x, std::int64_t c) {
    return pixels[static_cast<std::size_t>(((t * height + y) * width + x) * channels + c)];
  }
  std::uint8_t at(std::int64_t t, std::int64_t y, std::int64_t x, std::int64_t c) const {
    return pixels[static_cast<std::size_t>(((t * height + y) * width + x) * channels + c)];
  }
  // Frames [begin, end) as a new clip.
  VideoClip slice(std::int64_t begin, std::int64_t end) const;

  bool operator==(const VideoClip&) const = default;
};

// Circular region of interest in pixel coordinates; pixel (y, x) is inside
// when its center (y + 0.5, x + 0.5) lies strictly within the radius.
struct RoiCircle {
  double cy = 0.0;
  double cx = 0.0;
  double radius = 0.0;

  // Centered circle with radius 0.45 * min(height, width).
  static RoiCircle centered(std::int64_t height, std::int64_t width, double fraction = 0.45);
  bool contains(std::int64_t y, std::int64_t x) const {
    const double dy = static_cast<double>(y) + 0.5 - cy;
    const double dx = static_cast<double>(x) + 0.5 - cx;
    return dy * dy + dx * dx < radius * radius;
  }
};

// "CWV1" container: magic | u16 version | u32 T | u32 H | u32 W | u8 channels |
// u8 dtype tag (0 = u8, 1 = f32) | u16 fps | raw row-major elements, LE.
namespace cwv {
inline constexpr std::uint16_t kVersion = 1;
inline constexpr std::uint8_t kTagU8 = 0;
inline constexpr std::uint8_t kTagF32 = 1;

std::vector<std::uint8_t> encode(const VideoClip& clip);
VideoClip decode(const std::vector<std::uint8_t>& bytes);
void write(const std::filesystem::path& path, const VideoClip& clip);
VideoClip read(const std::filesystem::path& path);

// Preprocessed cache: a [T,H,W,C] f32 tensor in the same container.
void write_f32(const std::filesystem::path& path, const Tensor<float>& frames, std::uint16_t fps);
Tensor<float> read_f32(const std::filesystem::path& path);
}  // namespace cwv

}  // namespace slump
