#include "slump/video.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <iterator>

namespace slump {

RoiCircle RoiCircle::centered(std::int64_t height, std::int64_t width, double fraction) {
  return {height / 2.0, width / 2.0, fraction * static_cast<double>(std::min(height, width))};
}

VideoClip VideoClip::blank(std::int64_t frames, std::int64_t height, std::int64_t width, std::uint16_t fps,
                           std::int64_t channels) {
  if (frames < 1 || height < 1 || width < 1 || channels < 1 || fps < 1)
    throw Error(ErrorCode::kInvalidShape, "clip extents and fps must be >= 1");
  VideoClip c;
  c.frames = frames;
  c.height = height;
  c.width = width;
  c.channels = channels;
  c.fps = fps;
  c.pixels.assign(static_cast<std::size_t>(frames * height * width * channels), 0);
  return c;
}

VideoClip VideoClip::slice(std::int64_t begin, std::int64_t end) const {
  if (begin < 0 || end > frames || begin >= end) throw Error(ErrorCode::kInvalidShape, "bad frame range");
  VideoClip out = *this;
  out.frames = end - begin;
  const auto fs = static_cast<std::ptrdiff_t>(frame_size());
  out.pixels.assign(pixels.begin() + begin * fs, pixels.begin() + end * fs);
  return out;
}

namespace cwv {

namespace {

constexpr char kMagic[4] = {'C', 'W', 'V', '1'};
constexpr std::size_t kHeader = 4 + 2 + 12 + 1 + 1 + 2;

template <typename U>
void put(std::vector<std::uint8_t>& out, U v) {
  for (std::size_t i = 0; i < sizeof(U); ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

template <typename U>
U get(const std::vector<std::uint8_t>& b, std::size_t& pos) {
  U v = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) v |= static_cast<U>(static_cast<U>(b[pos + i]) << (8 * i));
  pos += sizeof(U);
  return v;
}

struct Header {
  std::uint32_t t, h, w;
  std::uint8_t channels, tag;
  std::uint16_t fps;
};

std::vector<std::uint8_t> header(const Header& hd) {
  std::vector<std::uint8_t> out(std::begin(kMagic), std::end(kMagic));
  put<std::uint16_t>(out, kVersion);
  put<std::uint32_t>(out, hd.t);
  put<std::uint32_t>(out, hd.h);
  put<std::uint32_t>(out, hd.w);
  put<std::uint8_t>(out, hd.channels);
  put<std::uint8_t>(out, hd.tag);
  put<std::uint16_t>(out, hd.fps);
  return out;
}

Header parse_header(const std::vector<std::uint8_t>& b) {
  if (b.size() < kHeader || std::memcmp(b.data(), kMagic, 4) != 0) throw Error(ErrorCode::kFormat, "not a CWV1 clip");
  std::size_t pos = 4;
  const auto version = get<std::uint16_t>(b, pos);
  if (version != kVersion) throw Error(ErrorCode::kFormat, "unsupported CWV1 version " + std::to_string(version));
  Header hd{};
  hd.t = get<std::uint32_t>(b, pos);
  hd.h = get<std::uint32_t>(b, pos);
  hd.w = get<std::uint32_t>(b, pos);
  hd.channels = get<std::uint8_t>(b, pos);
  hd.tag = get<std::uint8_t>(b, pos);
  hd.fps = get<std::uint16_t>(b, pos);
  if (hd.t == 0 || hd.h == 0 || hd.w == 0 || hd.channels == 0 || hd.fps == 0)
    throw Error(ErrorCode::kFormat, "CWV1 header has a zero extent");
  if (hd.tag > kTagF32) throw Error(ErrorCode::kFormat, "unknown CWV1 dtype tag");
  const std::size_t elems = std::size_t{hd.t} * hd.h * hd.w * hd.channels;
  const std::size_t want = kHeader + elems * (hd.tag == kTagU8 ? 1 : 4);
  if (b.size() != want) throw Error(ErrorCode::kFormat, "CWV1 payload size mismatch");
  return hd;
}

std::vector<std::uint8_t> slurp(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::kIo, "cannot read " + path.string());
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

void spill(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw Error(ErrorCode::kIo, "short write to " + path.string());
}

}  // namespace

std::vector<std::uint8_t> encode(const VideoClip& clip) {
  auto out = header({static_cast<std::uint32_t>(clip.frames), static_cast<std::uint32_t>(clip.height),
                     static_cast<std::uint32_t>(clip.width), static_cast<std::uint8_t>(clip.channels), kTagU8,
                     clip.fps});
  out.insert(out.end(), clip.pixels.begin(), clip.pixels.end());
  return out;
}

VideoClip decode(const std::vector<std::uint8_t>& bytes) {
  const Header hd = parse_header(bytes);
  if (hd.tag != kTagU8) throw Error(ErrorCode::kFormat, "expected a u8 CWV1 clip");
  VideoClip c;
  c.frames = hd.t;
  c.height = hd.h;
  c.width = hd.w;
  c.channels = hd.channels;
  c.fps = hd.fps;
  c.pixels.assign(bytes.begin() + kHeader, bytes.end());
  return c;
}

void write(const std::filesystem::path& path, const VideoClip& clip) { spill(path, encode(clip)); }

VideoClip read(const std::filesystem::path& path) { return decode(slurp(path)); }

void write_f32(const std::filesystem::path& path, const Tensor<float>& frames, std::uint16_t fps) {
  if (frames.rank() != 4) throw Error(ErrorCode::kInvalidShape, "cache tensor must be [T,H,W,C]");
  auto out = header({static_cast<std::uint32_t>(frames.extent(0)), static_cast<std::uint32_t>(frames.extent(1)),
                     static_cast<std::uint32_t>(frames.extent(2)), static_cast<std::uint8_t>(frames.extent(3)),
                     kTagF32, fps});
  const auto d = frames.data();
  const std::size_t off = out.size();
  out.resize(off + d.size() * 4);
  std::memcpy(out.data() + off, d.data(), d.size() * 4);
  spill(path, out);
}

Tensor<float> read_f32(const std::filesystem::path& path) {
  const auto bytes = slurp(path);
  const Header hd = parse_header(bytes);
  if (hd.tag != kTagF32) throw Error(ErrorCode::kFormat, "expected an f32 CWV1 clip");
  std::vector<float> data((bytes.size() - kHeader) / 4);
  std::memcpy(data.data(), bytes.data() + kHeader, data.size() * 4);
  return Tensor<float>(Shape{hd.t, hd.h, hd.w, hd.channels}, std::move(data));
}

}  // namespace cwv

}  // namespace slump
