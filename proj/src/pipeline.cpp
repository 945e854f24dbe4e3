#include "slump/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace slump {

namespace fs = std::filesystem;

namespace {

constexpr const char* kManifestHeader = "path,slump_cm,split,seed";

std::string shortest(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

template <typename V>
V parse_number(const std::string& s, const std::string& what) {
  V v{};
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
    throw Error(ErrorCode::kFormat, "manifest: bad " + what + " '" + s + "'");
  return v;
}

void check_same_fps_grid(const VideoClip& clip) {
  if (clip.frames < 1 || clip.fps < 1) throw Error(ErrorCode::kInvalidParams, "clip has no frames or zero fps");
}

}  // namespace

void write_manifest(const fs::path& path, const std::vector<ManifestRow>& rows) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out << kManifestHeader << '\n';
  for (const auto& r : rows)
    out << r.path << ',' << shortest(r.slump_cm) << ',' << to_string(r.split) << ',' << r.seed << '\n';
  if (!out) throw Error(ErrorCode::kIo, "write failed for " + path.string());
}

std::vector<ManifestRow> read_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot read manifest " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != kManifestHeader)
    throw Error(ErrorCode::kFormat, "manifest header must be '" + std::string(kManifestHeader) + "'");
  std::vector<ManifestRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split_csv(line);
    if (cells.size() != 4) throw Error(ErrorCode::kFormat, "manifest: expected 4 fields in '" + line + "'");
    ManifestRow r;
    r.path = cells[0];
    r.slump_cm = parse_number<double>(cells[1], "slump");
    try {
      r.split = parse_split(cells[2]);
    } catch (const Error&) {
      throw Error(ErrorCode::kFormat, "manifest: bad split '" + cells[2] + "'");
    }
    r.seed = parse_number<std::uint64_t>(cells[3], "seed");
    rows.push_back(std::move(r));
  }
  return rows;
}

VideoClip mask_roi(const VideoClip& clip, const RoiCircle& roi) {
  const double h = static_cast<double>(clip.height), w = static_cast<double>(clip.width);
  if (!(roi.radius >= 0.0) || !std::isfinite(roi.radius) || !(roi.cy >= 0.0 && roi.cy <= h) ||
      !(roi.cx >= 0.0 && roi.cx <= w))
    throw Error(ErrorCode::kInvalidRoi, "ROI needs a finite radius >= 0 and a center inside the frame");
  VideoClip out = clip;
  for (std::int64_t y = 0; y < clip.height; ++y)
    for (std::int64_t x = 0; x < clip.width; ++x) {
      if (roi.contains(y, x)) continue;
      for (std::int64_t t = 0; t < clip.frames; ++t)
        for (std::int64_t c = 0; c < clip.channels; ++c) out.at(t, y, x, c) = 0;
    }
  return out;
}

VideoClip select_tail(const VideoClip& clip, double seconds) {
  check_same_fps_grid(clip);
  if (!(seconds > 0.0)) throw Error(ErrorCode::kInvalidParams, "tail length must be positive");
  // Guard against 10 * 15 landing a hair above an integer.
  const auto need = static_cast<std::int64_t>(std::ceil(seconds * clip.fps - 1e-9));
  if (clip.frames < need)
    throw Error(ErrorCode::kTooShort, "clip has " + std::to_string(clip.frames) + " frames, tail needs " +
                                          std::to_string(need));
  return clip.slice(clip.frames - need, clip.frames);
}

VideoClip resample_fps(const VideoClip& clip, std::uint16_t target_fps) {
  check_same_fps_grid(clip);
  if (target_fps < 1 || target_fps > clip.fps)
    throw Error(ErrorCode::kInvalidParams, "target fps " + std::to_string(target_fps) + " must be in [1, " +
                                               std::to_string(clip.fps) + "]");
  if (target_fps == clip.fps) return clip;
  const std::int64_t count = clip.frames * target_fps / clip.fps;
  VideoClip out = VideoClip::blank(count, clip.height, clip.width, target_fps, clip.channels);
  const std::size_t fs_ = clip.frame_size();
  for (std::int64_t j = 0; j < count; ++j) {
    auto src = static_cast<std::int64_t>(std::lround(static_cast<double>(j) * clip.fps / target_fps));
    src = std::min(src, clip.frames - 1);
    std::copy_n(clip.pixels.begin() + static_cast<std::ptrdiff_t>(src * fs_), fs_,
                out.pixels.begin() + static_cast<std::ptrdiff_t>(j * fs_));
  }
  return out;
}

std::vector<VideoClip> split_windows(const VideoClip& clip, double seconds) {
  check_same_fps_grid(clip);
  const auto len = static_cast<std::int64_t>(std::lround(seconds * clip.fps));
  if (len < 1) throw Error(ErrorCode::kInvalidParams, "window shorter than one frame");
  const std::int64_t count = clip.frames / len;
  if (count == 0)
    throw Error(ErrorCode::kNoWindow, "clip of " + std::to_string(clip.frames) + " frames has no " +
                                          std::to_string(len) + "-frame window");
  std::vector<VideoClip> out;
  out.reserve(static_cast<std::size_t>(count));
  for (std::int64_t k = 0; k < count; ++k) out.push_back(clip.slice(k * len, (k + 1) * len));
  return out;
}

Tensor<float> prepare(const VideoClip& clip, std::int64_t size) {
  check_same_fps_grid(clip);
  if (size < 1) throw Error(ErrorCode::kInvalidParams, "resize target must be >= 1");
  const std::int64_t t_n = clip.frames, c_n = clip.channels;
  std::vector<float> out(static_cast<std::size_t>(t_n * size * size * c_n));
  // Source coordinate of each destination row/column.
  struct Tap {
    std::int64_t lo, hi;
    double frac;
  };
  auto taps = [](std::int64_t src, std::int64_t dst) {
    std::vector<Tap> v(static_cast<std::size_t>(dst));
    const double scale = static_cast<double>(src) / static_cast<double>(dst);
    for (std::int64_t i = 0; i < dst; ++i) {
      const double s = std::clamp((static_cast<double>(i) + 0.5) * scale - 0.5, 0.0, static_cast<double>(src - 1));
      const auto lo = static_cast<std::int64_t>(std::floor(s));
      v[static_cast<std::size_t>(i)] = {lo, std::min(lo + 1, src - 1), s - static_cast<double>(lo)};
    }
    return v;
  };
  const auto ty = taps(clip.height, size), tx = taps(clip.width, size);
  std::size_t o = 0;
  for (std::int64_t t = 0; t < t_n; ++t)
    for (const Tap& a : ty)
      for (const Tap& b : tx)
        for (std::int64_t c = 0; c < c_n; ++c) {
          const double top = clip.at(t, a.lo, b.lo, c) * (1 - b.frac) + clip.at(t, a.lo, b.hi, c) * b.frac;
          const double bot = clip.at(t, a.hi, b.lo, c) * (1 - b.frac) + clip.at(t, a.hi, b.hi, c) * b.frac;
          out[o++] = static_cast<float>((top * (1 - a.frac) + bot * a.frac) / 255.0);
        }
  return Tensor<float>({t_n, size, size, c_n}, std::move(out));
}

PipelineConfig PipelineConfig::full_scale() { return {}; }

PipelineConfig PipelineConfig::desk() {
  PipelineConfig c;
  c.target_fps = 4;
  c.size = 56;
  c.windows_per_clip = 1;
  return c;
}

PipelineConfig PipelineConfig::by_name(const std::string& name) {
  if (name == "desk") return desk();
  if (name == "paper-shape") return full_scale();
  throw Error(ErrorCode::kConfig, "unknown pipeline preset '" + name + "' (expected desk or paper-shape)");
}

InputShape PipelineConfig::input_shape() const {
  return {std::lround(window_seconds * target_fps), size, size, 3};
}

std::vector<Tensor<float>> process_clip(const VideoClip& clip, const PipelineConfig& cfg) {
  const VideoClip masked = mask_roi(clip, RoiCircle::centered(clip.height, clip.width, cfg.roi_fraction));
  const VideoClip tail = resample_fps(select_tail(masked, cfg.tail_seconds), cfg.target_fps);
  const auto windows = split_windows(tail, cfg.window_seconds);
  const std::size_t keep =
      cfg.windows_per_clip == 0 ? windows.size() : std::min(cfg.windows_per_clip, windows.size());
  std::vector<Tensor<float>> out;
  for (std::size_t k = windows.size() - keep; k < windows.size(); ++k) out.push_back(prepare(windows[k], cfg.size));
  return out;
}

const Dataset& PreparedData::split(Split s) const {
  switch (s) {
    case Split::kTrain:
      return train;
    case Split::kVal:
      return val;
    case Split::kTest:
      return test;
  }
  return train;
}

namespace {

fs::path cache_file(const fs::path& dir, const fs::path& clip, const PipelineConfig& cfg, std::size_t k) {
  std::ostringstream name;
  name << clip.stem().string() << "_t" << shortest(cfg.tail_seconds) << "_f" << cfg.target_fps << "_w"
       << shortest(cfg.window_seconds) << "_s" << cfg.size << "_r" << shortest(cfg.roi_fraction) << "_n" << cfg.windows_per_clip << "_" << k
       << ".cwv";
  return dir / name.str();
}

std::vector<Tensor<float>> load_cached(const fs::path& dir, const fs::path& clip, const PipelineConfig& cfg) {
  std::vector<Tensor<float>> out;
  for (std::size_t k = 0;; ++k) {
    const fs::path f = cache_file(dir, clip, cfg, k);
    if (!fs::exists(f)) break;
    out.push_back(cwv::read_f32(f));
  }
  return out;
}

}  // namespace

PreparedData build_dataset(const fs::path& manifest, const PipelineConfig& cfg,
                           const std::optional<fs::path>& cache_dir) {
  const auto rows = read_manifest(manifest);
  if (rows.empty()) throw Error(ErrorCode::kInvalidParams, "manifest " + manifest.string() + " lists no clips");
  if (cache_dir) fs::create_directories(*cache_dir);
  const fs::path base = manifest.parent_path();
  PreparedData data;
  data.clips = rows.size();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const ManifestRow& r = rows[i];
    const fs::path p = fs::path(r.path).is_absolute() ? fs::path(r.path) : base / r.path;
    std::vector<Tensor<float>> windows;
    try {
      if (cache_dir) windows = load_cached(*cache_dir, p, cfg);
      if (windows.empty()) {
        windows = process_clip(cwv::read(p), cfg);
        if (cache_dir)
          for (std::size_t k = 0; k < windows.size(); ++k)
            cwv::write_f32(cache_file(*cache_dir, p, cfg, k), windows[k], cfg.target_fps);
      }
    } catch (const Error& e) {
      const auto c = e.code();
      if (c != ErrorCode::kTooShort && c != ErrorCode::kNoWindow && c != ErrorCode::kIo && c != ErrorCode::kFormat)
        throw;
      data.skipped.push_back({r.path, e.what()});
      continue;
    }
    Dataset& target = r.split == Split::kTrain ? data.train : (r.split == Split::kVal ? data.val : data.test);
    for (std::size_t k = 0; k < windows.size(); ++k)
      target.samples.push_back({windows[k], r.slump_cm, i, static_cast<std::int64_t>(k)});
  }
  if (static_cast<double>(data.skipped.size()) > cfg.max_skip_fraction * static_cast<double>(rows.size()))
    throw Error(ErrorCode::kIo, std::to_string(data.skipped.size()) + " of " + std::to_string(rows.size()) +
                                    " clips were skipped; first: " + data.skipped.front().path + " (" +
                                    data.skipped.front().reason + ")");
  return data;
}

}  // namespace slump
