#include "conv_engine.hpp"

#include <algorithm>
#include <vector>

#include "slump/error.hpp"
#include "slump/kernels/kernels.hpp"

namespace slump::detail {

namespace {

// Upper bound on im2col scratch, in elements.
constexpr std::int64_t kChunkElems = std::int64_t{1} << 21;

std::int64_t chunk_rows(const ConvGeom& g) { return std::max<std::int64_t>(1, kChunkElems / g.patch()); }

// Rows [r0, r1) of the patch matrix; row = flattened (n, to, ho, wo).
template <typename T>
void im2col(const ConvGeom& g, const T* x, std::int64_t r0, std::int64_t r1, T* cols) {
  const std::int64_t patch = g.patch();
  for (std::int64_t r = r0; r < r1; ++r) {
    std::int64_t q = r;
    const std::int64_t ow = q % g.wo;
    q /= g.wo;
    const std::int64_t oh = q % g.ho;
    q /= g.ho;
    const std::int64_t ot = q % g.to;
    const std::int64_t n = q / g.to;
    T* dst = cols + (r - r0) * patch;
    for (std::int64_t dt = 0; dt < g.kt; ++dt) {
      const std::int64_t it = ot * g.st + dt - g.pt;
      for (std::int64_t dh = 0; dh < g.kh; ++dh) {
        const std::int64_t ih = oh * g.sh + dh - g.ph;
        for (std::int64_t dw = 0; dw < g.kw; ++dw, dst += g.cin) {
          const std::int64_t iw = ow * g.sw + dw - g.pw;
          if (it < 0 || it >= g.t || ih < 0 || ih >= g.h || iw < 0 || iw >= g.w) {
            std::fill(dst, dst + g.cin, T(0));
            continue;
          }
          const T* src = x + (((n * g.t + it) * g.h + ih) * g.w + iw) * g.cin;
          std::copy(src, src + g.cin, dst);
        }
      }
    }
  }
}

template <typename T>
void col2im_add(const ConvGeom& g, const T* cols, std::int64_t r0, std::int64_t r1, T* dx) {
  const std::int64_t patch = g.patch();
  for (std::int64_t r = r0; r < r1; ++r) {
    std::int64_t q = r;
    const std::int64_t ow = q % g.wo;
    q /= g.wo;
    const std::int64_t oh = q % g.ho;
    q /= g.ho;
    const std::int64_t ot = q % g.to;
    const std::int64_t n = q / g.to;
    const T* src = cols + (r - r0) * patch;
    for (std::int64_t dt = 0; dt < g.kt; ++dt) {
      const std::int64_t it = ot * g.st + dt - g.pt;
      for (std::int64_t dh = 0; dh < g.kh; ++dh) {
        const std::int64_t ih = oh * g.sh + dh - g.ph;
        for (std::int64_t dw = 0; dw < g.kw; ++dw, src += g.cin) {
          const std::int64_t iw = ow * g.sw + dw - g.pw;
          if (it < 0 || it >= g.t || ih < 0 || ih >= g.h || iw < 0 || iw >= g.w) continue;
          T* dst = dx + (((n * g.t + it) * g.h + ih) * g.w + iw) * g.cin;
          for (std::int64_t c = 0; c < g.cin; ++c) dst[c] += src[c];
        }
      }
    }
  }
}

}  // namespace

void same_padding(std::int64_t in, std::int64_t k, std::int64_t stride, std::int64_t& out, std::int64_t& pad_lo) {
  out = (in + stride - 1) / stride;
  const std::int64_t total = std::max<std::int64_t>((out - 1) * stride + k - in, 0);
  pad_lo = total / 2;
}

ConvGeom make_geom(std::int64_t n, std::int64_t t, std::int64_t h, std::int64_t w, std::int64_t cin,
                   std::int64_t kt, std::int64_t kh, std::int64_t kw, std::int64_t st, std::int64_t sh,
                   std::int64_t sw, std::int64_t cout) {
  if (st < 1 || sh < 1 || sw < 1) throw Error(ErrorCode::kInvalidParams, "stride must be >= 1");
  ConvGeom g{n, t, h, w, cin, kt, kh, kw, st, sh, sw, cout, 0, 0, 0, 0, 0, 0};
  same_padding(t, kt, st, g.to, g.pt);
  same_padding(h, kh, sh, g.ho, g.ph);
  same_padding(w, kw, sw, g.wo, g.pw);
  return g;
}

template <typename T>
void conv_forward(const ConvGeom& g, const T* x, const T* w, const T* bias, T* y) {
  const std::int64_t rows = g.out_rows();
  const std::int64_t patch = g.patch();
  const std::int64_t step = chunk_rows(g);
  std::vector<T> cols(static_cast<std::size_t>(std::min(rows, step) * patch));
  for (std::int64_t r0 = 0; r0 < rows; r0 += step) {
    const std::int64_t r1 = std::min(rows, r0 + step);
    im2col(g, x, r0, r1, cols.data());
    kernels::gemm<T>(false, false, static_cast<std::size_t>(r1 - r0), static_cast<std::size_t>(g.cout),
                     static_cast<std::size_t>(patch), cols.data(), static_cast<std::size_t>(patch), w,
                     static_cast<std::size_t>(g.cout), T(0), y + r0 * g.cout, static_cast<std::size_t>(g.cout));
  }
  if (bias) {
    for (std::int64_t r = 0; r < rows; ++r) {
      T* yr = y + r * g.cout;
      for (std::int64_t c = 0; c < g.cout; ++c) yr[c] += bias[c];
    }
  }
}

template <typename T>
void conv_backward_data(const ConvGeom& g, const T* dy, const T* w, T* dx) {
  const std::int64_t rows = g.out_rows();
  const std::int64_t patch = g.patch();
  const std::int64_t step = chunk_rows(g);
  std::vector<T> cols(static_cast<std::size_t>(std::min(rows, step) * patch));
  for (std::int64_t r0 = 0; r0 < rows; r0 += step) {
    const std::int64_t r1 = std::min(rows, r0 + step);
    kernels::gemm<T>(false, true, static_cast<std::size_t>(r1 - r0), static_cast<std::size_t>(patch),
                     static_cast<std::size_t>(g.cout), dy + r0 * g.cout, static_cast<std::size_t>(g.cout), w,
                     static_cast<std::size_t>(g.cout), T(0), cols.data(), static_cast<std::size_t>(patch));
    col2im_add(g, cols.data(), r0, r1, dx);
  }
}

template <typename T>
void conv_backward_weight(const ConvGeom& g, const T* x, const T* dy, T* dw, T* db) {
  const std::int64_t rows = g.out_rows();
  const std::int64_t patch = g.patch();
  const std::int64_t step = chunk_rows(g);
  std::vector<T> cols(static_cast<std::size_t>(std::min(rows, step) * patch));
  for (std::int64_t r0 = 0; r0 < rows; r0 += step) {
    const std::int64_t r1 = std::min(rows, r0 + step);
    im2col(g, x, r0, r1, cols.data());
    kernels::gemm<T>(true, false, static_cast<std::size_t>(patch), static_cast<std::size_t>(g.cout),
                     static_cast<std::size_t>(r1 - r0), cols.data(), static_cast<std::size_t>(patch),
                     dy + r0 * g.cout, static_cast<std::size_t>(g.cout), T(1), dw, static_cast<std::size_t>(g.cout));
  }
  if (db) {
    for (std::int64_t r = 0; r < rows; ++r) {
      const T* dyr = dy + r * g.cout;
      for (std::int64_t c = 0; c < g.cout; ++c) db[c] += dyr[c];
    }
  }
}

template void conv_forward<float>(const ConvGeom&, const float*, const float*, const float*, float*);
template void conv_forward<double>(const ConvGeom&, const double*, const double*, const double*, double*);
template void conv_backward_data<float>(const ConvGeom&, const float*, const float*, float*);
template void conv_backward_data<double>(const ConvGeom&, const double*, const double*, double*);
template void conv_backward_weight<float>(const ConvGeom&, const float*, const float*, float*, float*);
template void conv_backward_weight<double>(const ConvGeom&, const double*, const double*, double*, double*);

}  // namespace slump::detail
