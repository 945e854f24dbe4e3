#pragma once

// Same-padded 3D cross-correlation on channel-last buffers via chunked
// im2col + gemm. 2D convolution is the kt = 1, T = 1 case.

#include <cstddef>
#include <cstdint>

namespace slump::detail {

struct ConvGeom {
  std::int64_t n, t, h, w, cin;
  std::int64_t kt, kh, kw;
  std::int64_t st, sh, sw;
  std::int64_t cout;
  std::int64_t to, ho, wo;
  std::int64_t pt, ph, pw;  // low-side padding

  std::int64_t patch() const { return kt * kh * kw * cin; }
  std::int64_t out_rows() const { return n * to * ho * wo; }
};

// Output extent ceil(in/stride); low pad = total/2, remainder on the high side.
void same_padding(std::int64_t in, std::int64_t k, std::int64_t stride, std::int64_t& out, std::int64_t& pad_lo);

ConvGeom make_geom(std::int64_t n, std::int64_t t, std::int64_t h, std::int64_t w, std::int64_t cin,
                   std::int64_t kt, std::int64_t kh, std::int64_t kw, std::int64_t st, std::int64_t sh,
                   std::int64_t sw, std::int64_t cout);

// y = conv(x, w) (+ bias when non-null). Kernel layout [kt,kh,kw,cin,cout].
template <typename T>
void conv_forward(const ConvGeom& g, const T* x, const T* w, const T* bias, T* y);

// dx += conv^T(dy, w)
template <typename T>
void conv_backward_data(const ConvGeom& g, const T* dy, const T* w, T* dx);

// dw += x^T dy over patches; db += column sums of dy when non-null.
template <typename T>
void conv_backward_weight(const ConvGeom& g, const T* x, const T* dy, T* dw, T* db);

}  // namespace slump::detail
