#pragma once

// Straight-loop reference computations used as test oracles.

#include <algorithm>
#include <cmath>
#include <vector>

#include "slump/tensor.hpp"

namespace oracle {

inline std::int64_t out_extent(std::int64_t in, std::int64_t s) { return (in + s - 1) / s; }
inline std::int64_t low_pad(std::int64_t in, std::int64_t k, std::int64_t s) {
  return std::max<std::int64_t>((out_extent(in, s) - 1) * s + k - in, 0) / 2;
}

// Same-padded 3D cross-correlation, x [N,T,H,W,Ci], w [kt,kh,kw,Ci,Co].
template <typename T>
std::vector<double> conv3d(const slump::Tensor<T>& x, const slump::Tensor<T>& w, const slump::Tensor<T>& b,
                           std::int64_t st, std::int64_t sh, std::int64_t sw) {
  const auto n_ = x.extent(0), t_ = x.extent(1), h_ = x.extent(2), w_ = x.extent(3), ci = x.extent(4);
  const auto kt = w.extent(0), kh = w.extent(1), kw = w.extent(2), co = w.extent(4);
  const auto to = out_extent(t_, st), ho = out_extent(h_, sh), wo = out_extent(w_, sw);
  const auto pt = low_pad(t_, kt, st), ph = low_pad(h_, kh, sh), pw = low_pad(w_, kw, sw);
  std::vector<double> y(static_cast<std::size_t>(n_ * to * ho * wo * co));
  for (std::int64_t n = 0; n < n_; ++n)
    for (std::int64_t a = 0; a < to; ++a)
      for (std::int64_t i = 0; i < ho; ++i)
        for (std::int64_t j = 0; j < wo; ++j)
          for (std::int64_t o = 0; o < co; ++o) {
            double s = b[o];
            for (std::int64_t dt = 0; dt < kt; ++dt)
              for (std::int64_t di = 0; di < kh; ++di)
                for (std::int64_t dj = 0; dj < kw; ++dj) {
                  const auto tt = a * st - pt + dt, yy = i * sh - ph + di, xx = j * sw - pw + dj;
                  if (tt < 0 || tt >= t_ || yy < 0 || yy >= h_ || xx < 0 || xx >= w_) continue;
                  for (std::int64_t c = 0; c < ci; ++c)
                    s += static_cast<double>(x[(((n * t_ + tt) * h_ + yy) * w_ + xx) * ci + c]) *
                         w[(((dt * kh + di) * kw + dj) * ci + c) * co + o];
                }
            y[static_cast<std::size_t>((((n * to + a) * ho + i) * wo + j) * co + o)] = s;
          }
  return y;
}

// Same-padded 2D cross-correlation on [N,H,W,Ci] with a [k,k,Ci,Co] kernel.
template <typename T>
std::vector<double> conv2d(const slump::Tensor<T>& x, const slump::Tensor<T>& w, const slump::Tensor<T>& b,
                           std::int64_t stride) {
  const slump::Tensor<T> x5({x.extent(0), 1, x.extent(1), x.extent(2), x.extent(3)},
                            std::vector<T>(x.data().begin(), x.data().end()));
  const slump::Tensor<T> w5({1, w.extent(0), w.extent(1), w.extent(2), w.extent(3)},
                            std::vector<T>(w.data().begin(), w.data().end()));
  return conv3d(x5, w5, b, 1, stride, stride);
}

inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

// ConvLSTM recurrence in double, returning the full [N,T,H,W,Ch] sequence.
template <typename T>
std::vector<double> conv_lstm(const slump::Tensor<T>& x, const slump::Tensor<T>& wx, const slump::Tensor<T>& wh,
                              const slump::Tensor<T>& b) {
  const auto n_ = x.extent(0), t_ = x.extent(1), h_ = x.extent(2), w_ = x.extent(3), ci = x.extent(4);
  const auto ch = b.extent(0) / 4;
  const std::size_t plane = static_cast<std::size_t>(h_ * w_ * ch);
  std::vector<double> out(static_cast<std::size_t>(n_ * t_) * plane);
  const slump::Tensor<double> zero_bias({4 * ch});
  const slump::Tensor<double> whd(wh.shape(), std::vector<double>(wh.data().begin(), wh.data().end()));
  for (std::int64_t n = 0; n < n_; ++n) {
    std::vector<double> h(plane, 0.0), c(plane, 0.0);
    for (std::int64_t t = 0; t < t_; ++t) {
      std::vector<double> xt(static_cast<std::size_t>(h_ * w_ * ci));
      for (std::size_t q = 0; q < xt.size(); ++q) xt[q] = x[static_cast<std::size_t>((n * t_ + t)) * xt.size() + q];
      const slump::Tensor<double> xt4({1, h_, w_, ci}, xt);
      const slump::Tensor<double> wxd(wx.shape(), std::vector<double>(wx.data().begin(), wx.data().end()));
      const slump::Tensor<double> bd(b.shape(), std::vector<double>(b.data().begin(), b.data().end()));
      const auto zx = conv2d(xt4, wxd, bd, 1);
      const auto zh = conv2d(slump::Tensor<double>({1, h_, w_, ch}, h), whd, zero_bias, 1);
      for (std::int64_t p = 0; p < h_ * w_; ++p)
        for (std::int64_t k = 0; k < ch; ++k) {
          auto z = [&](int gate) {
            const auto q = static_cast<std::size_t>(p * 4 * ch + gate * ch + k);
            return zx[q] + zh[q];
          };
          const double ig = sigmoid(z(0)), fg = sigmoid(z(1)), gg = std::tanh(z(2)), og = sigmoid(z(3));
          const auto q = static_cast<std::size_t>(p * ch + k);
          c[q] = fg * c[q] + ig * gg;
          h[q] = og * std::tanh(c[q]);
        }
      std::copy(h.begin(), h.end(), out.begin() + static_cast<std::ptrdiff_t>((n * t_ + t) * plane));
    }
  }
  return out;
}

}  // namespace oracle
