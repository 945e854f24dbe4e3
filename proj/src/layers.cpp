#include "slump/layers.hpp"

#include <algorithm>
#include <cmath>

#include "conv_engine.hpp"

namespace slump {

using detail::ConvGeom;

template <typename T>
Conv2DLayer<T> Conv2DLayer<T>::make(std::int64_t k, std::int64_t cin, std::int64_t cout, RngStream& rng,
                                    std::int64_t stride) {
  if (k < 1 || k % 2 == 0) throw Error(ErrorCode::kInvalidParams, "conv kernel size must be odd");
  Conv2DLayer l;
  l.kernel = create<T>({k, k, cin, cout}, Init::he_uniform(k * k * cin), rng);
  l.bias = zeros<T>({cout});
  l.stride = stride;
  return l;
}

template <typename T>
Conv3DLayer<T> Conv3DLayer<T>::make(std::int64_t kt, std::int64_t k, std::int64_t cin, std::int64_t cout,
                                    RngStream& rng) {
  if (k < 1 || k % 2 == 0 || kt < 1 || kt % 2 == 0)
    throw Error(ErrorCode::kInvalidParams, "conv kernel size must be odd");
  Conv3DLayer l;
  l.kernel = create<T>({kt, k, k, cin, cout}, Init::he_uniform(kt * k * k * cin), rng);
  l.bias = zeros<T>({cout});
  return l;
}

template <typename T>
ConvLSTM2DLayer<T> ConvLSTM2DLayer<T>::make(std::int64_t k, std::int64_t cin, std::int64_t ch, RngStream& rng) {
  if (k < 1 || k % 2 == 0) throw Error(ErrorCode::kInvalidParams, "conv kernel size must be odd");
  ConvLSTM2DLayer l;
  l.input_kernel = create<T>({k, k, cin, 4 * ch}, Init::he_uniform(k * k * cin), rng);
  l.recurrent_kernel = create<T>({k, k, ch, 4 * ch}, Init::he_uniform(k * k * ch), rng);
  l.bias = zeros<T>({4 * ch});
  return l;
}

template <typename T>
BatchNormLayer<T> BatchNormLayer<T>::make(std::int64_t channels) {
  BatchNormLayer l;
  RngStream unused;
  l.gamma = create<T>({channels}, Init::ones(), unused);
  l.beta = zeros<T>({channels});
  l.moving_mean = zeros<T>({channels});
  l.moving_var = create<T>({channels}, Init::ones(), unused);
  l.update_count = zeros<T>({1});
  return l;
}

template <typename T>
DenseLayer<T> DenseLayer<T>::make(std::int64_t in, std::int64_t out, RngStream& rng) {
  DenseLayer l;
  l.weights = create<T>({in, out}, Init::glorot_uniform(in, out), rng);
  l.bias = zeros<T>({out});
  return l;
}

template struct Conv2DLayer<float>;
template struct Conv2DLayer<double>;
template struct Conv3DLayer<float>;
template struct Conv3DLayer<double>;
template struct ConvLSTM2DLayer<float>;
template struct ConvLSTM2DLayer<double>;
template struct BatchNormLayer<float>;
template struct BatchNormLayer<double>;
template struct DenseLayer<float>;
template struct DenseLayer<double>;

namespace {

template <typename T>
Tensor<T> conv_op(const char* name, const Tensor<T>& x, const Tensor<T>& kernel, const Tensor<T>& bias,
                  const ConvGeom& g, Shape out_shape) {
  Tensor<T> out(std::move(out_shape));
  detail::conv_forward<T>(g, x.data().data(), kernel.data().data(), bias.data().data(), out.mutable_data().data());
  record<T>(out, name, {x, kernel, bias}, [x, kernel, bias, g](std::span<const T> gy) {
    std::vector<T> gx, gk, gb;
    if (x.traced()) {
      gx.assign(x.numel(), T(0));
      detail::conv_backward_data<T>(g, gy.data(), kernel.data().data(), gx.data());
    }
    if (kernel.traced() || bias.traced()) {
      gk.assign(kernel.numel(), T(0));
      gb.assign(bias.numel(), T(0));
      detail::conv_backward_weight<T>(g, x.data().data(), gy.data(), gk.data(), gb.data());
    }
    return typename TapeNode<T>::Grads{std::move(gx), std::move(gk), std::move(gb)};
  });
  return out;
}

template <typename T>
T sigmoid(T z) {
  return T(1) / (T(1) + std::exp(-z));
}

}  // namespace

template <typename T>
Tensor<T> conv2d_forward(const Tensor<T>& x, const Conv2DLayer<T>& layer) {
  const auto& k = layer.kernel;
  if (x.rank() != 4) throw Error(ErrorCode::kShapeMismatch, "conv2d expects [N,H,W,C], got " + shape_str(x.shape()));
  if (k.rank() != 4 || x.extent(3) != k.extent(2))
    throw Error(ErrorCode::kShapeMismatch,
                "conv2d channel mismatch: input " + shape_str(x.shape()) + " kernel " + shape_str(k.shape()));
  const auto g = detail::make_geom(x.extent(0), 1, x.extent(1), x.extent(2), x.extent(3), 1, k.extent(0),
                                   k.extent(1), 1, layer.stride, layer.stride, k.extent(3));
  return conv_op<T>("conv2d", x, k, layer.bias, g, {g.n, g.ho, g.wo, g.cout});
}

template <typename T>
Tensor<T> time_distributed(const Tensor<T>& x, const std::function<Tensor<T>(const Tensor<T>&)>& inner) {
  if (x.rank() < 3) throw Error(ErrorCode::kShapeMismatch, "time_distributed expects [N,T,...]");
  const std::int64_t n = x.extent(0);
  const std::int64_t t = x.extent(1);
  Shape folded{n * t};
  folded.insert(folded.end(), x.shape().begin() + 2, x.shape().end());
  const Tensor<T> y = inner(reshape(x, folded));
  if (y.rank() < 1 || y.extent(0) != n * t)
    throw Error(ErrorCode::kShapeMismatch, "time_distributed inner changed the batch extent");
  Shape unfolded{n, t};
  unfolded.insert(unfolded.end(), y.shape().begin() + 1, y.shape().end());
  return reshape(y, unfolded);
}

template <typename T>
Tensor<T> conv3d_forward(const Tensor<T>& x, const Conv3DLayer<T>& layer) {
  const auto& k = layer.kernel;
  if (x.rank() != 5) throw Error(ErrorCode::kShapeMismatch, "conv3d expects [N,T,H,W,C], got " + shape_str(x.shape()));
  if (k.rank() != 5 || x.extent(4) != k.extent(3))
    throw Error(ErrorCode::kShapeMismatch,
                "conv3d channel mismatch: input " + shape_str(x.shape()) + " kernel " + shape_str(k.shape()));
  const auto& s = layer.stride;
  const auto g = detail::make_geom(x.extent(0), x.extent(1), x.extent(2), x.extent(3), x.extent(4), k.extent(0),
                                   k.extent(1), k.extent(2), s[0], s[1], s[2], k.extent(4));
  return conv_op<T>("conv3d", x, k, layer.bias, g, {g.n, g.to, g.ho, g.wo, g.cout});
}

namespace {

// Saved forward state of one ConvLSTM call, time-major.
template <typename T>
struct LstmTape {
  std::int64_t n, steps, h, w, cin, ch;
  std::vector<T> x_tm;   // [T,N,H,W,Cin]
  std::vector<T> gates;  // [T,N,H,W,4Ch] post-activation (i,f,g,o)
  std::vector<T> cell;   // [T,N,H,W,Ch]
  std::vector<T> hid;    // [T,N,H,W,Ch]
};

}  // namespace

template <typename T>
Tensor<T> conv_lstm2d_forward(const Tensor<T>& x, const ConvLSTM2DLayer<T>& layer, bool return_sequences) {
  const auto& wx = layer.input_kernel;
  const auto& wh = layer.recurrent_kernel;
  if (x.rank() != 5)
    throw Error(ErrorCode::kShapeMismatch, "conv_lstm2d expects [N,T,H,W,C], got " + shape_str(x.shape()));
  const std::int64_t ch = layer.hidden();
  if (wx.rank() != 4 || x.extent(4) != wx.extent(2) || wx.extent(3) != 4 * ch || wh.rank() != 4 ||
      wh.extent(2) != ch || wh.extent(3) != 4 * ch || wx.extent(0) != wh.extent(0))
    throw Error(ErrorCode::kShapeMismatch,
                "conv_lstm2d channel mismatch: input " + shape_str(x.shape()) + " kernel " + shape_str(wx.shape()));

  auto tape = std::make_shared<LstmTape<T>>();
  LstmTape<T>& tp = *tape;
  tp.n = x.extent(0);
  tp.steps = x.extent(1);
  tp.h = x.extent(2);
  tp.w = x.extent(3);
  tp.cin = x.extent(4);
  tp.ch = ch;
  const std::int64_t k = wx.extent(0);
  const std::int64_t pix = tp.h * tp.w;
  const std::int64_t frame_in = pix * tp.cin;
  const std::int64_t P = tp.n * pix;  // pixels per time step
  const std::int64_t g4 = 4 * ch;

  tp.x_tm.resize(x.numel());
  const auto xd = x.data();
  for (std::int64_t t = 0; t < tp.steps; ++t)
    for (std::int64_t b = 0; b < tp.n; ++b)
      std::copy_n(xd.begin() + (b * tp.steps + t) * frame_in, frame_in, tp.x_tm.begin() + (t * tp.n + b) * frame_in);

  const auto gx = detail::make_geom(tp.steps * tp.n, 1, tp.h, tp.w, tp.cin, 1, k, k, 1, 1, 1, g4);
  const auto gh = detail::make_geom(tp.n, 1, tp.h, tp.w, ch, 1, k, k, 1, 1, 1, g4);
  tp.gates.resize(static_cast<std::size_t>(tp.steps * P * g4));
  detail::conv_forward<T>(gx, tp.x_tm.data(), wx.data().data(), layer.bias.data().data(), tp.gates.data());

  tp.cell.assign(static_cast<std::size_t>(tp.steps * P * ch), T(0));
  tp.hid.assign(static_cast<std::size_t>(tp.steps * P * ch), T(0));
  std::vector<T> rec(static_cast<std::size_t>(P * g4));
  for (std::int64_t t = 0; t < tp.steps; ++t) {
    T* z = tp.gates.data() + t * P * g4;
    if (t > 0) {
      detail::conv_forward<T>(gh, tp.hid.data() + (t - 1) * P * ch, wh.data().data(), nullptr, rec.data());
      for (std::size_t i = 0; i < rec.size(); ++i) z[i] += rec[i];
    }
    const T* c_prev = t > 0 ? tp.cell.data() + (t - 1) * P * ch : nullptr;
    T* c = tp.cell.data() + t * P * ch;
    T* hcur = tp.hid.data() + t * P * ch;
    for (std::int64_t p = 0; p < P; ++p) {
      T* zp = z + p * g4;
      for (std::int64_t j = 0; j < ch; ++j) {
        const T ig = sigmoid(zp[j]);
        const T fg = sigmoid(zp[ch + j]);
        const T gg = std::tanh(zp[2 * ch + j]);
        const T og = sigmoid(zp[3 * ch + j]);
        zp[j] = ig;
        zp[ch + j] = fg;
        zp[2 * ch + j] = gg;
        zp[3 * ch + j] = og;
        const T cp = c_prev ? c_prev[p * ch + j] : T(0);
        const T cv = fg * cp + ig * gg;
        c[p * ch + j] = cv;
        hcur[p * ch + j] = og * std::tanh(cv);
      }
    }
  }

  const std::int64_t frame_out = pix * ch;
  Tensor<T> out = return_sequences ? Tensor<T>(Shape{tp.n, tp.steps, tp.h, tp.w, ch})
                                   : Tensor<T>(Shape{tp.n, tp.h, tp.w, ch});
  auto od = out.mutable_data();
  if (return_sequences) {
    for (std::int64_t t = 0; t < tp.steps; ++t)
      for (std::int64_t b = 0; b < tp.n; ++b)
        std::copy_n(tp.hid.begin() + (t * tp.n + b) * frame_out, frame_out, od.begin() + (b * tp.steps + t) * frame_out);
  } else {
    std::copy_n(tp.hid.begin() + (tp.steps - 1) * P * ch, P * ch, od.begin());
  }

  if (!grad_enabled()) return out;
  record<T>(out, "conv_lstm2d", {x, wx, wh, layer.bias},
            [tape, x, wx, wh, bias = layer.bias, return_sequences, gx, gh](std::span<const T> gy) {
              const LstmTape<T>& tp = *tape;
              const std::int64_t ch = tp.ch;
              const std::int64_t g4 = 4 * ch;
              const std::int64_t pix = tp.h * tp.w;
              const std::int64_t P = tp.n * pix;
              const std::int64_t frame_out = pix * ch;
              std::vector<T> dz(static_cast<std::size_t>(tp.steps * P * g4));
              std::vector<T> dh_next(static_cast<std::size_t>(P * ch), T(0));
              std::vector<T> dc_next(static_cast<std::size_t>(P * ch), T(0));
              std::vector<T> dh(static_cast<std::size_t>(P * ch));
              std::vector<T> dwh(wh.numel(), T(0));
              for (std::int64_t t = tp.steps - 1; t >= 0; --t) {
                std::copy(dh_next.begin(), dh_next.end(), dh.begin());
                if (return_sequences) {
                  for (std::int64_t b = 0; b < tp.n; ++b) {
                    const T* src = gy.data() + (b * tp.steps + t) * frame_out;
                    T* dst = dh.data() + b * frame_out;
                    for (std::int64_t i = 0; i < frame_out; ++i) dst[i] += src[i];
                  }
                } else if (t == tp.steps - 1) {
                  for (std::int64_t i = 0; i < P * ch; ++i) dh[i] += gy[i];
                }
                const T* gates = tp.gates.data() + t * P * g4;
                const T* c = tp.cell.data() + t * P * ch;
                const T* c_prev = t > 0 ? tp.cell.data() + (t - 1) * P * ch : nullptr;
                T* dzt = dz.data() + t * P * g4;
                for (std::int64_t p = 0; p < P; ++p) {
                  const T* gp = gates + p * g4;
                  T* dzp = dzt + p * g4;
                  for (std::int64_t j = 0; j < ch; ++j) {
                    const std::int64_t q = p * ch + j;
                    const T ig = gp[j], fg = gp[ch + j], gg = gp[2 * ch + j], og = gp[3 * ch + j];
                    const T tc = std::tanh(c[q]);
                    const T dhv = dh[q];
                    const T d_o = dhv * tc;
                    const T dc = dc_next[q] + dhv * og * (T(1) - tc * tc);
                    const T cp = c_prev ? c_prev[q] : T(0);
                    dzp[j] = dc * gg * ig * (T(1) - ig);
                    dzp[ch + j] = dc * cp * fg * (T(1) - fg);
                    dzp[2 * ch + j] = dc * ig * (T(1) - gg * gg);
                    dzp[3 * ch + j] = d_o * og * (T(1) - og);
                    dc_next[q] = dc * fg;
                  }
                }
                std::fill(dh_next.begin(), dh_next.end(), T(0));
                if (t > 0) {
                  const T* h_prev = tp.hid.data() + (t - 1) * P * ch;
                  if (wh.traced()) detail::conv_backward_weight<T>(gh, h_prev, dzt, dwh.data(), nullptr);
                  detail::conv_backward_data<T>(gh, dzt, wh.data().data(), dh_next.data());
                }
              }
              std::vector<T> gwx, gb, gx_out;
              if (wx.traced() || bias.traced()) {
                gwx.assign(wx.numel(), T(0));
                gb.assign(bias.numel(), T(0));
                detail::conv_backward_weight<T>(gx, tp.x_tm.data(), dz.data(), gwx.data(), gb.data());
              }
              if (x.traced()) {
                std::vector<T> dx_tm(tp.x_tm.size(), T(0));
                detail::conv_backward_data<T>(gx, dz.data(), wx.data().data(), dx_tm.data());
                gx_out.resize(dx_tm.size());
                const std::int64_t frame_in = pix * tp.cin;
                for (std::int64_t t = 0; t < tp.steps; ++t)
                  for (std::int64_t b = 0; b < tp.n; ++b)
                    std::copy_n(dx_tm.begin() + (t * tp.n + b) * frame_in, frame_in,
                                gx_out.begin() + (b * tp.steps + t) * frame_in);
              }
              if (!wh.traced()) dwh.clear();
              return typename TapeNode<T>::Grads{std::move(gx_out), std::move(gwx), std::move(dwh), std::move(gb)};
            });
  return out;
}

template <typename T>
Tensor<T> batchnorm_forward(const Tensor<T>& x, BatchNormLayer<T>& layer, Mode mode) {
  if (x.rank() < 1) throw Error(ErrorCode::kShapeMismatch, "batchnorm needs a channel axis");
  const std::int64_t c = x.extent(x.rank() - 1);
  if (layer.gamma.numel() != static_cast<std::size_t>(c))
    throw Error(ErrorCode::kShapeMismatch, "batchnorm expects " + std::to_string(layer.gamma.numel()) +
                                               " channels, got " + shape_str(x.shape()));
  const std::size_t cc = static_cast<std::size_t>(c);
  const std::size_t m = x.numel() / cc;
  const auto xd = x.data();
  std::vector<double> mu(cc, 0.0), inv_std(cc, 0.0);
  if (mode == Mode::kTrain) {
    if (m < 2) throw Error(ErrorCode::kDegenerateBatch, "train-mode batchnorm needs >= 2 elements per channel");
    std::vector<double> var(cc, 0.0);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < cc; ++j) mu[j] += xd[i * cc + j];
    for (std::size_t j = 0; j < cc; ++j) mu[j] /= static_cast<double>(m);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < cc; ++j) {
        const double d = xd[i * cc + j] - mu[j];
        var[j] += d * d;
      }
    auto mm = layer.moving_mean.mutable_data();
    auto mv = layer.moving_var.mutable_data();
    double rate = 1.0 - layer.momentum;
    if (layer.debias) {
      auto count = layer.update_count.mutable_data();
      count[0] += T(1);
      rate /= 1.0 - std::pow(layer.momentum, static_cast<double>(count[0]));
    }
    for (std::size_t j = 0; j < cc; ++j) {
      var[j] /= static_cast<double>(m);
      inv_std[j] = 1.0 / std::sqrt(var[j] + layer.epsilon);
      if (layer.debias) {
        mm[j] = static_cast<T>(mm[j] + rate * (mu[j] - mm[j]));
        mv[j] = static_cast<T>(mv[j] + rate * (var[j] - mv[j]));
      } else {
        mm[j] = static_cast<T>(layer.momentum * mm[j] + rate * mu[j]);
        mv[j] = static_cast<T>(layer.momentum * mv[j] + rate * var[j]);
      }
    }
  } else {
    const auto mm = layer.moving_mean.data();
    const auto mv = layer.moving_var.data();
    for (std::size_t j = 0; j < cc; ++j) {
      mu[j] = mm[j];
      inv_std[j] = 1.0 / std::sqrt(static_cast<double>(mv[j]) + layer.epsilon);
    }
  }
  Tensor<T> out(x.shape());
  auto od = out.mutable_data();
  std::vector<T> xhat(x.numel());
  const auto gm = layer.gamma.data();
  const auto bt = layer.beta.data();
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < cc; ++j) {
      const std::size_t q = i * cc + j;
      xhat[q] = static_cast<T>((xd[q] - mu[j]) * inv_std[j]);
      od[q] = gm[j] * xhat[q] + bt[j];
    }
  const bool train = mode == Mode::kTrain;
  record<T>(out, "batchnorm", {x, layer.gamma, layer.beta},
            [x, gamma = layer.gamma, beta = layer.beta, xhat = std::move(xhat), inv_std, m, cc,
             train](std::span<const T> g) {
              std::vector<double> sum_g(cc, 0.0), sum_gx(cc, 0.0);
              for (std::size_t i = 0; i < m; ++i)
                for (std::size_t j = 0; j < cc; ++j) {
                  const std::size_t q = i * cc + j;
                  sum_g[j] += g[q];
                  sum_gx[j] += static_cast<double>(g[q]) * xhat[q];
                }
              std::vector<T> gx, gg, gb;
              if (x.traced()) {
                gx.resize(x.numel());
                const auto gm = gamma.data();
                const double inv_m = 1.0 / static_cast<double>(m);
                for (std::size_t i = 0; i < m; ++i)
                  for (std::size_t j = 0; j < cc; ++j) {
                    const std::size_t q = i * cc + j;
                    const double scale = gm[j] * inv_std[j];
                    gx[q] = train ? static_cast<T>(scale * (g[q] - sum_g[j] * inv_m - xhat[q] * sum_gx[j] * inv_m))
                                  : static_cast<T>(scale * g[q]);
                  }
              }
              if (gamma.traced()) {
                gg.resize(cc);
                for (std::size_t j = 0; j < cc; ++j) gg[j] = static_cast<T>(sum_gx[j]);
              }
              if (beta.traced()) {
                gb.resize(cc);
                for (std::size_t j = 0; j < cc; ++j) gb[j] = static_cast<T>(sum_g[j]);
              }
              return typename TapeNode<T>::Grads{std::move(gx), std::move(gg), std::move(gb)};
            });
  return out;
}

namespace {

template <typename T>
Tensor<T> pool_impl(const char* name, const Tensor<T>& x, std::int64_t n, std::int64_t t, std::int64_t h,
                    std::int64_t w, std::int64_t c, std::array<std::int64_t, 3> win, Shape out_shape) {
  if (win[0] < 1 || win[1] < 1 || win[2] < 1 || t < win[0] || h < win[1] || w < win[2])
    throw Error(ErrorCode::kInvalidShape, std::string(name) + ": extent smaller than window for " + shape_str(x.shape()));
  const std::int64_t to = t / win[0], ho = h / win[1], wo = w / win[2];
  Tensor<T> out(std::move(out_shape));
  auto od = out.mutable_data();
  std::vector<std::size_t> argmax(od.size());
  const auto xd = x.data();
  std::size_t q = 0;
  for (std::int64_t b = 0; b < n; ++b)
    for (std::int64_t ot = 0; ot < to; ++ot)
      for (std::int64_t oh = 0; oh < ho; ++oh)
        for (std::int64_t ow = 0; ow < wo; ++ow)
          for (std::int64_t ci = 0; ci < c; ++ci, ++q) {
            std::size_t best = 0;
            bool first = true;
            for (std::int64_t dt = 0; dt < win[0]; ++dt)
              for (std::int64_t dh = 0; dh < win[1]; ++dh)
                for (std::int64_t dw = 0; dw < win[2]; ++dw) {
                  const std::size_t idx = static_cast<std::size_t>(
                      (((b * t + ot * win[0] + dt) * h + oh * win[1] + dh) * w + ow * win[2] + dw) * c + ci);
                  if (first || xd[idx] > xd[best]) {
                    best = idx;
                    first = false;
                  }
                }
            argmax[q] = best;
            od[q] = xd[best];
          }
  record<T>(out, name, {x}, [argmax = std::move(argmax), size = x.numel()](std::span<const T> g) {
    std::vector<T> gx(size, T(0));
    for (std::size_t i = 0; i < argmax.size(); ++i) gx[argmax[i]] += g[i];
    return typename TapeNode<T>::Grads{std::move(gx)};
  });
  return out;
}

}  // namespace

template <typename T>
Tensor<T> maxpool3d(const Tensor<T>& x, std::array<std::int64_t, 3> window) {
  if (x.rank() != 5) throw Error(ErrorCode::kInvalidShape, "maxpool3d expects [N,T,H,W,C]");
  const auto& s = x.shape();
  const Shape out{s[0], s[1] / std::max<std::int64_t>(1, window[0]), s[2] / std::max<std::int64_t>(1, window[1]),
                  s[3] / std::max<std::int64_t>(1, window[2]), s[4]};
  return pool_impl<T>("maxpool3d", x, s[0], s[1], s[2], s[3], s[4], window, out);
}

template <typename T>
Tensor<T> maxpool2d(const Tensor<T>& x) {
  if (x.rank() != 4) throw Error(ErrorCode::kInvalidShape, "maxpool2d expects [N,H,W,C]");
  const auto& s = x.shape();
  return pool_impl<T>("maxpool2d", x, s[0], 1, s[1], s[2], s[3], {1, 2, 2}, Shape{s[0], s[1] / 2, s[2] / 2, s[3]});
}

template <typename T>
Tensor<T> global_avg_pool(const Tensor<T>& x) {
  if (x.rank() < 2) throw Error(ErrorCode::kInvalidShape, "global_avg_pool expects [N,...,C]");
  const std::int64_t n = x.extent(0);
  const std::int64_t c = x.extent(x.rank() - 1);
  const std::int64_t s = static_cast<std::int64_t>(x.numel()) / (n * c);
  return mean(reshape(x, {n, s, c}), {1});
}

template <typename T>
Tensor<T> dense(const Tensor<T>& x, const DenseLayer<T>& layer) {
  if (x.rank() != 2 || layer.weights.rank() != 2 || x.extent(1) != layer.weights.extent(0))
    throw Error(ErrorCode::kShapeMismatch,
                "dense input " + shape_str(x.shape()) + " vs weights " + shape_str(layer.weights.shape()));
  return add(matmul(x, layer.weights), layer.bias);
}

#define SLUMP_INSTANTIATE_LAYERS(T)                                                                      \
  template Tensor<T> conv2d_forward<T>(const Tensor<T>&, const Conv2DLayer<T>&);                         \
  template Tensor<T> time_distributed<T>(const Tensor<T>&, const std::function<Tensor<T>(const Tensor<T>&)>&); \
  template Tensor<T> conv3d_forward<T>(const Tensor<T>&, const Conv3DLayer<T>&);                         \
  template Tensor<T> conv_lstm2d_forward<T>(const Tensor<T>&, const ConvLSTM2DLayer<T>&, bool);          \
  template Tensor<T> batchnorm_forward<T>(const Tensor<T>&, BatchNormLayer<T>&, Mode);                   \
  template Tensor<T> maxpool3d<T>(const Tensor<T>&, std::array<std::int64_t, 3>);                        \
  template Tensor<T> maxpool2d<T>(const Tensor<T>&);                                                     \
  template Tensor<T> global_avg_pool<T>(const Tensor<T>&);                                               \
  template Tensor<T> dense<T>(const Tensor<T>&, const DenseLayer<T>&);

SLUMP_INSTANTIATE_LAYERS(float)
SLUMP_INSTANTIATE_LAYERS(double)

}  // namespace slump
