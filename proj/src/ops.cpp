#include "slump/ops.hpp"

#include <algorithm>
#include <cmath>

#include "slump/kernels/kernels.hpp"

namespace slump {

double Init::bound() const {
  switch (kind) {
    case Kind::kHeUniform: return std::sqrt(6.0 / static_cast<double>(fan_in));
    case Kind::kGlorotUniform: return std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    default: return 0.0;
  }
}

template <typename T>
Tensor<T> create(const Shape& shape, const Init& init, RngStream& rng) {
  Tensor<T> t(shape);
  auto d = t.mutable_data();
  switch (init.kind) {
    case Init::Kind::kZeros: break;
    case Init::Kind::kOnes: std::fill(d.begin(), d.end(), T(1)); break;
    case Init::Kind::kUniform:
      for (auto& v : d) v = static_cast<T>(rng.uniform(init.lo, init.hi));
      break;
    case Init::Kind::kHeUniform:
    case Init::Kind::kGlorotUniform: {
      if (init.fan_in < 1 || init.fan_out < 1) throw Error(ErrorCode::kInvalidShape, "fan must be >= 1");
      const double b = init.bound();
      for (auto& v : d) v = static_cast<T>(rng.uniform(-b, b));
      break;
    }
  }
  return t;
}

template Tensor<float> create<float>(const Shape&, const Init&, RngStream&);
template Tensor<double> create<double>(const Shape&, const Init&, RngStream&);

Shape broadcast_shape(const Shape& a, const Shape& b) {
  const std::size_t rank = std::max(a.size(), b.size());
  Shape out(rank);
  for (std::size_t i = 0; i < rank; ++i) {
    const std::int64_t ea = i < rank - a.size() ? 1 : a[i - (rank - a.size())];
    const std::int64_t eb = i < rank - b.size() ? 1 : b[i - (rank - b.size())];
    if (ea != eb && ea != 1 && eb != 1)
      throw Error(ErrorCode::kShapeMismatch, "cannot broadcast " + shape_str(a) + " with " + shape_str(b));
    out[i] = std::max(ea, eb);
  }
  return out;
}

namespace {

// Strides of `in` aligned to `out`'s rank, with 0 on broadcast axes.
std::vector<std::size_t> broadcast_strides(const Shape& in, const Shape& out) {
  std::vector<std::size_t> strides(out.size(), 0);
  std::size_t s = 1;
  for (std::size_t i = in.size(); i-- > 0;) {
    const std::size_t o = i + (out.size() - in.size());
    strides[o] = in[i] == 1 ? 0 : s;
    s *= static_cast<std::size_t>(in[i]);
  }
  return strides;
}

// Calls fn(out_index, a_offset, b_offset) over every output element in order.
template <typename Fn>
void for_each_broadcast(const Shape& out, const std::vector<std::size_t>& sa, const std::vector<std::size_t>& sb,
                        Fn&& fn) {
  const std::size_t n = numel_of(out);
  const std::size_t rank = out.size();
  std::vector<std::int64_t> idx(rank, 0);
  std::size_t oa = 0, ob = 0;
  for (std::size_t i = 0; i < n; ++i) {
    fn(i, oa, ob);
    for (std::size_t d = rank; d-- > 0;) {
      if (++idx[d] < out[d]) {
        oa += sa[d];
        ob += sb[d];
        break;
      }
      oa -= sa[d] * static_cast<std::size_t>(out[d] - 1);
      ob -= sb[d] * static_cast<std::size_t>(out[d] - 1);
      idx[d] = 0;
    }
  }
}

const char* op_name(Elementwise op) {
  switch (op) {
    case Elementwise::kAdd: return "add";
    case Elementwise::kSub: return "sub";
    case Elementwise::kMul: return "mul";
    case Elementwise::kMax0: return "max0";
  }
  return "?";
}

}  // namespace

template <typename T>
Tensor<T> elementwise(Elementwise op, const Tensor<T>& a, const std::optional<Tensor<T>>& b) {
  if (op == Elementwise::kMax0) {
    Tensor<T> out(a.shape());
    auto o = out.mutable_data();
    const auto x = a.data();
    for (std::size_t i = 0; i < o.size(); ++i) o[i] = x[i] > T(0) ? x[i] : T(0);
    record<T>(out, "max0", {a}, [a](std::span<const T> g) {
      std::vector<T> ga(g.size());
      const auto x = a.data();
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] = x[i] > T(0) ? g[i] : T(0);
      return typename TapeNode<T>::Grads{std::move(ga)};
    });
    return out;
  }
  if (!b) throw Error(ErrorCode::kShapeMismatch, std::string(op_name(op)) + " needs two operands");
  const Tensor<T>& rhs = *b;
  const Shape shape = broadcast_shape(a.shape(), rhs.shape());
  const auto sa = broadcast_strides(a.shape(), shape);
  const auto sb = broadcast_strides(rhs.shape(), shape);
  Tensor<T> out(shape);
  auto o = out.mutable_data();
  const auto x = a.data();
  const auto y = rhs.data();
  for_each_broadcast(shape, sa, sb, [&](std::size_t i, std::size_t ia, std::size_t ib) {
    switch (op) {
      case Elementwise::kAdd: o[i] = x[ia] + y[ib]; break;
      case Elementwise::kSub: o[i] = x[ia] - y[ib]; break;
      case Elementwise::kMul: o[i] = x[ia] * y[ib]; break;
      default: break;
    }
  });
  record<T>(out, op_name(op), {a, rhs}, [op, a, rhs, shape, sa, sb](std::span<const T> g) {
    const bool need_a = a.traced();
    const bool need_b = rhs.traced();
    std::vector<T> ga(need_a ? a.numel() : 0, T(0));
    std::vector<T> gb(need_b ? rhs.numel() : 0, T(0));
    const auto x = a.data();
    const auto y = rhs.data();
    for_each_broadcast(shape, sa, sb, [&](std::size_t i, std::size_t ia, std::size_t ib) {
      switch (op) {
        case Elementwise::kAdd:
          if (need_a) ga[ia] += g[i];
          if (need_b) gb[ib] += g[i];
          break;
        case Elementwise::kSub:
          if (need_a) ga[ia] += g[i];
          if (need_b) gb[ib] -= g[i];
          break;
        case Elementwise::kMul:
          if (need_a) ga[ia] += g[i] * y[ib];
          if (need_b) gb[ib] += g[i] * x[ia];
          break;
        default: break;
      }
    });
    return typename TapeNode<T>::Grads{std::move(ga), std::move(gb)};
  });
  return out;
}

template Tensor<float> elementwise<float>(Elementwise, const Tensor<float>&, const std::optional<Tensor<float>>&);
template Tensor<double> elementwise<double>(Elementwise, const Tensor<double>&,
                                            const std::optional<Tensor<double>>&);

template <typename T>
Tensor<T> reduce(Reduce op, const Tensor<T>& a, const std::vector<std::size_t>& axes) {
  const Shape& in = a.shape();
  std::vector<bool> reduced(in.size(), false);
  for (std::size_t ax : axes) {
    if (ax >= in.size()) throw Error(ErrorCode::kInvalidAxis, "axis " + std::to_string(ax) + " out of range");
    if (reduced[ax]) throw Error(ErrorCode::kInvalidAxis, "duplicate axis " + std::to_string(ax));
    reduced[ax] = true;
  }
  Shape out_shape;
  Shape kept(in.size());  // `in` with reduced extents set to 1
  std::size_t count = 1;
  for (std::size_t d = 0; d < in.size(); ++d) {
    if (reduced[d]) {
      count *= static_cast<std::size_t>(in[d]);
      kept[d] = 1;
    } else {
      out_shape.push_back(in[d]);
      kept[d] = in[d];
    }
  }
  // Offsets of the output element each input element folds into.
  const auto so = broadcast_strides(kept, in);
  const std::vector<std::size_t> none(in.size(), 0);
  std::vector<std::size_t> target(a.numel());
  for_each_broadcast(in, so, none, [&](std::size_t i, std::size_t io, std::size_t) { target[i] = io; });

  const std::size_t out_n = numel_of(out_shape);
  std::vector<double> acc(out_n, 0.0);
  const auto x = a.data();
  for (std::size_t i = 0; i < x.size(); ++i) acc[target[i]] += static_cast<double>(x[i]);
  const double scale = op == Reduce::kMean ? 1.0 / static_cast<double>(count) : 1.0;
  Tensor<T> out(out_shape);
  auto o = out.mutable_data();
  for (std::size_t i = 0; i < out_n; ++i) o[i] = static_cast<T>(acc[i] * scale);

  record<T>(out, op == Reduce::kMean ? "mean" : "sum", {a},
            [target = std::move(target), scale](std::span<const T> g) {
              std::vector<T> ga(target.size());
              const T s = static_cast<T>(scale);
              for (std::size_t i = 0; i < target.size(); ++i) ga[i] = g[target[i]] * s;
              return typename TapeNode<T>::Grads{std::move(ga)};
            });
  return out;
}

template Tensor<float> reduce<float>(Reduce, const Tensor<float>&, const std::vector<std::size_t>&);
template Tensor<double> reduce<double>(Reduce, const Tensor<double>&, const std::vector<std::size_t>&);

template <typename T>
Tensor<T> sum_all(const Tensor<T>& a) {
  std::vector<std::size_t> axes(a.rank());
  for (std::size_t i = 0; i < axes.size(); ++i) axes[i] = i;
  return reduce(Reduce::kSum, a, axes);
}

template Tensor<float> sum_all<float>(const Tensor<float>&);
template Tensor<double> sum_all<double>(const Tensor<double>&);

template <typename T>
Tensor<T> reshape(const Tensor<T>& a, const Shape& shape) {
  validate_shape(shape);
  if (numel_of(shape) != a.numel())
    throw Error(ErrorCode::kShapeMismatch, "cannot reshape " + shape_str(a.shape()) + " to " + shape_str(shape));
  Tensor<T> out(shape, std::vector<T>(a.data().begin(), a.data().end()));
  record<T>(out, "reshape", {a}, [](std::span<const T> g) {
    return typename TapeNode<T>::Grads{std::vector<T>(g.begin(), g.end())};
  });
  return out;
}

template Tensor<float> reshape<float>(const Tensor<float>&, const Shape&);
template Tensor<double> reshape<double>(const Tensor<double>&, const Shape&);

template <typename T>
Tensor<T> matmul(const Tensor<T>& a, const Tensor<T>& b) {
  if (a.rank() != 2 || b.rank() != 2 || a.extent(1) != b.extent(0))
    throw Error(ErrorCode::kShapeMismatch, "matmul " + shape_str(a.shape()) + " x " + shape_str(b.shape()));
  const auto m = static_cast<std::size_t>(a.extent(0));
  const auto k = static_cast<std::size_t>(a.extent(1));
  const auto n = static_cast<std::size_t>(b.extent(1));
  Tensor<T> out(Shape{a.extent(0), b.extent(1)});
  kernels::gemm<T>(false, false, m, n, k, a.data().data(), k, b.data().data(), n, T(0), out.mutable_data().data(), n);
  record<T>(out, "matmul", {a, b}, [a, b, m, n, k](std::span<const T> g) {
    std::vector<T> ga, gb;
    if (a.traced()) {
      ga.resize(m * k);
      kernels::gemm<T>(false, true, m, k, n, g.data(), n, b.data().data(), n, T(0), ga.data(), k);
    }
    if (b.traced()) {
      gb.resize(k * n);
      kernels::gemm<T>(true, false, k, n, m, a.data().data(), k, g.data(), n, T(0), gb.data(), n);
    }
    return typename TapeNode<T>::Grads{std::move(ga), std::move(gb)};
  });
  return out;
}

template Tensor<float> matmul<float>(const Tensor<float>&, const Tensor<float>&);
template Tensor<double> matmul<double>(const Tensor<double>&, const Tensor<double>&);

}  // namespace slump
