// AVX2 + FMA kernels. Compiled with -mavx2 -mfma; only reached through the
// dispatcher when the running CPU reports both features.

#include "slump/kernels/kernels.hpp"

#if defined(__AVX2__) && defined(__FMA__)

#include <immintrin.h>

#include <algorithm>
#include <vector>

namespace slump::kernels::avx2 {

namespace {

constexpr std::size_t kMr = 6;
constexpr std::size_t kKc = 256;
constexpr std::size_t kMc = 96;
constexpr std::size_t kNc = 512;

template <typename T>
struct Vec;

template <>
struct Vec<float> {
  using reg = __m256;
  static constexpr std::size_t kWidth = 8;
  static reg zero() { return _mm256_setzero_ps(); }
  static reg load(const float* p) { return _mm256_loadu_ps(p); }
  static void store(float* p, reg v) { _mm256_storeu_ps(p, v); }
  static reg set1(float x) { return _mm256_set1_ps(x); }
  static reg fma(reg a, reg b, reg c) { return _mm256_fmadd_ps(a, b, c); }
  static reg add(reg a, reg b) { return _mm256_add_ps(a, b); }
  static reg mul(reg a, reg b) { return _mm256_mul_ps(a, b); }
  static float hsum(reg v) {
    __m128 lo = _mm256_castps256_ps128(v);
    __m128 hi = _mm256_extractf128_ps(v, 1);
    lo = _mm_add_ps(lo, hi);
    __m128 sh = _mm_movehdup_ps(lo);
    lo = _mm_add_ps(lo, sh);
    sh = _mm_movehl_ps(sh, lo);
    lo = _mm_add_ss(lo, sh);
    return _mm_cvtss_f32(lo);
  }
};

template <>
struct Vec<double> {
  using reg = __m256d;
  static constexpr std::size_t kWidth = 4;
  static reg zero() { return _mm256_setzero_pd(); }
  static reg load(const double* p) { return _mm256_loadu_pd(p); }
  static void store(double* p, reg v) { _mm256_storeu_pd(p, v); }
  static reg set1(double x) { return _mm256_set1_pd(x); }
  static reg fma(reg a, reg b, reg c) { return _mm256_fmadd_pd(a, b, c); }
  static reg add(reg a, reg b) { return _mm256_add_pd(a, b); }
  static reg mul(reg a, reg b) { return _mm256_mul_pd(a, b); }
  static double hsum(reg v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_add_sd(lo, _mm_unpackhi_pd(lo, lo)));
  }
};

// Two vector registers per row: NR = 16 floats or 8 doubles.
template <typename T>
constexpr std::size_t kNr = 2 * Vec<T>::kWidth;

template <typename T>
void pack_a(bool trans, const T* a, std::size_t lda, std::size_t i0, std::size_t mc, std::size_t p0,
            std::size_t kc, T* out) {
  for (std::size_t ir = 0; ir < mc; ir += kMr) {
    const std::size_t rows = std::min(kMr, mc - ir);
    for (std::size_t p = 0; p < kc; ++p) {
      for (std::size_t r = 0; r < kMr; ++r) {
        T v = T(0);
        if (r < rows) {
          const std::size_t i = i0 + ir + r;
          v = trans ? a[(p0 + p) * lda + i] : a[i * lda + p0 + p];
        }
        *out++ = v;
      }
    }
  }
}

template <typename T>
void pack_b(bool trans, const T* b, std::size_t ldb, std::size_t p0, std::size_t kc, std::size_t j0,
            std::size_t nc, T* out) {
  constexpr std::size_t nr = kNr<T>;
  for (std::size_t jr = 0; jr < nc; jr += nr) {
    const std::size_t cols = std::min(nr, nc - jr);
    for (std::size_t p = 0; p < kc; ++p) {
      if (!trans && cols == nr) {
        const T* src = b + (p0 + p) * ldb + j0 + jr;
        std::copy(src, src + nr, out);
        out += nr;
        continue;
      }
      for (std::size_t c = 0; c < nr; ++c) {
        T v = T(0);
        if (c < cols) {
          const std::size_t j = j0 + jr + c;
          v = trans ? b[j * ldb + p0 + p] : b[(p0 + p) * ldb + j];
        }
        *out++ = v;
      }
    }
  }
}

// acc = A_panel * B_panel over kc; then C = (first ? beta*C : C) + acc on the
// valid rows x cols corner of the tile.
template <typename T>
void micro_kernel(std::size_t kc, const T* ap, const T* bp, T* c, std::size_t ldc, std::size_t rows,
                  std::size_t cols, bool first, T beta) {
  using V = Vec<T>;
  constexpr std::size_t w = V::kWidth;
  typename V::reg acc[kMr][2];
  for (std::size_t r = 0; r < kMr; ++r) acc[r][0] = acc[r][1] = V::zero();
  for (std::size_t p = 0; p < kc; ++p) {
    const auto b0 = V::load(bp);
    const auto b1 = V::load(bp + w);
    bp += 2 * w;
    for (std::size_t r = 0; r < kMr; ++r) {
      const auto av = V::set1(ap[r]);
      acc[r][0] = V::fma(av, b0, acc[r][0]);
      acc[r][1] = V::fma(av, b1, acc[r][1]);
    }
    ap += kMr;
  }
  alignas(32) T tile[kMr][2 * w];
  for (std::size_t r = 0; r < kMr; ++r) {
    V::store(tile[r], acc[r][0]);
    V::store(tile[r] + w, acc[r][1]);
  }
  const bool full = rows == kMr && cols == 2 * w;
  if (full && !(first && beta != T(0) && beta != T(1))) {
    for (std::size_t r = 0; r < kMr; ++r) {
      T* crow = c + r * ldc;
      auto lo = V::load(tile[r]);
      auto hi = V::load(tile[r] + w);
      if (!(first && beta == T(0))) {
        lo = V::add(V::load(crow), lo);
        hi = V::add(V::load(crow + w), hi);
      }
      V::store(crow, lo);
      V::store(crow + w, hi);
    }
    return;
  }
  for (std::size_t r = 0; r < rows; ++r) {
    T* crow = c + r * ldc;
    for (std::size_t j = 0; j < cols; ++j) {
      T base = crow[j];
      if (first) base = beta == T(0) ? T(0) : base * beta;
      crow[j] = base + tile[r][j];
    }
  }
}

template <typename T>
void gemm(bool trans_a, bool trans_b, std::size_t m, std::size_t n, std::size_t k, const T* a, std::size_t lda,
          const T* b, std::size_t ldb, T beta, T* c, std::size_t ldc) {
  if (m == 0 || n == 0) return;
  if (k == 0) {
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j) c[i * ldc + j] = beta == T(0) ? T(0) : c[i * ldc + j] * beta;
    return;
  }
  constexpr std::size_t nr = kNr<T>;
  thread_local std::vector<T> abuf;
  thread_local std::vector<T> bbuf;
  abuf.resize(((kMc + kMr - 1) / kMr) * kMr * kKc);
  bbuf.resize(((kNc + nr - 1) / nr) * nr * kKc);
  for (std::size_t jc = 0; jc < n; jc += kNc) {
    const std::size_t nc = std::min(kNc, n - jc);
    for (std::size_t pc = 0; pc < k; pc += kKc) {
      const std::size_t kc = std::min(kKc, k - pc);
      pack_b(trans_b, b, ldb, pc, kc, jc, nc, bbuf.data());
      for (std::size_t ic = 0; ic < m; ic += kMc) {
        const std::size_t mc = std::min(kMc, m - ic);
        pack_a(trans_a, a, lda, ic, mc, pc, kc, abuf.data());
        for (std::size_t jr = 0; jr < nc; jr += nr) {
          const std::size_t cols = std::min(nr, nc - jr);
          const T* bp = bbuf.data() + (jr / nr) * nr * kc;
          for (std::size_t ir = 0; ir < mc; ir += kMr) {
            const std::size_t rows = std::min(kMr, mc - ir);
            const T* ap = abuf.data() + (ir / kMr) * kMr * kc;
            micro_kernel<T>(kc, ap, bp, c + (ic + ir) * ldc + jc + jr, ldc, rows, cols, pc == 0, beta);
          }
        }
      }
    }
  }
}

template <typename T>
T dot(const T* x, const T* y, std::size_t n) {
  using V = Vec<T>;
  constexpr std::size_t w = V::kWidth;
  auto a0 = V::zero();
  auto a1 = V::zero();
  std::size_t i = 0;
  for (; i + 2 * w <= n; i += 2 * w) {
    a0 = V::fma(V::load(x + i), V::load(y + i), a0);
    a1 = V::fma(V::load(x + i + w), V::load(y + i + w), a1);
  }
  T acc = V::hsum(V::add(a0, a1));
  for (; i < n; ++i) acc += x[i] * y[i];
  return acc;
}

template <typename T>
void axpy(std::size_t n, T alpha, const T* x, T* y) {
  using V = Vec<T>;
  constexpr std::size_t w = V::kWidth;
  const auto av = V::set1(alpha);
  std::size_t i = 0;
  for (; i + w <= n; i += w) V::store(y + i, V::fma(av, V::load(x + i), V::load(y + i)));
  for (; i < n; ++i) y[i] += alpha * x[i];
}

}  // namespace

template <typename T>
const Table<T>* table() {
  static const Table<T> t{&gemm<T>, &dot<T>, &axpy<T>};
  return &t;
}

template const Table<float>* table<float>();
template const Table<double>* table<double>();

}  // namespace slump::kernels::avx2

#else

namespace slump::kernels::avx2 {

template <typename T>
const Table<T>* table() {
  return nullptr;
}

template const Table<float>* table<float>();
template const Table<double>* table<double>();

}  // namespace slump::kernels::avx2

#endif
