#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

#include "slump/error.hpp"
#include "slump/kernels/kernels.hpp"

namespace slump::kernels {

namespace {

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(__i386__)
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

std::atomic<Isa>& active_slot() {
  static std::atomic<Isa> slot{default_isa()};
  return slot;
}

std::atomic<unsigned> g_threads{1};

}  // namespace

std::string_view to_string(Isa isa) {
  switch (isa) {
    case Isa::kScalar: return "scalar";
    case Isa::kAvx2: return "avx2";
  }
  return "unknown";
}

bool supported(Isa isa) {
  switch (isa) {
    case Isa::kScalar: return true;
    case Isa::kAvx2: return cpu_has_avx2() && avx2::table<float>() != nullptr;
  }
  return false;
}

Isa default_isa() {
  if (const char* env = std::getenv("SLUMP_ISA")) {
    const std::string want(env);
    if (want == "scalar") return Isa::kScalar;
    if (want == "avx2" && supported(Isa::kAvx2)) return Isa::kAvx2;
  }
  return supported(Isa::kAvx2) ? Isa::kAvx2 : Isa::kScalar;
}

Isa active_isa() { return active_slot().load(std::memory_order_relaxed); }

void set_active_isa(Isa isa) {
  if (!supported(isa)) throw Error(ErrorCode::kConfig, "ISA not supported on this CPU: " + std::string(to_string(isa)));
  active_slot().store(isa, std::memory_order_relaxed);
}

template <typename T>
const Table<T>& table(Isa isa) {
  if (isa == Isa::kAvx2) {
    if (const Table<T>* t = avx2::table<T>()) return *t;
  }
  return scalar::table<T>();
}

template const Table<float>& table<float>(Isa);
template const Table<double>& table<double>(Isa);

void set_num_threads(unsigned n) { g_threads.store(std::max(1u, n)); }
unsigned num_threads() { return g_threads.load(); }

template <typename T>
void gemm(bool trans_a, bool trans_b, std::size_t m, std::size_t n, std::size_t k, const T* a, std::size_t lda,
          const T* b, std::size_t ldb, T beta, T* c, std::size_t ldc) {
  const auto& t = active<T>();
  const unsigned workers = std::min<std::size_t>(num_threads(), (m + 63) / 64);
  if (workers <= 1) {
    t.gemm(trans_a, trans_b, m, n, k, a, lda, b, ldb, beta, c, ldc);
    return;
  }
  const std::size_t rows = (m + workers - 1) / workers;
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    const std::size_t i0 = w * rows;
    if (i0 >= m) break;
    const std::size_t mm = std::min(rows, m - i0);
    const T* aw = trans_a ? a + i0 : a + i0 * lda;
    pool.emplace_back([=, &t] { t.gemm(trans_a, trans_b, mm, n, k, aw, lda, b, ldb, beta, c + i0 * ldc, ldc); });
  }
}

template void gemm<float>(bool, bool, std::size_t, std::size_t, std::size_t, const float*, std::size_t,
                          const float*, std::size_t, float, float*, std::size_t);
template void gemm<double>(bool, bool, std::size_t, std::size_t, std::size_t, const double*, std::size_t,
                           const double*, std::size_t, double, double*, std::size_t);

}  // namespace slump::kernels
