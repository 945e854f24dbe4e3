#pragma once

// Inner-loop kernels with a scalar reference implementation and SIMD variants
// chosen at runtime. Every variant computes each output element with the
// same k-ordering regardless of how rows are partitioned across threads, so
// results never depend on the thread count.

#include <cstddef>
#include <string_view>

namespace slump::kernels {

enum class Isa { kScalar, kAvx2 };

std::string_view to_string(Isa isa);

template <typename T>
struct Table {
  // C[M,N] = beta * C + op(A)[M,K] * op(B)[K,N], all row-major.
  // op(A) reads A[k*lda + i] when trans_a, else A[i*lda + k]; same for B.
  void (*gemm)(bool trans_a, bool trans_b, std::size_t m, std::size_t n, std::size_t k, const T* a,
               std::size_t lda, const T* b, std::size_t ldb, T beta, T* c, std::size_t ldc);
  T (*dot)(const T* x, const T* y, std::size_t n);
  // y += alpha * x
  void (*axpy)(std::size_t n, T alpha, const T* x, T* y);
};

bool supported(Isa isa);
// Best supported ISA, unless SLUMP_ISA=scalar|avx2 overrides it.
Isa default_isa();
Isa active_isa();
// Throws slump::Error if the ISA is unavailable on this CPU.
void set_active_isa(Isa isa);

template <typename T>
const Table<T>& table(Isa isa);

template <typename T>
const Table<T>& active() {
  return table<T>(active_isa());
}

// Worker threads used by gemm(); 1 keeps everything on the calling thread.
void set_num_threads(unsigned n);
unsigned num_threads();

// Active-ISA gemm, row-partitioned over num_threads().
template <typename T>
void gemm(bool trans_a, bool trans_b, std::size_t m, std::size_t n, std::size_t k, const T* a, std::size_t lda,
          const T* b, std::size_t ldb, T beta, T* c, std::size_t ldc);

namespace scalar {
template <typename T>
const Table<T>& table();
}

namespace avx2 {
// Null-safe: returns nullptr when the build lacks AVX2 support.
template <typename T>
const Table<T>* table();
}

}  // namespace slump::kernels
