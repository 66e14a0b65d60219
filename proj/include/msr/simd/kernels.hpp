#pragma once

// Dense inner-loop kernels used by convolution and stage integration.
//
// Every kernel has a portable scalar reference implementation. On x86-64 an
// AVX2+FMA variant is selected at runtime when the CPU supports it; the
// environment variable MSR_SIMD=scalar forces the reference path. Double
// precision always runs the scalar path (it is only used for gradient checks).
//
// All GEMM variants accumulate into C: callers zero C for a plain product.

#include <cstddef>

namespace msr::simd {

enum class Backend { kScalar, kAvx2 };

[[nodiscard]] Backend active_backend() noexcept;
[[nodiscard]] bool backend_supported(Backend b) noexcept;
[[nodiscard]] const char* backend_name(Backend b) noexcept;

// Throws ConfigError if the backend is not supported on this CPU.
void set_backend(Backend b);

// C[m x n] += A[m x k] * B[k x n]
void gemm_nn(std::size_t m, std::size_t n, std::size_t k, const float* a, std::size_t lda,
             const float* b, std::size_t ldb, float* c, std::size_t ldc) noexcept;
// C[m x n] += A^T * B where A is stored k x m
void gemm_tn(std::size_t m, std::size_t n, std::size_t k, const float* a, std::size_t lda,
             const float* b, std::size_t ldb, float* c, std::size_t ldc) noexcept;
// C[m x n] += A * B^T where B is stored n x k
void gemm_nt(std::size_t m, std::size_t n, std::size_t k, const float* a, std::size_t lda,
             const float* b, std::size_t ldb, float* c, std::size_t ldc) noexcept;
[[nodiscard]] float dot(const float* x, const float* y, std::size_t n) noexcept;
// y += alpha * x
void axpy(float alpha, const float* x, float* y, std::size_t n) noexcept;

void gemm_nn(std::size_t m, std::size_t n, std::size_t k, const double* a, std::size_t lda,
             const double* b, std::size_t ldb, double* c, std::size_t ldc) noexcept;
void gemm_tn(std::size_t m, std::size_t n, std::size_t k, const double* a, std::size_t lda,
             const double* b, std::size_t ldb, double* c, std::size_t ldc) noexcept;
void gemm_nt(std::size_t m, std::size_t n, std::size_t k, const double* a, std::size_t lda,
             const double* b, std::size_t ldb, double* c, std::size_t ldc) noexcept;
[[nodiscard]] double dot(const double* x, const double* y, std::size_t n) noexcept;
void axpy(double alpha, const double* x, double* y, std::size_t n) noexcept;

// Reference kernels, callable directly for equivalence testing.
namespace scalar {

template <typename T>
void gemm_nn(std::size_t m, std::size_t n, std::size_t k, const T* a, std::size_t lda, const T* b,
             std::size_t ldb, T* c, std::size_t ldc) noexcept {
    for (std::size_t i = 0; i < m; ++i) {
        T* crow = c + i * ldc;
        for (std::size_t p = 0; p < k; ++p) {
            const T av = a[i * lda + p];
            const T* brow = b + p * ldb;
            for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
        }
    }
}

template <typename T>
void gemm_tn(std::size_t m, std::size_t n, std::size_t k, const T* a, std::size_t lda, const T* b,
             std::size_t ldb, T* c, std::size_t ldc) noexcept {
    for (std::size_t i = 0; i < m; ++i) {
        T* crow = c + i * ldc;
        for (std::size_t p = 0; p < k; ++p) {
            const T av = a[p * lda + i];
            const T* brow = b + p * ldb;
            for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
        }
    }
}

template <typename T>
T dot(const T* x, const T* y, std::size_t n) noexcept {
    T acc{0};
    for (std::size_t i = 0; i < n; ++i) acc += x[i] * y[i];
    return acc;
}

template <typename T>
void gemm_nt(std::size_t m, std::size_t n, std::size_t k, const T* a, std::size_t lda, const T* b,
             std::size_t ldb, T* c, std::size_t ldc) noexcept {
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j) c[i * ldc + j] += dot(a + i * lda, b + j * ldb, k);
    }
}

template <typename T>
void axpy(T alpha, const T* x, T* y, std::size_t n) noexcept {
    for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

}  // namespace scalar

#if defined(__x86_64__) || defined(_M_X64)
#define MSR_HAVE_AVX2_KERNELS 1
namespace avx2 {

void gemm_nn(std::size_t m, std::size_t n, std::size_t k, const float* a, std::size_t lda,
             const float* b, std::size_t ldb, float* c, std::size_t ldc) noexcept;
void gemm_tn(std::size_t m, std::size_t n, std::size_t k, const float* a, std::size_t lda,
             const float* b, std::size_t ldb, float* c, std::size_t ldc) noexcept;
void gemm_nt(std::size_t m, std::size_t n, std::size_t k, const float* a, std::size_t lda,
             const float* b, std::size_t ldb, float* c, std::size_t ldc) noexcept;
float dot(const float* x, const float* y, std::size_t n) noexcept;
void axpy(float alpha, const float* x, float* y, std::size_t n) noexcept;

}  // namespace avx2
#else
#define MSR_HAVE_AVX2_KERNELS 0
#endif

}  // namespace msr::simd
