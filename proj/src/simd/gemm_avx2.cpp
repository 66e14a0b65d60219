// Compiled with -mavx2 -mfma; only reached after a runtime CPU check.
#include <immintrin.h>

#include "msr/simd/kernels.hpp"

namespace msr::simd::avx2 {
namespace {

inline float hsum(__m256 v) noexcept {
    __m128 lo = _mm256_castps256_ps128(v);
    __m128 hi = _mm256_extractf128_ps(v, 1);
    lo = _mm_add_ps(lo, hi);
    __m128 shuf = _mm_movehdup_ps(lo);
    __m128 sums = _mm_add_ps(lo, shuf);
    shuf = _mm_movehl_ps(shuf, sums);
    sums = _mm_add_ss(sums, shuf);
    return _mm_cvtss_f32(sums);
}

// Rows [i, i+MR) of C += op(A) * B. A element (r, p) lives at a[r*rs + p*cs].
template <int MR>
inline void row_panel(std::size_t n, std::size_t k, const float* a, std::size_t rs,
                      std::size_t cs, const float* b, std::size_t ldb, float* c,
                      std::size_t ldc) noexcept {
    std::size_t j = 0;
    for (; j + 16 <= n; j += 16) {
        __m256 acc0[MR];
        __m256 acc1[MR];
        for (int r = 0; r < MR; ++r) {
            acc0[r] = _mm256_loadu_ps(c + r * ldc + j);
            acc1[r] = _mm256_loadu_ps(c + r * ldc + j + 8);
        }
        for (std::size_t p = 0; p < k; ++p) {
            const __m256 b0 = _mm256_loadu_ps(b + p * ldb + j);
            const __m256 b1 = _mm256_loadu_ps(b + p * ldb + j + 8);
            for (int r = 0; r < MR; ++r) {
                const __m256 av = _mm256_broadcast_ss(a + r * rs + p * cs);
                acc0[r] = _mm256_fmadd_ps(av, b0, acc0[r]);
                acc1[r] = _mm256_fmadd_ps(av, b1, acc1[r]);
            }
        }
        for (int r = 0; r < MR; ++r) {
            _mm256_storeu_ps(c + r * ldc + j, acc0[r]);
            _mm256_storeu_ps(c + r * ldc + j + 8, acc1[r]);
        }
    }
    for (; j + 8 <= n; j += 8) {
        __m256 acc[MR];
        for (int r = 0; r < MR; ++r) acc[r] = _mm256_loadu_ps(c + r * ldc + j);
        for (std::size_t p = 0; p < k; ++p) {
            const __m256 b0 = _mm256_loadu_ps(b + p * ldb + j);
            for (int r = 0; r < MR; ++r) {
                acc[r] = _mm256_fmadd_ps(_mm256_broadcast_ss(a + r * rs + p * cs), b0, acc[r]);
            }
        }
        for (int r = 0; r < MR; ++r) _mm256_storeu_ps(c + r * ldc + j, acc[r]);
    }
    if (j < n) {
        for (int r = 0; r < MR; ++r) {
            float* crow = c + r * ldc;
            for (std::size_t p = 0; p < k; ++p) {
                const float av = a[r * rs + p * cs];
                const float* brow = b + p * ldb;
                for (std::size_t jj = j; jj < n; ++jj) crow[jj] += av * brow[jj];
            }
        }
    }
}

void gemm_strided(std::size_t m, std::size_t n, std::size_t k, const float* a, std::size_t rs,
                  std::size_t cs, const float* b, std::size_t ldb, float* c,
                  std::size_t ldc) noexcept {
    std::size_t i = 0;
    for (; i + 4 <= m; i += 4) row_panel<4>(n, k, a + i * rs, rs, cs, b, ldb, c + i * ldc, ldc);
    for (; i < m; ++i) row_panel<1>(n, k, a + i * rs, rs, cs, b, ldb, c + i * ldc, ldc);
}

}  // namespace

void gemm_nn(std::size_t m, std::size_t n, std::size_t k, const float* a, std::size_t lda,
             const float* b, std::size_t ldb, float* c, std::size_t ldc) noexcept {
    gemm_strided(m, n, k, a, lda, 1, b, ldb, c, ldc);
}

void gemm_tn(std::size_t m, std::size_t n, std::size_t k, const float* a, std::size_t lda,
             const float* b, std::size_t ldb, float* c, std::size_t ldc) noexcept {
    gemm_strided(m, n, k, a, 1, lda, b, ldb, c, ldc);
}

float dot(const float* x, const float* y, std::size_t n) noexcept {
    __m256 acc0 = _mm256_setzero_ps();
    __m256 acc1 = _mm256_setzero_ps();
    std::size_t i = 0;
    for (; i + 16 <= n; i += 16) {
        acc0 = _mm256_fmadd_ps(_mm256_loadu_ps(x + i), _mm256_loadu_ps(y + i), acc0);
        acc1 = _mm256_fmadd_ps(_mm256_loadu_ps(x + i + 8), _mm256_loadu_ps(y + i + 8), acc1);
    }
    for (; i + 8 <= n; i += 8) {
        acc0 = _mm256_fmadd_ps(_mm256_loadu_ps(x + i), _mm256_loadu_ps(y + i), acc0);
    }
    float res = hsum(_mm256_add_ps(acc0, acc1));
    for (; i < n; ++i) res += x[i] * y[i];
    return res;
}

void gemm_nt(std::size_t m, std::size_t n, std::size_t k, const float* a, std::size_t lda,
             const float* b, std::size_t ldb, float* c, std::size_t ldc) noexcept {
    for (std::size_t i = 0; i < m; ++i) {
        const float* arow = a + i * lda;
        std::size_t j = 0;
        // Four columns of C per pass share each load of A.
        for (; j + 4 <= n; j += 4) {
            const float* b0 = b + j * ldb;
            const float* b1 = b0 + ldb;
            const float* b2 = b1 + ldb;
            const float* b3 = b2 + ldb;
            __m256 s0 = _mm256_setzero_ps();
            __m256 s1 = _mm256_setzero_ps();
            __m256 s2 = _mm256_setzero_ps();
            __m256 s3 = _mm256_setzero_ps();
            std::size_t p = 0;
            for (; p + 8 <= k; p += 8) {
                const __m256 av = _mm256_loadu_ps(arow + p);
                s0 = _mm256_fmadd_ps(av, _mm256_loadu_ps(b0 + p), s0);
                s1 = _mm256_fmadd_ps(av, _mm256_loadu_ps(b1 + p), s1);
                s2 = _mm256_fmadd_ps(av, _mm256_loadu_ps(b2 + p), s2);
                s3 = _mm256_fmadd_ps(av, _mm256_loadu_ps(b3 + p), s3);
            }
            float r0 = hsum(s0);
            float r1 = hsum(s1);
            float r2 = hsum(s2);
            float r3 = hsum(s3);
            for (; p < k; ++p) {
                r0 += arow[p] * b0[p];
                r1 += arow[p] * b1[p];
                r2 += arow[p] * b2[p];
                r3 += arow[p] * b3[p];
            }
            float* crow = c + i * ldc + j;
            crow[0] += r0;
            crow[1] += r1;
            crow[2] += r2;
            crow[3] += r3;
        }
        for (; j < n; ++j) c[i * ldc + j] += dot(arow, b + j * ldb, k);
    }
}

void axpy(float alpha, const float* x, float* y, std::size_t n) noexcept {
    const __m256 av = _mm256_set1_ps(alpha);
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        _mm256_storeu_ps(y + i, _mm256_fmadd_ps(av, _mm256_loadu_ps(x + i), _mm256_loadu_ps(y + i)));
    }
    for (; i < n; ++i) y[i] += alpha * x[i];
}

}  // namespace msr::simd::avx2
