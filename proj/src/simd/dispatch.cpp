#include <atomic>
#include <cstdlib>
#include <string_view>

#include "msr/error.hpp"
#include "msr/simd/kernels.hpp"

namespace msr::simd {
namespace {

struct FloatTable {
    decltype(&scalar::gemm_nn<float>) gemm_nn;
    decltype(&scalar::gemm_tn<float>) gemm_tn;
    decltype(&scalar::gemm_nt<float>) gemm_nt;
    decltype(&scalar::dot<float>) dot;
    decltype(&scalar::axpy<float>) axpy;
};

constexpr FloatTable kScalarTable{&scalar::gemm_nn<float>, &scalar::gemm_tn<float>,
                                  &scalar::gemm_nt<float>, &scalar::dot<float>,
                                  &scalar::axpy<float>};
#if MSR_HAVE_AVX2_KERNELS
constexpr FloatTable kAvx2Table{&avx2::gemm_nn, &avx2::gemm_tn, &avx2::gemm_nt, &avx2::dot,
                                &avx2::axpy};
#endif

bool cpu_has_avx2() noexcept {
#if MSR_HAVE_AVX2_KERNELS && (defined(__GNUC__) || defined(__clang__))
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

Backend initial_backend() noexcept {
    if (const char* env = std::getenv("MSR_SIMD"); env != nullptr && std::string_view(env) == "scalar") {
        return Backend::kScalar;
    }
    return cpu_has_avx2() ? Backend::kAvx2 : Backend::kScalar;
}

const FloatTable* table_for(Backend b) noexcept {
#if MSR_HAVE_AVX2_KERNELS
    if (b == Backend::kAvx2) return &kAvx2Table;
#endif
    (void)b;
    return &kScalarTable;
}

struct State {
    std::atomic<Backend> backend{initial_backend()};
    std::atomic<const FloatTable*> table{table_for(backend.load())};
};

State& state() noexcept {
    static State s;
    return s;
}

const FloatTable& ft() noexcept { return *state().table.load(std::memory_order_relaxed); }

}  // namespace

Backend active_backend() noexcept { return state().backend.load(); }

bool backend_supported(Backend b) noexcept {
    return b == Backend::kScalar || (b == Backend::kAvx2 && cpu_has_avx2());
}

const char* backend_name(Backend b) noexcept {
    switch (b) {
        case Backend::kScalar: return "scalar";
        case Backend::kAvx2: return "avx2";
    }
    return "unknown";
}

void set_backend(Backend b) {
    if (!backend_supported(b)) {
        throw ConfigError(std::string("SIMD backend not supported on this CPU: ") + backend_name(b));
    }
    state().backend.store(b);
    state().table.store(table_for(b));
}

void gemm_nn(std::size_t m, std::size_t n, std::size_t k, const float* a, std::size_t lda,
             const float* b, std::size_t ldb, float* c, std::size_t ldc) noexcept {
    ft().gemm_nn(m, n, k, a, lda, b, ldb, c, ldc);
}
void gemm_tn(std::size_t m, std::size_t n, std::size_t k, const float* a, std::size_t lda,
             const float* b, std::size_t ldb, float* c, std::size_t ldc) noexcept {
    ft().gemm_tn(m, n, k, a, lda, b, ldb, c, ldc);
}
void gemm_nt(std::size_t m, std::size_t n, std::size_t k, const float* a, std::size_t lda,
             const float* b, std::size_t ldb, float* c, std::size_t ldc) noexcept {
    ft().gemm_nt(m, n, k, a, lda, b, ldb, c, ldc);
}
float dot(const float* x, const float* y, std::size_t n) noexcept { return ft().dot(x, y, n); }
void axpy(float alpha, const float* x, float* y, std::size_t n) noexcept {
    ft().axpy(alpha, x, y, n);
}

void gemm_nn(std::size_t m, std::size_t n, std::size_t k, const double* a, std::size_t lda,
             const double* b, std::size_t ldb, double* c, std::size_t ldc) noexcept {
    scalar::gemm_nn(m, n, k, a, lda, b, ldb, c, ldc);
}
void gemm_tn(std::size_t m, std::size_t n, std::size_t k, const double* a, std::size_t lda,
             const double* b, std::size_t ldb, double* c, std::size_t ldc) noexcept {
    scalar::gemm_tn(m, n, k, a, lda, b, ldb, c, ldc);
}
void gemm_nt(std::size_t m, std::size_t n, std::size_t k, const double* a, std::size_t lda,
             const double* b, std::size_t ldb, double* c, std::size_t ldc) noexcept {
    scalar::gemm_nt(m, n, k, a, lda, b, ldb, c, ldc);
}
double dot(const double* x, const double* y, std::size_t n) noexcept {
    return scalar::dot(x, y, n);
}
void axpy(double alpha, const double* x, double* y, std::size_t n) noexcept {
    scalar::axpy(alpha, x, y, n);
}

}  // namespace msr::simd
