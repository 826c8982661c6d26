#include "solarkm/simd/ops.hpp"

#include <cstdlib>
#include <cstring>

namespace solarkm::simd {

namespace {

bool detect_avx2() {
#if defined(__x86_64__) || defined(_M_X64)
    // SOLARKM_NO_AVX2=1 forces the scalar path (used by the equivalence tests).
    const char* env = std::getenv("SOLARKM_NO_AVX2");
    if (env != nullptr && std::strcmp(env, "0") != 0) return false;
    return __builtin_cpu_supports("avx2") && avx2::compiled();
#else
    return false;
#endif
}

const bool g_use_avx2 = detect_avx2();

}  // namespace

bool avx2_active() { return g_use_avx2; }

double dot(const double* a, const double* b, std::size_t n) {
    return g_use_avx2 ? avx2::dot(a, b, n) : scalar::dot(a, b, n);
}

double squared_distance(const double* a, const double* b, std::size_t n) {
    return g_use_avx2 ? avx2::squared_distance(a, b, n) : scalar::squared_distance(a, b, n);
}

double sum(const double* a, std::size_t n) {
    return g_use_avx2 ? avx2::sum(a, n) : scalar::sum(a, n);
}

double weighted_sum(const double* w, const double* x, std::size_t n) {
    return g_use_avx2 ? avx2::weighted_sum(w, x, n) : scalar::weighted_sum(w, x, n);
}

double weighted_sq_dev(const double* w, const double* x, double m, std::size_t n) {
    return g_use_avx2 ? avx2::weighted_sq_dev(w, x, m, n) : scalar::weighted_sq_dev(w, x, m, n);
}

}  // namespace solarkm::simd
