#include "solarkm/simd/ops.hpp"

#if defined(__x86_64__) || defined(_M_X64)
#define SOLARKM_AVX2_BUILD 1
#include <immintrin.h>
#else
#define SOLARKM_AVX2_BUILD 0
#endif

namespace solarkm::simd::avx2 {

bool compiled() { return SOLARKM_AVX2_BUILD != 0; }

#if SOLARKM_AVX2_BUILD

namespace {
inline double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    __m128d sh = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_add_sd(lo, sh));
}
}  // namespace

double dot(const double* a, const double* b, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        acc = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc);
    }
    double tail = 0.0;
    for (; i < n; ++i) tail += a[i] * b[i];
    return hsum(acc) + tail;
}

double squared_distance(const double* a, const double* b, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
        acc = _mm256_fmadd_pd(d, d, acc);
    }
    double tail = 0.0;
    for (; i < n; ++i) {
        const double d = a[i] - b[i];
        tail += d * d;
    }
    return hsum(acc) + tail;
}

double sum(const double* a, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(a + i));
    double tail = 0.0;
    for (; i < n; ++i) tail += a[i];
    return hsum(acc) + tail;
}

double weighted_sum(const double* w, const double* x, std::size_t n) {
    return dot(w, x, n);
}

double weighted_sq_dev(const double* w, const double* x, double m, std::size_t n) {
    const __m256d mm = _mm256_set1_pd(m);
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d d = _mm256_sub_pd(_mm256_loadu_pd(x + i), mm);
        acc = _mm256_fmadd_pd(_mm256_mul_pd(_mm256_loadu_pd(w + i), d), d, acc);
    }
    double tail = 0.0;
    for (; i < n; ++i) {
        const double d = x[i] - m;
        tail += w[i] * d * d;
    }
    return hsum(acc) + tail;
}

#else  // non-x86 fallback so the symbols always link

double dot(const double* a, const double* b, std::size_t n) { return scalar::dot(a, b, n); }
double squared_distance(const double* a, const double* b, std::size_t n) {
    return scalar::squared_distance(a, b, n);
}
double sum(const double* a, std::size_t n) { return scalar::sum(a, n); }
double weighted_sum(const double* w, const double* x, std::size_t n) {
    return scalar::weighted_sum(w, x, n);
}
double weighted_sq_dev(const double* w, const double* x, double m, std::size_t n) {
    return scalar::weighted_sq_dev(w, x, m, n);
}

#endif

}  // namespace solarkm::simd::avx2
