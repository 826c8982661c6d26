#pragma once

#include <cstddef>

// Data-parallel reduction primitives used by the kernel and feature code.
// Scalar reference implementations always exist; on x86-64 an AVX2 variant
// is selected at runtime when the CPU supports it. Both paths accumulate in
// the same order within each lane group, and the AVX2 results are
// equivalence-tested against the scalar ones.

namespace solarkm::simd {

// Selected-at-runtime entry points.
double dot(const double* a, const double* b, std::size_t n);
double squared_distance(const double* a, const double* b, std::size_t n);
double sum(const double* a, std::size_t n);
double weighted_sum(const double* w, const double* x, std::size_t n);
// sum_i w[i] * (x[i] - m)^2
double weighted_sq_dev(const double* w, const double* x, double m, std::size_t n);

// True when the AVX2 variants are active.
bool avx2_active();

namespace scalar {
double dot(const double* a, const double* b, std::size_t n);
double squared_distance(const double* a, const double* b, std::size_t n);
double sum(const double* a, std::size_t n);
double weighted_sum(const double* w, const double* x, std::size_t n);
double weighted_sq_dev(const double* w, const double* x, double m, std::size_t n);
}  // namespace scalar

namespace avx2 {
// Compiled only on x86-64; callable only if the CPU reports AVX2.
double dot(const double* a, const double* b, std::size_t n);
double squared_distance(const double* a, const double* b, std::size_t n);
double sum(const double* a, std::size_t n);
double weighted_sum(const double* w, const double* x, std::size_t n);
double weighted_sq_dev(const double* w, const double* x, double m, std::size_t n);
bool compiled();
}  // namespace avx2

}  // namespace solarkm::simd
