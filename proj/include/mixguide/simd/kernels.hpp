#pragma once

#include <cstddef>

// Double-precision kernels behind the numerical hot loops (posterior logits,
// drift assembly, pairwise distance scans). Each kernel has a scalar reference
// implementation and, on x86, an AVX2+FMA variant; the active variant is
// picked once at runtime. Results of the variants agree to rounding error
// only, so callers must not rely on bit-equality across backends.
namespace mixguide::simd {

enum class Backend { Auto, Scalar, Avx2 };

// Auto re-runs CPU detection. Setting an unavailable backend falls back to
// scalar. Not thread-safe; intended for startup/tests.
void set_backend(Backend b);
const char* active_backend();

// sum_i a[i]*b[i]
double dot(const double* a, const double* b, std::size_t n);
// y[i] += a*x[i]
void axpy(double* y, double a, const double* x, std::size_t n);
// y[i] = a*x[i] + b*z[i]
void combine2(double* y, double a, const double* x, double b, const double* z, std::size_t n);
// y[i] *= a
void scale(double* y, double a, std::size_t n);
// sum_i (a[i]-b[i])^2
double sq_dist(const double* a, const double* b, std::size_t n);
// sum_i ((a[i]-b[i])*s[i])^2
double sq_dist_scaled(const double* a, const double* b, const double* s, std::size_t n);

namespace scalar {
double dot(const double* a, const double* b, std::size_t n);
void axpy(double* y, double a, const double* x, std::size_t n);
void combine2(double* y, double a, const double* x, double b, const double* z, std::size_t n);
void scale(double* y, double a, std::size_t n);
double sq_dist(const double* a, const double* b, std::size_t n);
double sq_dist_scaled(const double* a, const double* b, const double* s, std::size_t n);
}  // namespace scalar

#if defined(MIXGUIDE_HAVE_AVX2_TU)
namespace avx2 {
double dot(const double* a, const double* b, std::size_t n);
void axpy(double* y, double a, const double* x, std::size_t n);
void combine2(double* y, double a, const double* x, double b, const double* z, std::size_t n);
void scale(double* y, double a, std::size_t n);
double sq_dist(const double* a, const double* b, std::size_t n);
double sq_dist_scaled(const double* a, const double* b, const double* s, std::size_t n);
}  // namespace avx2
#endif

}  // namespace mixguide::simd
