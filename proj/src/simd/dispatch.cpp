#include "mixguide/simd/kernels.hpp"

namespace mixguide::simd {

namespace {

struct Vtable {
  double (*dot)(const double*, const double*, std::size_t);
  void (*axpy)(double*, double, const double*, std::size_t);
  void (*combine2)(double*, double, const double*, double, const double*, std::size_t);
  void (*scale)(double*, double, std::size_t);
  double (*sq_dist)(const double*, const double*, std::size_t);
  double (*sq_dist_scaled)(const double*, const double*, const double*, std::size_t);
  const char* name;
};

constexpr Vtable kScalar{scalar::dot,     scalar::axpy,    scalar::combine2,
                         scalar::scale,   scalar::sq_dist, scalar::sq_dist_scaled,
                         "scalar"};

#if defined(MIXGUIDE_HAVE_AVX2_TU)
constexpr Vtable kAvx2{avx2::dot,     avx2::axpy,    avx2::combine2,
                       avx2::scale,   avx2::sq_dist, avx2::sq_dist_scaled,
                       "avx2"};
#endif

bool avx2_supported() {
#if defined(MIXGUIDE_HAVE_AVX2_TU) && defined(__GNUC__)
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const Vtable* detect() {
#if defined(MIXGUIDE_HAVE_AVX2_TU)
  if (avx2_supported()) return &kAvx2;
#endif
  return &kScalar;
}

const Vtable* g_active = detect();

}  // namespace

void set_backend(Backend b) {
  switch (b) {
    case Backend::Auto:
      g_active = detect();
      break;
    case Backend::Scalar:
      g_active = &kScalar;
      break;
    case Backend::Avx2:
#if defined(MIXGUIDE_HAVE_AVX2_TU)
      g_active = avx2_supported() ? &kAvx2 : &kScalar;
#else
      g_active = &kScalar;
#endif
      break;
  }
}

const char* active_backend() { return g_active->name; }

double dot(const double* a, const double* b, std::size_t n) { return g_active->dot(a, b, n); }

void axpy(double* y, double a, const double* x, std::size_t n) { g_active->axpy(y, a, x, n); }

void combine2(double* y, double a, const double* x, double b, const double* z, std::size_t n) {
  g_active->combine2(y, a, x, b, z, n);
}

void scale(double* y, double a, std::size_t n) { g_active->scale(y, a, n); }

double sq_dist(const double* a, const double* b, std::size_t n) { return g_active->sq_dist(a, b, n); }

double sq_dist_scaled(const double* a, const double* b, const double* s, std::size_t n) {
  return g_active->sq_dist_scaled(a, b, s, n);
}

}  // namespace mixguide::simd
