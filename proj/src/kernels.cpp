#include "handgeo/kernels.hpp"

#include <cstdlib>
#include <limits>
#include <stdexcept>
#include <string>

namespace handgeo::kernels {

namespace scalar {

double sum_sq_diff(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return acc;
}

void scaled_diff(double* dst, const double* a, const double* b, double s,
                 std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    dst[i] = s * (a[i] - b[i]);
  }
}

void add_inplace(double* acc, const double* src, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    acc[i] += src[i];
  }
}

double max_value(const double* a, std::size_t n) {
  double m = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    if (a[i] > m) m = a[i];
  }
  return m;
}

void outer_product(double* dst, const double* col, std::size_t h,
                   const double* row, std::size_t w) {
  for (std::size_t y = 0; y < h; ++y) {
    const double c = col[y];
    double* out = dst + y * w;
    for (std::size_t x = 0; x < w; ++x) {
      out[x] = c * row[x];
    }
  }
}

}  // namespace scalar

bool avx2_available() {
#ifdef HANDGEO_HAVE_AVX2
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

namespace {

Backend detect_backend() {
  if (const char* env = std::getenv("HANDGEO_KERNEL_BACKEND")) {
    const std::string v(env);
    if (v == "scalar") return Backend::kScalar;
    if (v == "avx2") {
      if (!avx2_available()) {
        throw std::invalid_argument(
            "HANDGEO_KERNEL_BACKEND=avx2 but AVX2 is unavailable");
      }
      return Backend::kAvx2;
    }
    throw std::invalid_argument("unknown HANDGEO_KERNEL_BACKEND: " + v);
  }
  return avx2_available() ? Backend::kAvx2 : Backend::kScalar;
}

Backend& backend_state() {
  static Backend backend = detect_backend();
  return backend;
}

}  // namespace

Backend active_backend() { return backend_state(); }

void set_backend(Backend backend) {
  if (backend == Backend::kAvx2 && !avx2_available()) {
    throw std::invalid_argument("AVX2 backend unavailable on this CPU/build");
  }
  backend_state() = backend;
}

const char* backend_name(Backend backend) {
  return backend == Backend::kAvx2 ? "avx2" : "scalar";
}

#ifdef HANDGEO_HAVE_AVX2
#define HANDGEO_DISPATCH(fn, ...)                  \
  (active_backend() == Backend::kAvx2 ? avx2::fn(__VA_ARGS__) \
                                      : scalar::fn(__VA_ARGS__))
#else
#define HANDGEO_DISPATCH(fn, ...) scalar::fn(__VA_ARGS__)
#endif

double sum_sq_diff(const double* a, const double* b, std::size_t n) {
  return HANDGEO_DISPATCH(sum_sq_diff, a, b, n);
}

void scaled_diff(double* dst, const double* a, const double* b, double s,
                 std::size_t n) {
  HANDGEO_DISPATCH(scaled_diff, dst, a, b, s, n);
}

void add_inplace(double* acc, const double* src, std::size_t n) {
  HANDGEO_DISPATCH(add_inplace, acc, src, n);
}

double max_value(const double* a, std::size_t n) {
  return HANDGEO_DISPATCH(max_value, a, n);
}

void outer_product(double* dst, const double* col, std::size_t h,
                   const double* row, std::size_t w) {
  HANDGEO_DISPATCH(outer_product, dst, col, h, row, w);
}

#undef HANDGEO_DISPATCH

}  // namespace handgeo::kernels
