#pragma once

#include <cstddef>
#include <string>

// Grid arithmetic kernels used by the heatmap pipeline. Each operation has a
// scalar reference implementation and, on x86-64 builds, an AVX2+FMA variant.
// The dispatched entry points pick a backend once at startup (runtime CPUID
// check, overridable via the HANDGEO_KERNEL_BACKEND environment variable or
// set_backend()). Scalar and AVX2 variants are equivalence-tested: the
// multiply/compare kernels are bit-identical, the fused-sum reduction agrees
// to relative 1e-12.

namespace handgeo::kernels {

enum class Backend { kScalar, kAvx2 };

/// Backend chosen by dispatch (CPU detection + env override, cached).
Backend active_backend();

/// Force a backend. Throws std::invalid_argument if the CPU cannot run it.
void set_backend(Backend backend);

const char* backend_name(Backend backend);

/// True when this binary carries the AVX2 variants and the CPU supports them.
bool avx2_available();

// Dispatched operations -------------------------------------------------

/// sum over i of (a[i] - b[i])^2
double sum_sq_diff(const double* a, const double* b, std::size_t n);

/// dst[i] = s * (a[i] - b[i])
void scaled_diff(double* dst, const double* a, const double* b, double s,
                 std::size_t n);

/// acc[i] += src[i]
void add_inplace(double* acc, const double* src, std::size_t n);

/// max over i of a[i]; n must be > 0
double max_value(const double* a, std::size_t n);

/// dst[y*w + x] = col[y] * row[x]
void outer_product(double* dst, const double* col, std::size_t h,
                   const double* row, std::size_t w);

namespace scalar {
double sum_sq_diff(const double* a, const double* b, std::size_t n);
void scaled_diff(double* dst, const double* a, const double* b, double s,
                 std::size_t n);
void add_inplace(double* acc, const double* src, std::size_t n);
double max_value(const double* a, std::size_t n);
void outer_product(double* dst, const double* col, std::size_t h,
                   const double* row, std::size_t w);
}  // namespace scalar

#ifdef HANDGEO_HAVE_AVX2
namespace avx2 {
double sum_sq_diff(const double* a, const double* b, std::size_t n);
void scaled_diff(double* dst, const double* a, const double* b, double s,
                 std::size_t n);
void add_inplace(double* acc, const double* src, std::size_t n);
double max_value(const double* a, std::size_t n);
void outer_product(double* dst, const double* col, std::size_t h,
                   const double* row, std::size_t w);
}  // namespace avx2
#endif

}  // namespace handgeo::kernels
