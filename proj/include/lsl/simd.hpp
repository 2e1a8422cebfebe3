#pragma once

// Data-parallel inner loops shared by the solver, the ROM assembly and the
// Lippmann-Schwinger row assembly. Every kernel has a scalar reference
// implementation; vectorized variants are picked at runtime from what the
// CPU supports and must agree with the reference (see tests/test_simd.cpp).

#include <cstddef>
#include <span>
#include <string_view>

namespace lsl::simd {

enum class Backend { Scalar, Avx2, Neon };

std::string_view backend_name(Backend b);

// Best backend compiled in and supported by this CPU.
Backend detect_backend();

// Backend the dispatched entry points below currently use. Initialized from
// detect_backend(); LSL_SIMD=scalar in the environment forces the reference.
Backend active_backend();
void set_backend(Backend b);
bool backend_available(Backend b);

struct KernelTable {
    // sum_i a[i] * b[i] * w[i]
    double (*weighted_dot)(const double* a, const double* b, const double* w, std::size_t n);
    // out[i] = a[i] * b[i] * w[i]
    void (*triple_product)(const double* a, const double* b, const double* w, double* out,
                           std::size_t n);
    // out[i] = (da[i] * b[i] + a[i] * db[i]) * w[i]
    void (*product_rule)(const double* a, const double* da, const double* b, const double* db,
                         const double* w, double* out, std::size_t n);
    // sum_i (a[i] - b[i])^2
    double (*squared_distance)(const double* a, const double* b, std::size_t n);
};

const KernelTable& kernels(Backend b);

namespace scalar {
double weighted_dot(const double* a, const double* b, const double* w, std::size_t n);
void triple_product(const double* a, const double* b, const double* w, double* out, std::size_t n);
void product_rule(const double* a, const double* da, const double* b, const double* db,
                  const double* w, double* out, std::size_t n);
double squared_distance(const double* a, const double* b, std::size_t n);
}  // namespace scalar

#if defined(LSL_HAVE_AVX2_KERNELS)
namespace avx2 {
double weighted_dot(const double* a, const double* b, const double* w, std::size_t n);
void triple_product(const double* a, const double* b, const double* w, double* out, std::size_t n);
void product_rule(const double* a, const double* da, const double* b, const double* db,
                  const double* w, double* out, std::size_t n);
double squared_distance(const double* a, const double* b, std::size_t n);
}  // namespace avx2
#endif

#if defined(LSL_HAVE_NEON_KERNELS)
namespace neon {
double weighted_dot(const double* a, const double* b, const double* w, std::size_t n);
void triple_product(const double* a, const double* b, const double* w, double* out, std::size_t n);
void product_rule(const double* a, const double* da, const double* b, const double* db,
                  const double* w, double* out, std::size_t n);
double squared_distance(const double* a, const double* b, std::size_t n);
}  // namespace neon
#endif

// Dispatched convenience wrappers over spans. Sizes must match.
double weighted_dot(std::span<const double> a, std::span<const double> b,
                    std::span<const double> w);
void triple_product(std::span<const double> a, std::span<const double> b,
                    std::span<const double> w, std::span<double> out);
void product_rule(std::span<const double> a, std::span<const double> da,
                  std::span<const double> b, std::span<const double> db,
                  std::span<const double> w, std::span<double> out);
double squared_distance(std::span<const double> a, std::span<const double> b);

}  // namespace lsl::simd
