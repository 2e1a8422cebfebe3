#include "lsl/simd.hpp"

#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

namespace lsl::simd {

namespace {

constexpr KernelTable kScalarTable{&scalar::weighted_dot, &scalar::triple_product,
                                   &scalar::product_rule, &scalar::squared_distance};
#if defined(LSL_HAVE_AVX2_KERNELS)
constexpr KernelTable kAvx2Table{&avx2::weighted_dot, &avx2::triple_product, &avx2::product_rule,
                                 &avx2::squared_distance};
#endif
#if defined(LSL_HAVE_NEON_KERNELS)
constexpr KernelTable kNeonTable{&neon::weighted_dot, &neon::triple_product, &neon::product_rule,
                                 &neon::squared_distance};
#endif

Backend initial_backend() {
    if (const char* env = std::getenv("LSL_SIMD"); env != nullptr && std::string(env) == "scalar") {
        return Backend::Scalar;
    }
    return detect_backend();
}

std::atomic<Backend>& active() {
    static std::atomic<Backend> backend{initial_backend()};
    return backend;
}

void check_sizes(std::size_t a, std::size_t b) {
    if (a != b) throw std::invalid_argument("simd kernel: span size mismatch");
}

}  // namespace

std::string_view backend_name(Backend b) {
    switch (b) {
        case Backend::Scalar: return "scalar";
        case Backend::Avx2: return "avx2";
        case Backend::Neon: return "neon";
    }
    return "unknown";
}

bool backend_available(Backend b) {
    switch (b) {
        case Backend::Scalar: return true;
        case Backend::Avx2:
#if defined(LSL_HAVE_AVX2_KERNELS)
            return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
            return false;
#endif
        case Backend::Neon:
#if defined(LSL_HAVE_NEON_KERNELS)
            return true;
#else
            return false;
#endif
    }
    return false;
}

Backend detect_backend() {
    if (backend_available(Backend::Avx2)) return Backend::Avx2;
    if (backend_available(Backend::Neon)) return Backend::Neon;
    return Backend::Scalar;
}

Backend active_backend() { return active().load(std::memory_order_relaxed); }

void set_backend(Backend b) {
    if (!backend_available(b)) {
        throw std::invalid_argument("simd backend not available: " + std::string(backend_name(b)));
    }
    active().store(b, std::memory_order_relaxed);
}

const KernelTable& kernels(Backend b) {
    switch (b) {
#if defined(LSL_HAVE_AVX2_KERNELS)
        case Backend::Avx2: return kAvx2Table;
#endif
#if defined(LSL_HAVE_NEON_KERNELS)
        case Backend::Neon: return kNeonTable;
#endif
        default: return kScalarTable;
    }
}

double weighted_dot(std::span<const double> a, std::span<const double> b,
                    std::span<const double> w) {
    check_sizes(a.size(), b.size());
    check_sizes(a.size(), w.size());
    return kernels(active_backend()).weighted_dot(a.data(), b.data(), w.data(), a.size());
}

void triple_product(std::span<const double> a, std::span<const double> b,
                    std::span<const double> w, std::span<double> out) {
    check_sizes(a.size(), b.size());
    check_sizes(a.size(), w.size());
    check_sizes(a.size(), out.size());
    kernels(active_backend()).triple_product(a.data(), b.data(), w.data(), out.data(), a.size());
}

void product_rule(std::span<const double> a, std::span<const double> da,
                  std::span<const double> b, std::span<const double> db,
                  std::span<const double> w, std::span<double> out) {
    check_sizes(a.size(), da.size());
    check_sizes(a.size(), b.size());
    check_sizes(a.size(), db.size());
    check_sizes(a.size(), w.size());
    check_sizes(a.size(), out.size());
    kernels(active_backend())
        .product_rule(a.data(), da.data(), b.data(), db.data(), w.data(), out.data(), a.size());
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
    check_sizes(a.size(), b.size());
    return kernels(active_backend()).squared_distance(a.data(), b.data(), a.size());
}

}  // namespace lsl::simd
