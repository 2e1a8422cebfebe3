#include "lsl/simd.hpp"

namespace lsl::simd::scalar {

double weighted_dot(const double* a, const double* b, const double* w, std::size_t n) {
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) sum += a[i] * b[i] * w[i];
    return sum;
}

void triple_product(const double* a, const double* b, const double* w, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = a[i] * b[i] * w[i];
}

void product_rule(const double* a, const double* da, const double* b, const double* db,
                  const double* w, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = (da[i] * b[i] + a[i] * db[i]) * w[i];
}

double squared_distance(const double* a, const double* b, std::size_t n) {
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = a[i] - b[i];
        sum += d * d;
    }
    return sum;
}

}  // namespace lsl::simd::scalar
