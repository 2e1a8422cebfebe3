#include "lsl/simd.hpp"

#include <arm_neon.h>

namespace lsl::simd::neon {

double weighted_dot(const double* a, const double* b, const double* w, std::size_t n) {
    float64x2_t acc0 = vdupq_n_f64(0.0);
    float64x2_t acc1 = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const float64x2_t p0 = vmulq_f64(vld1q_f64(a + i), vld1q_f64(b + i));
        const float64x2_t p1 = vmulq_f64(vld1q_f64(a + i + 2), vld1q_f64(b + i + 2));
        acc0 = vfmaq_f64(acc0, p0, vld1q_f64(w + i));
        acc1 = vfmaq_f64(acc1, p1, vld1q_f64(w + i + 2));
    }
    double sum = vaddvq_f64(vaddq_f64(acc0, acc1));
    for (; i < n; ++i) sum += a[i] * b[i] * w[i];
    return sum;
}

void triple_product(const double* a, const double* b, const double* w, double* out, std::size_t n) {
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        const float64x2_t p = vmulq_f64(vld1q_f64(a + i), vld1q_f64(b + i));
        vst1q_f64(out + i, vmulq_f64(p, vld1q_f64(w + i)));
    }
    for (; i < n; ++i) out[i] = a[i] * b[i] * w[i];
}

void product_rule(const double* a, const double* da, const double* b, const double* db,
                  const double* w, double* out, std::size_t n) {
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        const float64x2_t left = vmulq_f64(vld1q_f64(da + i), vld1q_f64(b + i));
        const float64x2_t right = vmulq_f64(vld1q_f64(a + i), vld1q_f64(db + i));
        vst1q_f64(out + i, vmulq_f64(vaddq_f64(left, right), vld1q_f64(w + i)));
    }
    for (; i < n; ++i) out[i] = (da[i] * b[i] + a[i] * db[i]) * w[i];
}

double squared_distance(const double* a, const double* b, std::size_t n) {
    float64x2_t acc = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        const float64x2_t d = vsubq_f64(vld1q_f64(a + i), vld1q_f64(b + i));
        acc = vfmaq_f64(acc, d, d);
    }
    double sum = vaddvq_f64(acc);
    for (; i < n; ++i) {
        const double d = a[i] - b[i];
        sum += d * d;
    }
    return sum;
}

}  // namespace lsl::simd::neon
