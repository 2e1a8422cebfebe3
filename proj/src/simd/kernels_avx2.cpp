// Compiled with -mavx2 -mfma; only reached after a runtime CPU check.
#include "lsl/simd.hpp"

#include <immintrin.h>

namespace lsl::simd::avx2 {

namespace {

inline double horizontal_sum(__m256d v) {
    const __m128d lo = _mm256_castpd256_pd128(v);
    const __m128d hi = _mm256_extractf128_pd(v, 1);
    const __m128d s = _mm_add_pd(lo, hi);
    const __m128d shuf = _mm_unpackhi_pd(s, s);
    return _mm_cvtsd_f64(_mm_add_sd(s, shuf));
}

}  // namespace

double weighted_dot(const double* a, const double* b, const double* w, std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        const __m256d p0 = _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
        const __m256d p1 = _mm256_mul_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4));
        acc0 = _mm256_fmadd_pd(p0, _mm256_loadu_pd(w + i), acc0);
        acc1 = _mm256_fmadd_pd(p1, _mm256_loadu_pd(w + i + 4), acc1);
    }
    for (; i + 4 <= n; i += 4) {
        const __m256d p = _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
        acc0 = _mm256_fmadd_pd(p, _mm256_loadu_pd(w + i), acc0);
    }
    double sum = horizontal_sum(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i) sum += a[i] * b[i] * w[i];
    return sum;
}

// No FMA here: elementwise products stay bit-identical to the scalar path.
void triple_product(const double* a, const double* b, const double* w, double* out, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d p = _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
        _mm256_storeu_pd(out + i, _mm256_mul_pd(p, _mm256_loadu_pd(w + i)));
    }
    for (; i < n; ++i) out[i] = a[i] * b[i] * w[i];
}

void product_rule(const double* a, const double* da, const double* b, const double* db,
                  const double* w, double* out, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d left = _mm256_mul_pd(_mm256_loadu_pd(da + i), _mm256_loadu_pd(b + i));
        const __m256d right = _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(db + i));
        _mm256_storeu_pd(out + i, _mm256_mul_pd(_mm256_add_pd(left, right), _mm256_loadu_pd(w + i)));
    }
    for (; i < n; ++i) out[i] = (da[i] * b[i] + a[i] * db[i]) * w[i];
}

double squared_distance(const double* a, const double* b, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
        acc = _mm256_fmadd_pd(d, d, acc);
    }
    double sum = horizontal_sum(acc);
    for (; i < n; ++i) {
        const double d = a[i] - b[i];
        sum += d * d;
    }
    return sum;
}

}  // namespace lsl::simd::avx2
