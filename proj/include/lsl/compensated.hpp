#pragma once

// Small dense products and solves carried out in roughly twice the working
// precision (error-free transformations, Ogita-Rump-Oishi Dot2). Used on the
// mK x mK ROM matrices, whose condition number routinely reaches 1e10, so
// plain double products would lose the M-orthogonality the internal fields
// depend on.

#include "lsl/types.hpp"

#include <Eigen/Cholesky>

#include <cmath>

namespace lsl::compensated {

// Running sum of products carrying the rounding error of every step.
struct Accumulator {
    double sum = 0.0;
    double err = 0.0;

    void add(double x) {
        const double s = sum + x;
        const double z = s - sum;
        err += (sum - (s - z)) + (x - z);
        sum = s;
    }
    void add_product(double a, double b) {
        const double p = a * b;
        err += std::fma(a, b, -p);
        add(p);
    }
    double value() const { return sum + err; }
};

// sum_i a[i] * b[i] with a compensated accumulator.
double dot(const double* a, Eigen::Index a_stride, const double* b, Eigen::Index b_stride,
           Eigen::Index n);

// a * b, each entry evaluated with dot().
Matrix product(const Matrix& a, const Matrix& b);

// a^T * b.
Matrix transpose_product(const Matrix& a, const Matrix& b);

// Cholesky solve of M X = R refined with compensated residuals until the
// correction stops shrinking.
class RefinedCholesky {
public:
    explicit RefinedCholesky(Matrix m);

    bool ok() const noexcept { return ok_; }
    Matrix solve(const Matrix& rhs) const;
    const Matrix& matrix() const noexcept { return m_; }

private:
    Matrix m_;
    Eigen::LLT<Matrix> llt_;
    bool ok_;
};

}  // namespace lsl::compensated
