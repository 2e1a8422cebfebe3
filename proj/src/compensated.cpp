#include "lsl/compensated.hpp"

#include <cmath>

namespace lsl::compensated {

double dot(const double* a, Eigen::Index a_stride, const double* b, Eigen::Index b_stride,
           Eigen::Index n) {
    double sum = 0.0;
    double err = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double x = a[i * a_stride];
        const double y = b[i * b_stride];
        const double p = x * y;
        const double pe = std::fma(x, y, -p);
        const double s = sum + p;
        const double z = s - sum;
        const double se = (sum - (s - z)) + (p - z);
        sum = s;
        err += pe + se;
    }
    return sum + err;
}

namespace {

// rhs - m * x, entrywise in one compensated accumulator so the subtraction
// of nearly equal quantities keeps its low-order bits.
Matrix residual(const Matrix& rhs, const Matrix& m, const Matrix& x) {
    Matrix out(rhs.rows(), rhs.cols());
    for (Eigen::Index j = 0; j < rhs.cols(); ++j) {
        for (Eigen::Index i = 0; i < rhs.rows(); ++i) {
            double sum = rhs(i, j);
            double err = 0.0;
            for (Eigen::Index k = 0; k < m.cols(); ++k) {
                const double p = -m(i, k) * x(k, j);
                const double pe = std::fma(-m(i, k), x(k, j), -p);
                const double s = sum + p;
                const double z = s - sum;
                err += pe + ((sum - (s - z)) + (p - z));
                sum = s;
            }
            out(i, j) = sum + err;
        }
    }
    return out;
}

}  // namespace

Matrix product(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) throw InvalidArgument("compensated", "product size mismatch");
    Matrix out(a.rows(), b.cols());
    for (Eigen::Index j = 0; j < b.cols(); ++j) {
        for (Eigen::Index i = 0; i < a.rows(); ++i) {
            out(i, j) = dot(a.data() + i, a.rows(), b.data() + j * b.rows(), 1, a.cols());
        }
    }
    return out;
}

Matrix transpose_product(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows()) throw InvalidArgument("compensated", "product size mismatch");
    Matrix out(a.cols(), b.cols());
    for (Eigen::Index j = 0; j < b.cols(); ++j) {
        for (Eigen::Index i = 0; i < a.cols(); ++i) {
            out(i, j) = dot(a.data() + i * a.rows(), 1, b.data() + j * b.rows(), 1, a.rows());
        }
    }
    return out;
}

RefinedCholesky::RefinedCholesky(Matrix m) : m_(std::move(m)), llt_(m_), ok_(llt_.info() == Eigen::Success) {}

Matrix RefinedCholesky::solve(const Matrix& rhs) const {
    if (!ok_) throw Error("compensated", "matrix is not positive definite");
    Matrix x = llt_.solve(rhs);
    double previous = std::numeric_limits<double>::infinity();
    for (int iter = 0; iter < 8; ++iter) {
        const Matrix correction = llt_.solve(residual(rhs, m_, x));
        const double size = correction.norm();
        if (!(size < previous)) break;
        x += correction;
        previous = size;
        if (size <= 1e-17 * x.norm()) break;
    }
    return x;
}

}  // namespace lsl::compensated
